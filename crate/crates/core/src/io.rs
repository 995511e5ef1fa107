//! Delimited-text matrix ingestion and output.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// First line holds column labels.
    pub has_header: bool,
    /// First field of every line holds a row label.
    pub has_row_labels: bool,
    /// Transpose after parsing, e.g. for genes-by-cells exports.
    pub transpose: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            has_row_labels: false,
            transpose: false,
        }
    }
}

/// Shortest text that parses back to exactly `x`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn load_matrix<P: AsRef<Path>>(path: P, options: &LoadOptions) -> Result<DataMatrix> {
    let file = File::open(path.as_ref())?;
    read_matrix(BufReader::new(file), options)
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub fn read_matrix<R: Read>(reader: R, options: &LoadOptions) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let label_offset = usize::from(options.has_row_labels);
    let mut col_labels: Option<Vec<String>> = None;
    let mut row_labels = Vec::new();
    let mut cells: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;

    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(idx as u64 + 1, |p| p.line()) as usize;
            parse_error(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if options.has_header && col_labels.is_none() {
            let labels: Vec<String> = record
                .iter()
                .skip(label_offset)
                .map(str::to_owned)
                .collect();
            if labels.is_empty() {
                return Err(parse_error(line, 1, "header has no column labels"));
            }
            col_labels = Some(labels);
            continue;
        }
        let fields = record.len().saturating_sub(label_offset);
        let expected = *width.get_or_insert_with(|| col_labels.as_ref().map_or(fields, Vec::len));
        if fields != expected {
            return Err(parse_error(
                line,
                record.len().min(expected + label_offset) + 1,
                format!("ragged row: {fields} values, expected {expected}"),
            ));
        }
        if fields == 0 {
            return Err(parse_error(line, 1, "row has no values"));
        }
        if options.has_row_labels {
            row_labels.push(record[0].to_owned());
        }
        for (j, cell) in record.iter().enumerate().skip(label_offset) {
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_error(line, j + 1, format!("not a number: {cell:?}")))?;
            if !value.is_finite() {
                return Err(parse_error(
                    line,
                    j + 1,
                    format!("non-finite value {cell:?}"),
                ));
            }
            cells.push(value);
        }
        rows += 1;
    }

    let Some(p) = width else {
        return Err(parse_error(0, 0, "no data rows"));
    };
    let values = DMatrix::from_row_slice(rows, p, &cells);
    let mut m = DataMatrix::new(values)?;
    if let Some(labels) = col_labels {
        m = m
            .with_col_labels(labels)
            .map_err(|e| parse_error(1, 0, format!("column labels: {e}")))?;
    }
    if options.has_row_labels {
        m = m
            .with_row_labels(row_labels)
            .map_err(|e| parse_error(0, 1, format!("row labels: {e}")))?;
    }
    Ok(if options.transpose { m.transpose() } else { m })
}

/// Writes `values` as CSV. A header is emitted when column labels are
/// given; row labels become a leading column (with an empty corner cell).
pub fn write_matrix<W: Write>(
    out: W,
    values: &DMatrix<f64>,
    row_labels: Option<&[String]>,
    col_labels: Option<&[String]>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    };
    if let Some(labels) = col_labels {
        let mut header: Vec<&str> = Vec::with_capacity(labels.len() + 1);
        if row_labels.is_some() {
            header.push("");
        }
        header.extend(labels.iter().map(String::as_str));
        wtr.write_record(&header).map_err(to_io)?;
    }
    for (i, row) in values.row_iter().enumerate() {
        let mut record: Vec<String> = Vec::with_capacity(values.ncols() + 1);
        if let Some(labels) = row_labels {
            record.push(labels[i].clone());
        }
        record.extend(row.iter().map(|&v| format_f64(v)));
        wtr.write_record(&record).map_err(to_io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes a [`DataMatrix`] with whatever labels it carries.
pub fn write_data_matrix<W: Write>(out: W, m: &DataMatrix) -> Result<()> {
    write_matrix(out, m.values(), m.row_labels(), m.col_labels())
}
