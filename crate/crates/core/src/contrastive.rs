//! Contrastive CUR: rank columns by the ratio of foreground to background
//! leverage, then rank foreground rows by leverage on the selected columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_index_set, DataMatrix};
use crate::scoring::{column_leverage, contrastive_scores, rank_top, row_leverage, ScoreVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcurConfig {
    /// Singular vectors used for both leverage computations.
    pub k: usize,
    pub c: usize,
    pub r: usize,
    pub epsilon: f64,
}

impl Default for CcurConfig {
    fn default() -> Self {
        Self {
            k: 7,
            c: 10,
            r: 10,
            epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcurSelection {
    pub col_indices: Vec<usize>,
    pub col_scores: ScoreVector,
    pub row_indices: Vec<usize>,
    pub row_scores: ScoreVector,
    pub config: CcurConfig,
    /// Rank actually used by the row stage: `min(k, c, n)`.
    pub row_k: usize,
}

fn check_k(k: usize, x: &DataMatrix, which: &str) -> Result<()> {
    let limit = x.nrows().min(x.ncols());
    if k == 0 || k > limit {
        return Err(Error::Dimension(format!(
            "k = {k} must lie in 1..={limit} for the {which} ({}x{})",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// Top `c` columns by `l^x_d / (l^y_d + epsilon)`, plus the full score vector.
pub fn select_columns(
    fg: &DataMatrix,
    bg: &DataMatrix,
    k: usize,
    c: usize,
    epsilon: f64,
) -> Result<(Vec<usize>, ScoreVector)> {
    let scores = contrastive_column_scores(fg, bg, k, epsilon)?;
    let indices = rank_top(&scores.scores, c)?;
    Ok((indices, scores))
}

/// Contrastive scores for every column, without truncating to a selection.
pub fn contrastive_column_scores(
    fg: &DataMatrix,
    bg: &DataMatrix,
    k: usize,
    epsilon: f64,
) -> Result<ScoreVector> {
    if fg.ncols() != bg.ncols() {
        return Err(Error::Dimension(format!(
            "foreground has {} columns but background has {}",
            fg.ncols(),
            bg.ncols()
        )));
    }
    check_k(k, fg, "foreground")?;
    check_k(k, bg, "background")?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let (lx, ly) = rayon::join(|| column_leverage(fg, k), || column_leverage(bg, k));
    contrastive_scores(&lx?, &ly?, epsilon)
}

/// Top `r` foreground rows by leverage of `fg` restricted to `col_indices`.
pub fn select_rows(
    fg: &DataMatrix,
    col_indices: &[usize],
    k: usize,
    r: usize,
) -> Result<(Vec<usize>, ScoreVector)> {
    check_index_set(col_indices, fg.ncols(), "column")?;
    let restricted = fg.select_columns(col_indices)?;
    check_k(k, &restricted, "column-restricted foreground")?;
    let scores = row_leverage(&restricted, k)?;
    let indices = rank_top(&scores.scores, r)?;
    Ok((indices, scores))
}

/// Column stage followed by the row stage on the chosen columns.
///
/// The row stage runs at rank `min(k, c, n)` since the restricted matrix has
/// only `c` columns; the rank used is reported in `row_k`.
pub fn ccur(fg: &DataMatrix, bg: &DataMatrix, config: &CcurConfig) -> Result<CcurSelection> {
    let CcurConfig { k, c, r, epsilon } = *config;
    if r == 0 || r > fg.nrows() {
        return Err(Error::Stage {
            stage: "row selection",
            inner: Box::new(Error::Dimension(format!(
                "r = {r} must lie in 1..={}",
                fg.nrows()
            ))),
        });
    }
    let (col_indices, col_scores) =
        select_columns(fg, bg, k, c, epsilon).map_err(Error::in_stage("column selection"))?;
    let row_k = k.min(c).min(fg.nrows());
    let (row_indices, row_scores) =
        select_rows(fg, &col_indices, row_k, r).map_err(Error::in_stage("row selection"))?;
    Ok(CcurSelection {
        col_indices,
        col_scores,
        row_indices,
        row_scores,
        config: *config,
        row_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::ScoreKind;
    use nalgebra::DMatrix;

    #[test]
    fn background_variance_pushes_column_last() {
        // diag(3, 2, 1) with every row repeated, against a background whose
        // variance sits entirely in column 2.
        let fg = DataMatrix::from_rows(&[
            [3.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 1.0],
            [3.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let bg =
            DataMatrix::from_rows(&[[0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 0.0, -1.5]]).unwrap();
        let (idx, scores) = select_columns(&fg, &bg, 1, 3, 1e-6).unwrap();
        assert_eq!(scores.kind, ScoreKind::Contrastive);
        assert_eq!(*idx.last().unwrap(), 2);
        // k = 1: fg leverage [1, 0, 0], bg leverage [0, 0, 1].
        assert!((scores.scores[0] - 1.0 / 1e-6).abs() < 1e-3);
        assert_eq!(scores.scores[2], 0.0);
    }

    #[test]
    fn identical_groups_keep_foreground_order() {
        let fg =
            DataMatrix::from_rows(&[[1.0, 2.0, 0.3], [0.5, -1.0, 2.0], [2.0, 0.1, 0.2]]).unwrap();
        let (idx, scores) = select_columns(&fg, &fg, 2, 3, 1e-6).unwrap();
        let lev = column_leverage(&fg, 2).unwrap();
        assert_eq!(idx, lev.ranking());
        for (s, l) in scores.scores.iter().zip(&lev.scores) {
            assert_eq!(*s, l / (l + 1e-6));
        }
    }

    #[test]
    fn row_stage_on_restricted_column() {
        let fg = DataMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]]).unwrap();
        let (idx, scores) = select_rows(&fg, &[1], 1, 1).unwrap();
        assert_eq!(idx, vec![1]);
        let expected = [0.2, 0.8, 0.0];
        for (s, e) in scores.scores.iter().zip(expected) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn dominant_row_wins() {
        let fg = DataMatrix::from_rows(&[[0.0, 0.0], [0.0, 0.0], [3.0, -1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(select_rows(&fg, &[0, 1], 1, 1).unwrap().0, vec![2]);
        let (all, _) = select_rows(&fg, &[0, 1], 1, 4).unwrap();
        assert_eq!(all, vec![2, 0, 1, 3]);
    }

    #[test]
    fn row_stage_errors() {
        let fg = DataMatrix::new(DMatrix::identity(3, 3)).unwrap();
        assert!(select_rows(&fg, &[], 1, 1).is_err());
        assert!(select_rows(&fg, &[3], 1, 1).is_err());
        assert!(select_rows(&fg, &[0], 2, 1).is_err());
    }

    #[test]
    fn column_stage_errors() {
        let fg = DataMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let bg = DataMatrix::new(DMatrix::identity(2, 2)).unwrap();
        assert!(select_columns(&fg, &bg, 1, 1, 1e-6).is_err());
        let bg = DataMatrix::new(DMatrix::identity(2, 3)).unwrap();
        assert!(select_columns(&fg, &bg, 3, 1, 1e-6).is_err());
        assert!(select_columns(&fg, &bg, 1, 4, 1e-6).is_err());
        assert!(select_columns(&fg, &bg, 1, 1, 0.0).is_err());
    }

    #[test]
    fn ccur_names_failing_stage() {
        let fg = DataMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let bg = DataMatrix::new(DMatrix::identity(3, 2)).unwrap();
        let cfg = CcurConfig {
            k: 1,
            c: 1,
            r: 1,
            epsilon: 1e-6,
        };
        let err = ccur(&fg, &bg, &cfg).unwrap_err();
        assert!(
            err.to_string().starts_with("column selection stage"),
            "{err}"
        );
    }

    #[test]
    fn ccur_caps_row_rank() {
        let fg = DataMatrix::from_rows(&[
            [1.0, 0.2, 0.3, 0.0],
            [0.1, 2.0, 0.0, 0.4],
            [0.0, 0.3, 3.0, 0.1],
            [0.5, 0.0, 0.2, 1.5],
        ])
        .unwrap();
        let cfg = CcurConfig {
            k: 3,
            c: 2,
            r: 2,
            epsilon: 1e-6,
        };
        let sel = ccur(&fg, &fg, &cfg).unwrap();
        assert_eq!(sel.row_k, 2);
        assert_eq!(sel.col_indices.len(), 2);
        assert_eq!(sel.row_indices.len(), 2);
        assert_eq!(sel.row_scores.k_used, 2);
    }

    #[test]
    fn exhaustive_selection() {
        let fg =
            DataMatrix::from_rows(&[[1.0, 0.2, 0.3], [0.1, 2.0, 0.0], [0.0, 0.3, 3.0]]).unwrap();
        let bg = DataMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.5, 0.0]]).unwrap();
        let cfg = CcurConfig {
            k: 2,
            c: 3,
            r: 3,
            epsilon: 1e-6,
        };
        let sel = ccur(&fg, &bg, &cfg).unwrap();
        let mut cols = sel.col_indices.clone();
        cols.sort_unstable();
        assert_eq!(cols, vec![0, 1, 2]);
        assert_eq!(sel.col_indices, sel.col_scores.ranking());
        assert_eq!(sel.row_indices, sel.row_scores.ranking());
    }
}
