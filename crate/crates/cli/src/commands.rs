use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use ccur::io::{format_f64, load_matrix, write_matrix};
use ccur::linalg::truncated_svd;
use ccur::sim::{run_benchmark, Method, SimConfig};
use ccur::{cpca_rank_features, cur_decompose, cur_sample, CcurConfig, CpcaConfig, DataMatrix};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::cli::{
    CcurArgs, Command, CpcaArgs, CurArgs, InputFormat, ProjectArgs, ReplayArgs, SimulateArgs,
};
use crate::manifest::{digest_file, InputDigest, RunManifest, MANIFEST_FILE};
use crate::CliError;

/// Files produced by a subcommand, in write order.
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    inputs: Vec<InputDigest>,
    seed: Option<u64>,
}

impl Outputs {
    fn new(inputs: Vec<InputDigest>) -> Self {
        Self {
            files: Vec::new(),
            inputs,
            seed: None,
        }
    }

    fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.push((name.to_owned(), bytes));
        Ok(())
    }

    fn csv(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_owned(), bytes));
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    CliError::Usage(msg.into()).into()
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(usage(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn load(path: &Path, format: &InputFormat, role: &str) -> Result<DataMatrix> {
    load_matrix(path, &format.load_options())
        .with_context(|| format!("loading {role} matrix {}", path.display()))
}

fn labels_json(labels: Option<&[String]>, indices: &[usize]) -> serde_json::Value {
    match labels {
        Some(l) => json!(indices.iter().map(|&i| &l[i]).collect::<Vec<_>>()),
        None => serde_json::Value::Null,
    }
}

fn label_at(labels: Option<&[String]>, i: usize) -> String {
    labels.map_or_else(String::new, |l| l[i].clone())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(&row)?;
    }
    wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

fn matrix_bytes(
    values: &nalgebra::DMatrix<f64>,
    row_labels: Option<&[String]>,
    col_labels: Option<&[String]>,
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_matrix(&mut buf, values, row_labels, col_labels)?;
    Ok(buf)
}

fn pick(labels: Option<&[String]>, indices: &[usize]) -> Option<Vec<String>> {
    labels.map(|l| indices.iter().map(|&i| l[i].clone()).collect())
}

fn write_run<A: Serialize>(subcommand: &str, args: &A, out: Outputs, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let manifest = RunManifest {
        tool: env!("CARGO_BIN_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        subcommand: subcommand.to_owned(),
        config: serde_json::to_value(args)?,
        inputs: out.inputs,
        outputs: out.files.iter().map(|(n, _)| n.clone()).collect(),
        seed: out.seed,
    };
    for (name, bytes) in &out.files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ccur(run) => execute("ccur", &resolve_ccur(run.args), &run.out_dir, ccur_cmd),
        Command::Cur(run) => execute("cur", &run.args, &run.out_dir, cur_cmd),
        Command::Cpca(run) => execute("cpca", &run.args, &run.out_dir, cpca_cmd),
        Command::Simulate(run) => execute("simulate", &run.args, &run.out_dir, simulate_cmd),
        Command::Project(run) => execute("project", &run.args, &run.out_dir, project_cmd),
        Command::Replay(args) => replay(&args),
    }
}

fn execute<A: Serialize>(
    name: &str,
    args: &A,
    out_dir: &Path,
    run: fn(&A) -> Result<Outputs>,
) -> Result<()> {
    let out = run(args)?;
    write_run(name, args, out, out_dir)
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    manifest.verify_inputs()?;
    fn config<A: DeserializeOwned>(m: &RunManifest) -> Result<A> {
        serde_json::from_value(m.config.clone())
            .map_err(|e| CliError::Input(format!("manifest config: {e}")).into())
    }
    let out = &args.out_dir;
    match manifest.subcommand.as_str() {
        "ccur" => execute(
            "ccur",
            &resolve_ccur(config::<CcurArgs>(&manifest)?),
            out,
            ccur_cmd,
        ),
        "cur" => execute("cur", &config::<CurArgs>(&manifest)?, out, cur_cmd),
        "cpca" => execute("cpca", &config::<CpcaArgs>(&manifest)?, out, cpca_cmd),
        "simulate" => execute(
            "simulate",
            &config::<SimulateArgs>(&manifest)?,
            out,
            simulate_cmd,
        ),
        "project" => execute(
            "project",
            &config::<ProjectArgs>(&manifest)?,
            out,
            project_cmd,
        ),
        other => Err(CliError::Input(format!("unknown subcommand {other:?} in manifest")).into()),
    }
}

/// Fills in the default `r = c` so the manifest records the value used.
fn resolve_ccur(mut args: CcurArgs) -> CcurArgs {
    args.r.get_or_insert(args.c);
    args
}

fn ccur_cmd(args: &CcurArgs) -> Result<Outputs> {
    positive("k", args.k)?;
    positive("c", args.c)?;
    let r = args.r.unwrap_or(args.c);
    positive("r", r)?;
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(usage("--epsilon must be positive and finite"));
    }

    let inputs = vec![digest_file(&args.fg, "fg")?, digest_file(&args.bg, "bg")?];
    let mut fg = load(&args.fg, &args.format, "foreground")?;
    let mut bg = load(&args.bg, &args.format, "background")?;
    if let (Some(a), Some(b)) = (fg.col_labels(), bg.col_labels()) {
        if a != b {
            return Err(
                CliError::Input("foreground and background column labels differ".into()).into(),
            );
        }
    }
    if args.center {
        fg = fg.center_columns();
        bg = bg.center_columns();
    }

    let config = CcurConfig {
        k: args.k,
        c: args.c,
        r,
        epsilon: args.epsilon,
    };
    let sel = ccur::ccur(&fg, &bg, &config)?;

    let mut out = Outputs::new(inputs);
    out.json(
        "selection.json",
        &json!({
            "col_indices": sel.col_indices,
            "col_labels": labels_json(fg.col_labels(), &sel.col_indices),
            "row_indices": sel.row_indices,
            "row_labels": labels_json(fg.row_labels(), &sel.row_indices),
            "row_k": sel.row_k,
            "col_scores": sel.col_scores.scores,
            "row_scores": sel.row_scores.scores,
            "config": {
                "k": args.k,
                "c": args.c,
                "r": r,
                "epsilon": args.epsilon,
                "center": args.center,
            },
        }),
    )?;

    let mut rows = Vec::new();
    for (axis, scores, selected, labels) in [
        (
            "column",
            &sel.col_scores.scores,
            &sel.col_indices,
            fg.col_labels(),
        ),
        (
            "row",
            &sel.row_scores.scores,
            &sel.row_indices,
            fg.row_labels(),
        ),
    ] {
        for (i, s) in scores.iter().enumerate() {
            let rank = selected
                .iter()
                .position(|&x| x == i)
                .map_or_else(String::new, |p| (p + 1).to_string());
            rows.push(vec![
                axis.to_owned(),
                i.to_string(),
                label_at(labels, i),
                format_f64(*s),
                rank,
            ]);
        }
    }
    out.csv(
        "scores.csv",
        csv_bytes(&["axis", "index", "label", "score", "rank"], rows)?,
    );
    Ok(out)
}

fn cur_cmd(args: &CurArgs) -> Result<Outputs> {
    positive("k", args.k)?;
    positive("c", args.c)?;
    positive("r", args.r)?;

    let inputs = vec![digest_file(&args.input, "input")?];
    let x = load(&args.input, &args.format, "input")?;
    let f = if args.sampled {
        cur_sample(&x, args.k, args.c, args.r, args.seed)?
    } else {
        cur_decompose(&x, args.k, args.c, args.r)?
    };

    let mut out = Outputs::new(inputs);
    out.seed = args.sampled.then_some(args.seed);
    out.json(
        "factors.json",
        &json!({
            "col_indices": f.col_indices,
            "col_labels": labels_json(x.col_labels(), &f.col_indices),
            "row_indices": f.row_indices,
            "row_labels": labels_json(x.row_labels(), &f.row_indices),
            "recon_error": f.recon_error,
            "k": args.k,
            "c": args.c,
            "r": args.r,
            "sampled": args.sampled,
            "seed": out.seed,
        }),
    )?;
    let c_labels = pick(x.col_labels(), &f.col_indices);
    let r_labels = pick(x.row_labels(), &f.row_indices);
    out.csv(
        "C.csv",
        matrix_bytes(&f.c, x.row_labels(), c_labels.as_deref())?,
    );
    out.csv(
        "U.csv",
        matrix_bytes(&f.u_mid, c_labels.as_deref(), r_labels.as_deref())?,
    );
    out.csv(
        "R.csv",
        matrix_bytes(&f.r, r_labels.as_deref(), x.col_labels())?,
    );
    Ok(out)
}

fn cpca_cmd(args: &CpcaArgs) -> Result<Outputs> {
    positive("top", args.top)?;
    if !(args.alpha >= 0.0 && args.alpha.is_finite()) {
        return Err(usage("--alpha must be finite and nonnegative"));
    }

    let inputs = vec![digest_file(&args.fg, "fg")?, digest_file(&args.bg, "bg")?];
    let fg = load(&args.fg, &args.format, "foreground")?;
    let bg = load(&args.bg, &args.format, "background")?;
    let res = cpca_rank_features(
        &fg,
        &bg,
        &CpcaConfig {
            alpha: args.alpha,
            num_features: args.top,
        },
    )?;

    let mut out = Outputs::new(inputs);
    out.json(
        "features.json",
        &json!({
            "ranking": res.ranking,
            "labels": labels_json(fg.col_labels(), &res.ranking),
            "eigenvalue": res.eigenvalue,
            "nonpositive_eigenvalue": res.nonpositive_eigenvalue,
            "alpha": args.alpha,
            "top": args.top,
        }),
    )?;
    let rows = res
        .loadings
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), label_at(fg.col_labels(), i), format_f64(*v)])
        .collect();
    out.csv(
        "loadings.csv",
        csv_bytes(&["index", "label", "loading"], rows)?,
    );
    Ok(out)
}

fn simulate_cmd(args: &SimulateArgs) -> Result<Outputs> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.trim().parse::<Method>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = SimConfig {
        n: args.n,
        m: args.m,
        p: args.p,
        latent_dim: args.latent_dim,
        threshold: args.threshold,
        seed: args.seed,
        replicates: args.replicates,
        method_k: args.method_k,
        ccur_c: args.ccur_c,
        epsilon: args.epsilon,
        cpca_alpha: args.alpha,
    };
    config.validate()?;
    if methods.is_empty() {
        return Err(usage("--methods must name at least one method"));
    }

    let result = run_benchmark(&config, &methods)?;
    let mut buf = Vec::new();
    result.write_csv(&mut buf)?;
    let mut out = Outputs::new(Vec::new());
    out.seed = Some(args.seed);
    out.csv("benchmark.csv", buf);
    Ok(out)
}

fn parse_selected_rows(text: &str) -> Result<Vec<usize>> {
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
        if let Some(rows) = value.get("row_indices") {
            return serde_json::from_value(rows.clone())
                .map_err(|e| CliError::Input(format!("row_indices: {e}")).into());
        }
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CliError::Input(format!("not a row index: {t:?}")).into())
        })
        .collect()
}

fn project_cmd(args: &ProjectArgs) -> Result<Outputs> {
    let mut inputs = vec![digest_file(&args.input, "input")?];
    let selected = match &args.selected_rows_file {
        Some(path) => {
            inputs.push(digest_file(path, "selected_rows")?);
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_selected_rows(&text)?
        }
        None => Vec::new(),
    };

    let x = load(&args.input, &args.format, "input")?;
    if let Some(&bad) = selected.iter().find(|&&i| i >= x.nrows()) {
        return Err(CliError::Input(format!(
            "selected row {bad} is out of range for {} rows",
            x.nrows()
        ))
        .into());
    }
    let svd = truncated_svd(&x.center_columns(), 2)?;
    let mut flags = vec![false; x.nrows()];
    for &i in &selected {
        flags[i] = true;
    }
    let rows = (0..x.nrows())
        .map(|i| {
            vec![
                i.to_string(),
                label_at(x.row_labels(), i),
                format_f64(svd.left_vectors[(i, 0)] * svd.singular_values[0]),
                format_f64(svd.left_vectors[(i, 1)] * svd.singular_values[1]),
                u8::from(flags[i]).to_string(),
            ]
        })
        .collect();
    let mut out = Outputs::new(inputs);
    out.csv(
        "projection.csv",
        csv_bytes(&["index", "label", "pc1", "pc2", "selected"], rows)?,
    );
    Ok(out)
}
