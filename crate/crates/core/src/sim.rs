//! Synthetic foreground/background generator with sparse ground truth, and
//! the cumulative recovery benchmark built on it.
//!
//! Foreground rows are `x_i = V z_i + W t_i + e_i`, background rows are
//! `y_j = V s_j + e_j`. All latents, loadings and noise are i.i.d. standard
//! normal. `V`, `W`, `Z_shared` (rows `z_i`) and `Z_unique` (rows `t_i`) are
//! hard-thresholded entrywise before the data are assembled; the background
//! latents `S` and the noise are left dense.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contrastive::{contrastive_column_scores, select_rows};
use crate::cpca::{cpca_rank_features, CpcaConfig};
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::linalg::DataMatrix;
use crate::scoring::{column_leverage, full_ranking, row_leverage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub latent_dim: usize,
    pub threshold: f64,
    pub seed: u64,
    pub replicates: usize,
    /// Singular vectors used by every selection method.
    pub method_k: usize,
    /// Columns kept by CCUR before its row stage.
    pub ccur_c: usize,
    pub epsilon: f64,
    pub cpca_alpha: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 500,
            m: 500,
            p: 100,
            latent_dim: 5,
            threshold: 1.8,
            seed: 0,
            replicates: 100,
            method_k: 10,
            ccur_c: 10,
            epsilon: 1e-6,
            cpca_alpha: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("n", self.n),
            ("m", self.m),
            ("p", self.p),
            ("latent_dim", self.latent_dim),
            ("replicates", self.replicates),
            ("method_k", self.method_k),
            ("ccur_c", self.ccur_c),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite and nonnegative, got {}",
                self.threshold
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if !(self.cpca_alpha >= 0.0 && self.cpca_alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cpca_alpha must be finite and nonnegative, got {}",
                self.cpca_alpha
            )));
        }
        let limit = self.n.min(self.m).min(self.p);
        if self.method_k > limit {
            return Err(Error::Dimension(format!(
                "method_k = {} exceeds min(n, m, p) = {limit}",
                self.method_k
            )));
        }
        if self.ccur_c > self.p {
            return Err(Error::Dimension(format!(
                "ccur_c = {} exceeds p = {}",
                self.ccur_c, self.p
            )));
        }
        Ok(())
    }
}

/// One generated foreground/background pair with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimInstance {
    pub foreground: DataMatrix,
    pub background: DataMatrix,
    /// `p x latent_dim`, thresholded.
    pub v: DMatrix<f64>,
    /// `p x latent_dim`, thresholded.
    pub w: DMatrix<f64>,
    /// `n x latent_dim`, thresholded.
    pub z_shared: DMatrix<f64>,
    /// `n x latent_dim`, thresholded.
    pub z_unique: DMatrix<f64>,
    pub w_mask: Vec<bool>,
    pub v_mask: Vec<bool>,
    pub zu_mask: Vec<bool>,
    pub zs_mask: Vec<bool>,
}

fn normal_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    // Fill row by row so the draw order does not depend on storage layout.
    let mut out = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            out[(i, j)] = rng.sample(StandardNormal);
        }
    }
    out
}

fn threshold(m: &mut DMatrix<f64>, cutoff: f64) {
    m.iter_mut()
        .filter(|x| x.abs() < cutoff)
        .for_each(|x| *x = 0.0);
}

fn nonzero_rows(m: &DMatrix<f64>) -> Vec<bool> {
    m.row_iter().map(|r| r.iter().any(|&x| x != 0.0)).collect()
}

/// Deterministic in `(config.seed, replicate)`: each replicate reads its own
/// ChaCha stream. Draw order: `V`, `W`, `Z_shared`, `Z_unique`, foreground
/// noise, `S`, background noise.
pub fn generate(config: &SimConfig, replicate: u64) -> Result<SimInstance> {
    config.validate()?;
    let SimConfig {
        n,
        m,
        p,
        latent_dim,
        ..
    } = *config;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(replicate);

    let mut v = normal_matrix(&mut rng, p, latent_dim);
    let mut w = normal_matrix(&mut rng, p, latent_dim);
    let mut z_shared = normal_matrix(&mut rng, n, latent_dim);
    let mut z_unique = normal_matrix(&mut rng, n, latent_dim);
    let noise_fg = normal_matrix(&mut rng, n, p);
    let s = normal_matrix(&mut rng, m, latent_dim);
    let noise_bg = normal_matrix(&mut rng, m, p);

    for mat in [&mut v, &mut w, &mut z_shared, &mut z_unique] {
        threshold(mat, config.threshold);
    }

    let x = &z_shared * v.transpose() + &z_unique * w.transpose() + noise_fg;
    let y = &s * v.transpose() + noise_bg;

    Ok(SimInstance {
        foreground: DataMatrix::new(x)?,
        background: DataMatrix::new(y)?,
        w_mask: nonzero_rows(&w),
        v_mask: nonzero_rows(&v),
        zu_mask: nonzero_rows(&z_unique),
        zs_mask: nonzero_rows(&z_shared),
        v,
        w,
        z_shared,
        z_unique,
    })
}

/// `count[j-1] = |top-j of ranking ∩ mask|` for `j = 1..=len`.
pub fn column_recovery(ranking: &[usize], mask: &[bool]) -> Result<Vec<usize>> {
    recovery_counts(ranking, mask)
}

/// Same contract as [`column_recovery`], over rows.
pub fn row_recovery(ranking: &[usize], mask: &[bool]) -> Result<Vec<usize>> {
    recovery_counts(ranking, mask)
}

fn recovery_counts(ranking: &[usize], mask: &[bool]) -> Result<Vec<usize>> {
    let len = mask.len();
    if ranking.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: ranking.len(),
        });
    }
    let mut seen = vec![false; len];
    for &i in ranking {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!(
                "ranking is not a permutation of 0..{len}"
            )));
        }
    }
    let mut hits = 0;
    Ok(ranking
        .iter()
        .map(|&i| {
            hits += usize::from(mask[i]);
            hits
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Ccur,
    CurFg,
    CurUnion,
    Cpca,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ccur, Method::CurFg, Method::CurUnion, Method::Cpca];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ccur => "ccur",
            Method::CurFg => "cur-fg",
            Method::CurUnion => "cur-union",
            Method::Cpca => "cpca",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ccur" => Ok(Method::Ccur),
            "cur-fg" | "cur" => Ok(Method::CurFg),
            "cur-union" => Ok(Method::CurUnion),
            "cpca" => Ok(Method::Cpca),
            "cfs" => Err(Error::Unsupported(
                "the CFS baseline is not available in this build".into(),
            )),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    WColumns,
    VColumns,
    ZUniqueRows,
    ZSharedRows,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::WColumns,
        Metric::VColumns,
        Metric::ZUniqueRows,
        Metric::ZSharedRows,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Metric::WColumns => "w_columns",
            Metric::VColumns => "v_columns",
            Metric::ZUniqueRows => "z_unique_rows",
            Metric::ZSharedRows => "z_shared_rows",
        }
    }

    pub fn is_row_metric(self) -> bool {
        matches!(self, Metric::ZUniqueRows | Metric::ZSharedRows)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Replicate-averaged recovery curve; entry `j - 1` describes the top `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryCurve {
    pub method: Method,
    pub metric: Metric,
    pub replicates: usize,
    pub mean: Vec<f64>,
    /// Sample standard deviation over replicates divided by `sqrt(R)`; zero
    /// for a single replicate.
    pub stderr: Vec<f64>,
}

impl RecoveryCurve {
    /// Aggregates per-replicate counts, which must all have the same length.
    pub fn aggregate(method: Method, metric: Metric, counts: &[Vec<usize>]) -> Result<Self> {
        let reps = counts.len();
        let len = counts.first().map_or(0, Vec::len);
        if reps == 0 || len == 0 {
            return Err(Error::Dimension("no recovery counts to aggregate".into()));
        }
        if let Some(bad) = counts.iter().find(|c| c.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        let mut mean = vec![0.0; len];
        let mut stderr = vec![0.0; len];
        for j in 0..len {
            let sum: f64 = counts.iter().map(|c| c[j] as f64).sum();
            let mu = sum / reps as f64;
            mean[j] = mu;
            if reps > 1 {
                let ss: f64 = counts.iter().map(|c| (c[j] as f64 - mu).powi(2)).sum();
                let sd = (ss / (reps - 1) as f64).sqrt();
                stderr[j] = sd / (reps as f64).sqrt();
            }
        }
        Ok(Self {
            method,
            metric,
            replicates: reps,
            mean,
            stderr,
        })
    }

    /// Mean at rank `j` (1-based).
    pub fn at(&self, j: usize) -> f64 {
        self.mean[j - 1]
    }

    /// `(mean - width * se, mean + width * se)` per rank; plots use width 2.
    pub fn band(&self, width: f64) -> Vec<(f64, f64)> {
        self.mean
            .iter()
            .zip(&self.stderr)
            .map(|(m, s)| (m - width * s, m + width * s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult {
    pub config: SimConfig,
    pub curves: Vec<RecoveryCurve>,
}

impl BenchmarkResult {
    pub fn curve(&self, method: Method, metric: Metric) -> Option<&RecoveryCurve> {
        self.curves
            .iter()
            .find(|c| c.method == method && c.metric == metric)
    }

    /// Tidy CSV: `method,metric,rank_j,mean,stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["method", "metric", "rank_j", "mean", "stderr"])
            .map_err(csv_err)?;
        for curve in &self.curves {
            for (j, (m, s)) in curve.mean.iter().zip(&curve.stderr).enumerate() {
                wtr.write_record([
                    curve.method.label(),
                    curve.metric.label(),
                    &(j + 1).to_string(),
                    &format_f64(*m),
                    &format_f64(*s),
                ])
                .map_err(csv_err)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Full column ranking and, where the method defines one, full foreground
/// row ranking.
pub fn method_rankings(
    method: Method,
    inst: &SimInstance,
    config: &SimConfig,
) -> Result<(Vec<usize>, Option<Vec<usize>>)> {
    let fg = &inst.foreground;
    let bg = &inst.background;
    let k = config.method_k;
    match method {
        Method::Ccur => {
            let scores = contrastive_column_scores(fg, bg, k, config.epsilon)?;
            let cols = scores.ranking();
            let selected = &cols[..config.ccur_c];
            let row_k = k.min(config.ccur_c).min(fg.nrows());
            let (rows, _) = select_rows(fg, selected, row_k, fg.nrows())?;
            Ok((cols, Some(rows)))
        }
        Method::CurFg => {
            let cols = column_leverage(fg, k)?.ranking();
            let rows = row_leverage(fg, k)?.ranking();
            Ok((cols, Some(rows)))
        }
        Method::CurUnion => {
            let union = fg.vstack(bg)?;
            let cols = column_leverage(&union, k)?.ranking();
            // Union rows ranked together, then restricted to the foreground.
            let n = fg.nrows();
            let rows = full_ranking(&row_leverage(&union, k)?.scores)
                .into_iter()
                .filter(|&i| i < n)
                .collect();
            Ok((cols, Some(rows)))
        }
        Method::Cpca => {
            let cfg = CpcaConfig {
                alpha: config.cpca_alpha,
                num_features: fg.ncols(),
            };
            let res = cpca_rank_features(fg, bg, &cfg)?;
            Ok((res.ranking, None))
        }
    }
}

type ReplicateCounts = Vec<(Method, Metric, Vec<usize>)>;

fn run_replicate(
    config: &SimConfig,
    methods: &[Method],
    replicate: u64,
) -> Result<ReplicateCounts> {
    let inst = generate(config, replicate)?;
    let mut out = Vec::new();
    for &method in methods {
        let (cols, rows) =
            method_rankings(method, &inst, config).map_err(Error::in_stage(method.label()))?;
        out.push((
            method,
            Metric::WColumns,
            column_recovery(&cols, &inst.w_mask)?,
        ));
        out.push((
            method,
            Metric::VColumns,
            column_recovery(&cols, &inst.v_mask)?,
        ));
        if let Some(rows) = rows {
            out.push((
                method,
                Metric::ZUniqueRows,
                row_recovery(&rows, &inst.zu_mask)?,
            ));
            out.push((
                method,
                Metric::ZSharedRows,
                row_recovery(&rows, &inst.zs_mask)?,
            ));
        }
    }
    Ok(out)
}

/// Runs every replicate (in parallel) and aggregates each method's four
/// recovery curves. CPCA has no row ranking and contributes column curves
/// only. Results are identical to a serial run.
pub fn run_benchmark(config: &SimConfig, methods: &[Method]) -> Result<BenchmarkResult> {
    config.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    let mut methods = methods.to_vec();
    methods.sort_unstable();
    methods.dedup();

    let per_rep: Vec<ReplicateCounts> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|rep| run_replicate(config, &methods, rep))
        .collect::<Result<_>>()?;

    let mut curves = Vec::new();
    for &method in &methods {
        for metric in Metric::ALL {
            let counts: Vec<Vec<usize>> = per_rep
                .iter()
                .filter_map(|rep| {
                    rep.iter()
                        .find(|(me, mt, _)| *me == method && *mt == metric)
                        .map(|(_, _, c)| c.clone())
                })
                .collect();
            if counts.is_empty() {
                continue;
            }
            curves.push(RecoveryCurve::aggregate(method, metric, &counts)?);
        }
    }
    Ok(BenchmarkResult {
        config: *config,
        curves,
    })
}
