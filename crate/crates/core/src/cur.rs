//! Classical CUR: pick actual columns and rows of `X` by leverage, then link
//! them with the middle factor `U_mid = C^+ X R^+`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{pinv, DataMatrix};
use crate::scoring::{column_leverage, rank_top, row_leverage};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurFactors {
    pub col_indices: Vec<usize>,
    pub row_indices: Vec<usize>,
    /// `n x c`, the selected columns of `X`.
    #[serde(skip)]
    pub c: DMatrix<f64>,
    /// `c x r`.
    #[serde(skip)]
    pub u_mid: DMatrix<f64>,
    /// `r x p`, the selected rows of `X`.
    #[serde(skip)]
    pub r: DMatrix<f64>,
    /// `||X - C U_mid R||_F / ||X||_F`, zero when `X` is zero.
    pub recon_error: f64,
}

impl CurFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.c * &self.u_mid * &self.r
    }
}

fn check_sizes(x: &DataMatrix, k: usize, c: usize, r: usize) -> Result<()> {
    let (n, p) = (x.nrows(), x.ncols());
    if k == 0 || k > n.min(p) {
        return Err(Error::Dimension(format!(
            "k = {k} must lie in 1..={} for a {n}x{p} matrix",
            n.min(p)
        )));
    }
    if c == 0 || c > p {
        return Err(Error::Dimension(format!("c = {c} must lie in 1..={p}")));
    }
    if r == 0 || r > n {
        return Err(Error::Dimension(format!("r = {r} must lie in 1..={n}")));
    }
    Ok(())
}

/// Deterministic CUR from the `c` highest column and `r` highest row leverage
/// scores (rank `k`).
pub fn cur_decompose(x: &DataMatrix, k: usize, c: usize, r: usize) -> Result<CurFactors> {
    check_sizes(x, k, c, r)?;
    let cols = rank_top(&column_leverage(x, k)?.scores, c)?;
    let rows = rank_top(&row_leverage(x, k)?.scores, r)?;
    assemble(x, cols, rows)
}

/// Randomized CUR: columns and rows are drawn without replacement with
/// probability proportional to leverage / k.
pub fn cur_sample(x: &DataMatrix, k: usize, c: usize, r: usize, seed: u64) -> Result<CurFactors> {
    check_sizes(x, k, c, r)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let col_w = column_leverage(x, k)?.scores;
    let row_w = row_leverage(x, k)?.scores;
    let cols = sample_without_replacement(&col_w, c, &mut rng);
    let rows = sample_without_replacement(&row_w, r, &mut rng);
    assemble(x, cols, rows)
}

/// Sequential weighted draws, renormalizing over the items not yet taken.
///
/// Once every remaining weight is zero the rest are drawn uniformly. The
/// result is in draw order.
pub fn sample_without_replacement<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(
        count <= weights.len(),
        "cannot draw {count} of {}",
        weights.len()
    );
    let mut remaining: Vec<usize> = (0..weights.len()).collect();
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let total: f64 = remaining.iter().map(|&i| weights[i].max(0.0)).sum();
        let slot = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            let mut last_positive = 0;
            for (slot, &i) in remaining.iter().enumerate() {
                let w = weights[i].max(0.0);
                if w > 0.0 {
                    last_positive = slot;
                    acc += w;
                    if target < acc {
                        chosen = Some(slot);
                        break;
                    }
                }
            }
            // Rounding can leave `target` just past the accumulated total.
            chosen.unwrap_or(last_positive)
        } else {
            rng.random_range(0..remaining.len())
        };
        picked.push(remaining.remove(slot));
    }
    picked
}

fn assemble(
    x: &DataMatrix,
    col_indices: Vec<usize>,
    row_indices: Vec<usize>,
) -> Result<CurFactors> {
    let values = x.values();
    let c = values.select_columns(&col_indices);
    let r = values.select_rows(&row_indices);
    let u_mid = pinv(&c, None)? * values * pinv(&r, None)?;
    let approx = &c * &u_mid * &r;
    let norm = values.norm();
    let recon_error = if norm > 0.0 {
        (values - approx).norm() / norm
    } else {
        0.0
    };
    Ok(CurFactors {
        col_indices,
        row_indices,
        c,
        u_mid,
        r,
        recon_error,
    })
}
