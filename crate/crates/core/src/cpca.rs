//! Contrastive PCA feature ranking: leading eigenvector of
//! `Cov_fg - alpha * Cov_bg`, features ordered by absolute loading.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sign_pivot, DataMatrix};
use crate::scoring::full_ranking;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpcaConfig {
    /// Contrast strength, `>= 0`.
    pub alpha: f64,
    pub num_features: usize,
}

impl Default for CpcaConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            num_features: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpcaResult {
    /// Top `num_features` feature indices by descending `|loading|`.
    pub ranking: Vec<usize>,
    /// Leading eigenvector, largest-magnitude entry positive.
    pub loadings: Vec<f64>,
    pub eigenvalue: f64,
    /// Set when the leading eigenvalue is `<= 0`, i.e. the background
    /// dominates in every direction.
    pub nonpositive_eigenvalue: bool,
}

/// Sample covariance of the columns, divisor `rows - 1`.
pub fn covariance(x: &DataMatrix) -> DMatrix<f64> {
    let centered = x.center_columns().into_values();
    let scale = 1.0 / (x.nrows() as f64 - 1.0);
    (centered.transpose() * &centered) * scale
}

pub fn cpca_rank_features(
    fg: &DataMatrix,
    bg: &DataMatrix,
    config: &CpcaConfig,
) -> Result<CpcaResult> {
    let CpcaConfig {
        alpha,
        num_features,
    } = *config;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and nonnegative, got {alpha}"
        )));
    }
    let p = fg.ncols();
    if bg.ncols() != p {
        return Err(Error::Dimension(format!(
            "foreground has {p} columns but background has {}",
            bg.ncols()
        )));
    }
    if num_features == 0 || num_features > p {
        return Err(Error::Dimension(format!(
            "num_features = {num_features} must lie in 1..={p}"
        )));
    }
    for (name, m) in [("foreground", fg), ("background", bg)] {
        if m.nrows() < 2 {
            return Err(Error::Degenerate(format!(
                "{name} needs at least 2 rows for a covariance, got {}",
                m.nrows()
            )));
        }
    }

    let cov_fg = covariance(fg);
    let cov_bg = covariance(bg);
    let mut contrast = &cov_fg - &cov_bg * alpha;
    // Symmetrize exactly so the solver sees a symmetric input.
    contrast = (&contrast + contrast.transpose()) * 0.5;

    let scale = cov_fg.amax().max(alpha * cov_bg.amax());
    if contrast.amax() <= scale * 64.0 * f64::EPSILON {
        return Err(Error::Degenerate(
            "contrast matrix vanishes; no leading direction".into(),
        ));
    }

    let eig = SymmetricEigen::new(contrast);
    let mut lead = 0;
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v > eig.eigenvalues[lead] {
            lead = i;
        }
    }
    let eigenvalue = eig.eigenvalues[lead];
    let mut loadings: Vec<f64> = eig.eigenvectors.column(lead).iter().copied().collect();
    if loadings[sign_pivot(&loadings)] < 0.0 {
        loadings.iter_mut().for_each(|v| *v = -*v);
    }

    let magnitudes: Vec<f64> = loadings.iter().map(|v| v.abs()).collect();
    let mut ranking = full_ranking(&magnitudes);
    ranking.truncate(num_features);

    Ok(CpcaResult {
        ranking,
        loadings,
        eigenvalue,
        nonpositive_eigenvalue: eigenvalue <= 0.0,
    })
}
