//! Leverage scores, contrastive score ratios and deterministic ranking.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, DataMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreAxis {
    Columns,
    Rows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Leverage,
    Contrastive,
}

/// Per-column or per-row scores together with how they were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub axis: ScoreAxis,
    pub k_used: usize,
    pub kind: ScoreKind,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn rank_top(&self, count: usize) -> Result<Vec<usize>> {
        rank_top(&self.scores, count)
    }

    /// Every index, best first.
    pub fn ranking(&self) -> Vec<usize> {
        full_ranking(&self.scores)
    }
}

/// Shared hyperparameters of the contrastive score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveConfig {
    pub k: usize,
    pub epsilon: f64,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            k: 7,
            epsilon: 1e-6,
        }
    }
}

/// Squared row norms of a matrix with orthonormal columns, i.e. the diagonal
/// of the projector onto its column span.
pub fn projector_diagonal(vectors: &DMatrix<f64>) -> Vec<f64> {
    vectors
        .row_iter()
        .map(|row| row.iter().map(|v| v * v).sum())
        .collect()
}

/// `l_d = sum_{t <= k} (v^t_d)^2` over the top-k right singular vectors.
pub fn column_leverage(x: &DataMatrix, k: usize) -> Result<ScoreVector> {
    let svd = truncated_svd(x, k)?;
    Ok(ScoreVector {
        scores: projector_diagonal(&svd.right_vectors),
        axis: ScoreAxis::Columns,
        k_used: k,
        kind: ScoreKind::Leverage,
    })
}

/// Column leverage of the transpose.
pub fn row_leverage(x: &DataMatrix, k: usize) -> Result<ScoreVector> {
    let mut scores = column_leverage(&x.transpose(), k)?;
    scores.axis = ScoreAxis::Rows;
    Ok(scores)
}

/// `fg[d] / (bg[d] + epsilon)`. The stabilizer only enters the denominator.
pub fn contrastive_scores(fg: &ScoreVector, bg: &ScoreVector, epsilon: f64) -> Result<ScoreVector> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if fg.len() != bg.len() {
        return Err(Error::LengthMismatch {
            expected: fg.len(),
            found: bg.len(),
        });
    }
    if fg.axis != bg.axis {
        return Err(Error::InvalidParameter(
            "foreground and background scores are on different axes".into(),
        ));
    }
    if fg.kind != ScoreKind::Leverage || bg.kind != ScoreKind::Leverage {
        return Err(Error::InvalidParameter(
            "contrastive scores need leverage inputs".into(),
        ));
    }
    let scores = fg
        .scores
        .iter()
        .zip(&bg.scores)
        .map(|(&f, &b)| f / (b + epsilon))
        .collect();
    Ok(ScoreVector {
        scores,
        axis: fg.axis,
        k_used: fg.k_used,
        kind: ScoreKind::Contrastive,
    })
}

fn by_score_desc(scores: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    |&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    }
}

/// All indices ordered by descending score, ties by ascending index.
pub fn full_ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(by_score_desc(scores));
    order
}

/// The `count` best indices, best first; ties broken by ascending index.
pub fn rank_top(scores: &[f64], count: usize) -> Result<Vec<usize>> {
    if count == 0 || count > scores.len() {
        return Err(Error::Dimension(format!(
            "cannot take the top {count} of {} scores",
            scores.len()
        )));
    }
    let mut order = full_ranking(scores);
    order.truncate(count);
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn leverage(scores: Vec<f64>) -> ScoreVector {
        ScoreVector {
            scores,
            axis: ScoreAxis::Columns,
            k_used: 1,
            kind: ScoreKind::Leverage,
        }
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    fn diag321() -> DataMatrix {
        DataMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            3.0, 2.0, 1.0,
        ])))
        .unwrap()
    }

    #[test]
    fn column_leverage_examples() {
        let s = column_leverage(&diag321(), 2).unwrap();
        assert_close(&s.scores, &[1.0, 1.0, 0.0], 1e-12);
        assert_eq!(s.axis, ScoreAxis::Columns);

        let x = DataMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let s = column_leverage(&x, 1).unwrap();
        assert_close(&s.scores, &[0.2, 0.8], 1e-12);

        let q = DataMatrix::from_rows(&[[0.6, 0.8], [-0.8, 0.6]]).unwrap();
        assert_close(&column_leverage(&q, 2).unwrap().scores, &[1.0, 1.0], 1e-12);
    }

    #[test]
    fn row_leverage_examples() {
        let s = row_leverage(&diag321(), 1).unwrap();
        assert_close(&s.scores, &[1.0, 0.0, 0.0], 1e-12);
        assert_eq!(s.axis, ScoreAxis::Rows);

        let x = DataMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_close(&row_leverage(&x, 1).unwrap().scores, &[0.2, 0.8], 1e-12);

        let single = DataMatrix::from_rows(&[[3.0, -1.0, 2.0]]).unwrap();
        assert_close(&row_leverage(&single, 1).unwrap().scores, &[1.0], 1e-12);
    }

    #[test]
    fn contrastive_examples() {
        let s =
            contrastive_scores(&leverage(vec![0.9, 0.1]), &leverage(vec![0.1, 0.9]), 1e-6).unwrap();
        assert_eq!(s.kind, ScoreKind::Contrastive);
        assert_close(&s.scores, &[0.9 / (0.1 + 1e-6), 0.1 / (0.9 + 1e-6)], 0.0);
        assert!((s.scores[0] - 8.99991).abs() < 1e-5);
        assert!((s.scores[1] - 0.111111).abs() < 1e-6);

        let s =
            contrastive_scores(&leverage(vec![0.5, 0.5]), &leverage(vec![0.5, 0.5]), 0.5).unwrap();
        assert_close(&s.scores, &[0.5, 0.5], 1e-15);

        let s =
            contrastive_scores(&leverage(vec![0.0, 0.3]), &leverage(vec![0.0, 0.0]), 1e-6).unwrap();
        assert_eq!(s.scores[0], 0.0);
        assert!((s.scores[1] - 300_000.0).abs() < 1e-6);
    }

    #[test]
    fn contrastive_errors() {
        let a = leverage(vec![0.5, 0.5]);
        let b = leverage(vec![0.5]);
        assert!(matches!(
            contrastive_scores(&a, &b, 1e-6),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(contrastive_scores(&a, &a, 0.0).is_err());
        assert!(contrastive_scores(&a, &a, -1.0).is_err());
        let mut rows = a.clone();
        rows.axis = ScoreAxis::Rows;
        assert!(contrastive_scores(&a, &rows, 1e-6).is_err());
        let ratio = contrastive_scores(&a, &a, 1.0).unwrap();
        assert!(contrastive_scores(&ratio, &a, 1.0).is_err());
    }

    #[test]
    fn rank_top_examples() {
        assert_eq!(rank_top(&[0.2, 0.8, 0.5], 2).unwrap(), vec![1, 2]);
        assert_eq!(rank_top(&[0.5, 0.5, 0.1], 1).unwrap(), vec![0]);
        assert_eq!(rank_top(&[8.99991, 0.111111], 1).unwrap(), vec![0]);
        assert!(rank_top(&[1.0], 0).is_err());
        assert!(rank_top(&[1.0], 2).is_err());
        assert_eq!(full_ranking(&[0.0, 1.0, 0.0, 1.0]), vec![1, 3, 0, 2]);
    }

    #[test]
    fn default_config() {
        let c = ContrastiveConfig::default();
        assert_eq!(c.k, 7);
        assert_eq!(c.epsilon, 1e-6);
    }
}
