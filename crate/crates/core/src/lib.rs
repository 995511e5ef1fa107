//! Contrastive CUR (CCUR) and friends.
//!
//! Leverage-score based column and row selection for a foreground dataset
//! measured against a background, together with classical CUR, a contrastive
//! PCA baseline and a synthetic recovery benchmark.

pub mod contrastive;
pub mod cpca;
pub mod cur;
pub mod error;
pub mod io;
pub mod linalg;
pub mod scoring;
pub mod sim;

pub use contrastive::{ccur, select_columns, select_rows, CcurConfig, CcurSelection};
pub use cpca::{cpca_rank_features, CpcaConfig, CpcaResult};
pub use cur::{cur_decompose, cur_sample, CurFactors};
pub use error::{Error, ErrorClass, Result};
pub use linalg::{pseudoinverse, truncated_svd, DataMatrix, TruncatedSvd};
pub use scoring::{
    column_leverage, contrastive_scores, rank_top, row_leverage, ContrastiveConfig, ScoreAxis,
    ScoreKind, ScoreVector,
};
