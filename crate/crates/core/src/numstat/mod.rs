//! Numerical and statistical kernel.
//!
//! Everything here is pure, deterministic and summed in a fixed order, so
//! outputs are bit-stable across runs and thread counts.

mod hypothesis;
mod loess;
pub mod special;

pub use hypothesis::{
    average_ranks, chi_squared_2x2, chi_squared_2x2_with, cochran_armitage, pearson, spearman, ChiSquaredOptions,
    TestResult, TrendGroup, TrendTable, TwoByTwoTable,
};
pub use loess::{loess, Degree, Loess};
pub use special::{reg_incomplete_beta, reg_incomplete_gamma_upper};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate margin: row or column total is zero")]
    DegenerateMargin,
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate variance in trend test")]
    DegenerateVariance,
    #[error("invalid trend table: {0}")]
    InvalidTable(String),
    #[error("span {span} too small for degree {degree}")]
    SpanTooSmall { span: usize, degree: usize },
    #[error("x values must be strictly increasing (index {index})")]
    NonMonotoneX { index: usize },
    #[error("robustness weights: {0}")]
    BadWeights(String),
}

impl StatError {
    pub fn kind(&self) -> &'static str {
        match self {
            StatError::Domain(_) => "DomainError",
            StatError::DegenerateMargin => "DegenerateMargin",
            StatError::ZeroVariance(_) => "ZeroVariance",
            StatError::LengthMismatch { .. } => "LengthMismatch",
            StatError::TooFewPoints { .. } => "TooFewPoints",
            StatError::DegenerateVariance => "DegenerateVariance",
            StatError::InvalidTable(_) => "InvalidTable",
            StatError::SpanTooSmall { .. } => "SpanTooSmall",
            StatError::NonMonotoneX { .. } => "NonMonotoneX",
            StatError::BadWeights(_) => "BadWeights",
        }
    }
}
