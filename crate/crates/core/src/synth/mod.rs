//! Seeded generator of coupled purchase and claim datasets from a planted
//! monthly hazard model, with ground truth for checking each pipeline stage.

mod config;
mod generate;
mod names;
pub mod rng;
mod scenario;

pub use config::{Coupling, GeneratorConfig};
pub use generate::{
    build_catalog, generate, seasonal_terms, Bundle, DietKind, GroundTruth, InsuredTruth, IntendedGroup, SynthCatalog,
    UserTruth, BUNDLE_FILES,
};
pub use names::ingredient_names;
pub use scenario::{
    decoupled_scenario, expected_onset_rate, paper_scenario, Expectations, PAPER_BIN_RATIO, PAPER_CASE_FRACTION,
    PAPER_CLAIM_FRACTION,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    ConfigInvalid { line: Option<usize>, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("internal: {0}")]
    Internal(String),
}

impl SynthError {
    pub fn kind(&self) -> &'static str {
        match self {
            SynthError::ConfigInvalid { .. } => "ConfigInvalid",
            SynthError::Io(_) => "IoError",
            SynthError::Csv(_) => "CsvError",
            SynthError::Internal(_) => "InternalError",
        }
    }
}
