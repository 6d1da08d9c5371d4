use std::path::PathBuf;

use proxyval::classify::ClassifyError;
use proxyval::ingest::IngestError;
use proxyval::numstat::StatError;
use proxyval::plot::PlotError;
use proxyval::risk::RiskError;
use proxyval::seasonality::SeasonalityError;
use proxyval::synth::SynthError;
use thiserror::Error;

/// Anything that stops a run after the arguments were accepted.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Seasonality(#[from] SeasonalityError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is empty")]
    EmptyInput(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Short machine-readable tag for the error line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Ingest(e) => e.kind(),
            CliError::Classify(e) => match e {
                ClassifyError::EmptyKeywordSet(_) => "EmptyKeywordSet",
                ClassifyError::BadConfig { .. } => "BadKeywordConfig",
                ClassifyError::Io(_) => "Io",
                ClassifyError::UnknownProductId(_) => "UnknownProductId",
            },
            CliError::Risk(e) => e.kind(),
            CliError::Seasonality(e) => e.kind(),
            CliError::Synth(e) => e.kind(),
            CliError::Stat(e) => e.kind(),
            CliError::Plot(_) => "PlotError",
            CliError::Io { .. } => "Io",
            CliError::EmptyInput(_) => "EmptyInput",
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Ingest(IngestError::Csv(e))
    }
}
