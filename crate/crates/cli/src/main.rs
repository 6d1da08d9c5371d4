//! `proxyval`: runs the proxy-validation pipeline over CSV inputs.
//!
//! Every flag can also be set through an environment variable named
//! `PROXYVAL_` followed by the flag name in upper case with dashes as
//! underscores, e.g. `PROXYVAL_MIN_EXPOSURE=100`.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use proxyval::risk::ScreenSide;

#[derive(Debug, Parser)]
#[command(name = "proxyval", version, about = "Validate purchase-derived disease proxies against claim data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset bundle with ground truth.
    Synth(SynthArgs),
    /// Label catalog products as target, general or unclassified.
    Classify(ClassifyArgs),
    /// Assign users to case, control or excluded.
    Cohort(CohortCmdArgs),
    /// Per-ingredient switch and claim rates, screening and dose-response.
    Risk(RiskCmdArgs),
    /// STL decomposition of claims and switch onsets and their agreement.
    Seasonality(SeasonalityCmdArgs),
    /// Full pipeline with a single summary; synthesizes inputs from a seed
    /// when no purchase file is given.
    Validate(ValidateArgs),
    /// Run a statistical kernel directly.
    #[command(hide = true)]
    Stat(StatArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, env = "PROXYVAL_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Abort on the first malformed input row instead of skipping it.
    #[arg(long, env = "PROXYVAL_STRICT")]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct KeywordArgs {
    /// Keyword config file; the built-in example keywords when absent.
    #[arg(long, env = "PROXYVAL_KEYWORDS")]
    pub keywords: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// Sized and calibrated to the published magnitudes.
    Paper,
    /// As `paper` but the insured population has independent ingredient effects.
    Decoupled,
    /// Generator defaults, no planted effects.
    Default,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, env = "PROXYVAL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of purchasing users (overrides the scenario).
    #[arg(long, env = "PROXYVAL_USERS")]
    pub users: Option<usize>,
    #[arg(long, env = "PROXYVAL_SCENARIO", value_enum, default_value_t = Scenario::Paper)]
    pub scenario: Scenario,
    /// Generator config file (key = value); replaces the scenario.
    #[arg(long, env = "PROXYVAL_CONFIG", conflicts_with = "scenario")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, env = "PROXYVAL_CATALOG")]
    pub catalog: PathBuf,
    #[command(flatten)]
    pub keywords: KeywordArgs,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    /// Length of the analysis window in days.
    #[arg(long, env = "PROXYVAL_WINDOW_DAYS", default_value_t = 365, value_parser = parse_window_days)]
    pub window_days: u32,
    /// Minimum regular-food purchases a member needs inside the window.
    #[arg(long, env = "PROXYVAL_MIN_WINDOW_PURCHASES", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub min_window_purchases: u32,
}

#[derive(Debug, Args)]
pub struct CohortCmdArgs {
    #[arg(long, env = "PROXYVAL_PURCHASES")]
    pub purchases: PathBuf,
    #[arg(long, env = "PROXYVAL_CATALOG")]
    pub catalog: PathBuf,
    #[command(flatten)]
    pub keywords: KeywordArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    /// Significance level for the ingredient screen.
    #[arg(long, env = "PROXYVAL_ALPHA", default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Drop ingredients with fewer exposed members than this on either side.
    #[arg(long, env = "PROXYVAL_MIN_EXPOSURE", default_value_t = 50)]
    pub min_exposure: u64,
    /// Which side's chi-squared test flags an ingredient: claim, ec, both or either.
    #[arg(long, env = "PROXYVAL_SCREEN", default_value = "claim")]
    pub screen: ScreenSide,
    /// Apply Yates' continuity correction to the 2x2 tests.
    #[arg(long, env = "PROXYVAL_YATES")]
    pub yates: bool,
    /// `ingredient,category` CSV; analyse categories instead of ingredients.
    #[arg(long, env = "PROXYVAL_CATEGORIES")]
    pub categories: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskCmdArgs {
    #[arg(long, env = "PROXYVAL_PURCHASES")]
    pub purchases: PathBuf,
    #[arg(long, env = "PROXYVAL_CATALOG")]
    pub catalog: PathBuf,
    #[arg(long, env = "PROXYVAL_QUESTIONNAIRE")]
    pub questionnaire: PathBuf,
    #[command(flatten)]
    pub keywords: KeywordArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub risk: RiskArgs,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StlArgs {
    #[arg(long, env = "PROXYVAL_PERIOD", default_value_t = 12, value_parser = clap::value_parser!(u32).range(2..))]
    pub period: u32,
    /// Seasonal smoothing span (odd, at least 7 recommended).
    #[arg(long, env = "PROXYVAL_SEASONAL_SPAN", default_value_t = 7)]
    pub seasonal_span: usize,
    /// Trend span; derived from the period and seasonal span when absent.
    #[arg(long, env = "PROXYVAL_TREND_SPAN")]
    pub trend_span: Option<usize>,
    /// Low-pass span; the smallest odd number not below the period when absent.
    #[arg(long, env = "PROXYVAL_LOWPASS_SPAN")]
    pub lowpass_span: Option<usize>,
    #[arg(long, env = "PROXYVAL_INNER", default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub inner: u32,
    #[arg(long, env = "PROXYVAL_OUTER", default_value_t = 1)]
    pub outer: u32,
}

#[derive(Debug, Args)]
pub struct SeasonalityCmdArgs {
    #[arg(long, env = "PROXYVAL_PURCHASES")]
    pub purchases: PathBuf,
    #[arg(long, env = "PROXYVAL_CATALOG")]
    pub catalog: PathBuf,
    #[arg(long, env = "PROXYVAL_CLAIMS")]
    pub claims: PathBuf,
    #[command(flatten)]
    pub keywords: KeywordArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub stl: StlArgs,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, env = "PROXYVAL_PURCHASES", requires_all = ["catalog", "claims", "questionnaire"])]
    pub purchases: Option<PathBuf>,
    #[arg(long, env = "PROXYVAL_CATALOG", requires = "purchases")]
    pub catalog: Option<PathBuf>,
    #[arg(long, env = "PROXYVAL_CLAIMS", requires = "purchases")]
    pub claims: Option<PathBuf>,
    #[arg(long, env = "PROXYVAL_QUESTIONNAIRE", requires = "purchases")]
    pub questionnaire: Option<PathBuf>,
    /// Seed for synthesized inputs, written under `<out>/data`.
    #[arg(long, env = "PROXYVAL_SEED", default_value_t = 0, conflicts_with = "purchases")]
    pub seed: u64,
    #[arg(long, env = "PROXYVAL_USERS", conflicts_with = "purchases")]
    pub users: Option<usize>,
    #[arg(long, env = "PROXYVAL_SCENARIO", value_enum, default_value_t = Scenario::Paper, conflicts_with = "purchases")]
    pub scenario: Scenario,
    #[command(flatten)]
    pub keywords: KeywordArgs,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub risk: RiskArgs,
    #[command(flatten)]
    pub stl: StlArgs,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StatArgs {
    #[command(subcommand)]
    pub kernel: StatKernel,
}

#[derive(Debug, Subcommand)]
pub enum StatKernel {
    /// Chi-squared test of a 2x2 table given as a b c d (row major).
    Chi2 {
        #[arg(num_args = 4, required = true)]
        cells: Vec<u64>,
        #[arg(long)]
        yates: bool,
    },
    /// Cochran-Armitage trend test over comma-separated cases and totals.
    Trend {
        #[arg(long, value_delimiter = ',', required = true)]
        cases: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        totals: Vec<u64>,
        /// Group scores; 0, 1, 2, ... when absent.
        #[arg(long, value_delimiter = ',')]
        scores: Option<Vec<f64>>,
    },
    /// Regularized upper incomplete gamma Q(a, x).
    Q { a: f64, x: f64 },
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("alpha must lie strictly between 0 and 1, got {v}"))
    }
}

fn parse_window_days(s: &str) -> Result<u32, String> {
    let v: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 28 {
        Ok(v)
    } else {
        Err(format!("window must be at least 28 days, got {v}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(1)
        }
    }
}
