use std::path::PathBuf;

use thiserror::Error;

/// Everything a command can fail with. Each variant, and each wrapped
/// modelling error, has its own process exit code (see [`CliError::exit_code`]).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    ConfigParse(String),
    #[error("config value out of range: {0}")]
    ConfigRange(String),
    #[error("cannot read data file {path}: {source}")]
    DataIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error at line {line}: {reason}")]
    Schema { line: u64, reason: String },
    #[error("series `{series}` is missing year {year}")]
    Gap { series: String, year: i32 },
    #[error("non-numeric value at line {line}")]
    NonNumeric { line: u64 },
    #[error("this command needs a [baseline] section in the config")]
    MissingBaseline,
    #[error("no year after the target's last observation has every predictor")]
    NoFutureYears,
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] fiscast_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fiscast_core::Error as E;
        match self {
            CliError::ConfigIo { .. } => 3,
            CliError::ConfigParse(_) => 4,
            CliError::ConfigRange(_) => 5,
            CliError::DataIo { .. } => 6,
            CliError::Schema { .. } => 7,
            CliError::Gap { .. } => 8,
            CliError::NonNumeric { .. } => 9,
            CliError::MissingBaseline => 10,
            CliError::NoFutureYears => 11,
            CliError::Output { .. } => 12,
            CliError::Model(e) => match e {
                E::EmptySeries { .. } => 20,
                E::NonFinite { .. } => 21,
                E::EmptyIntersection => 22,
                E::DuplicateName(_) => 23,
                E::MissingColumn(_) => 24,
                E::HoldoutTooLarge { .. } => 25,
                E::ZeroDenominator { .. } => 26,
                E::TooShort { .. } => 27,
                E::MissingAnchor => 28,
                E::NonPositiveValue { .. } => 29,
                E::NonConvergence(_) => 30,
                E::SingularRegression => 31,
                E::SingularMoment => 32,
                E::ZeroVariance(_) => 33,
                E::AllTied => 34,
                E::AllZeroDifferences => 35,
                E::SparseCells => 36,
                E::RankDeficient => 37,
                E::TooFewObservations { .. } => 38,
                E::NonInvertible => 39,
                E::MissingPredictorYears { .. } => 40,
                E::AiccUndefined { .. } => 41,
                E::LengthMismatch { .. } => 42,
                E::BothZero { .. } => 43,
                E::BothZeroSeries => 44,
                E::SampleMismatch { .. } => 45,
                E::ZeroBaseline => 46,
                E::NoViableVariant(_) => 47,
                E::MissingElasticity(_) => 48,
                E::YearMismatch(_) => 49,
                E::InvalidArgument(_) => 50,
            },
        }
    }
}
