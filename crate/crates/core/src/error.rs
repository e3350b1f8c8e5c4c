use thiserror::Error;

/// Errors raised by the numerical and modelling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series `{name}` is empty")]
    EmptySeries { name: String },
    #[error("series `{name}` has a non-finite value in {year}")]
    NonFinite { name: String, year: i32 },
    #[error("no common years across the supplied series")]
    EmptyIntersection,
    #[error("duplicate series name `{0}`")]
    DuplicateName(String),
    #[error("column `{0}` not found")]
    MissingColumn(String),
    #[error("holdout of {holdout} years leaves no training data in a frame of {len} years")]
    HoldoutTooLarge { holdout: usize, len: usize },
    #[error("zero denominator at year {year}")]
    ZeroDenominator { year: i32 },
    #[error("series too short: need {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("undifferencing needs at least one anchor level")]
    MissingAnchor,
    #[error("non-positive value at year {year}")]
    NonPositiveValue { year: i32 },
    #[error("estimation did not converge: {0}")]
    NonConvergence(String),
    #[error("regression is singular (perfectly collinear regressors)")]
    SingularRegression,
    #[error("product-moment matrix is rank deficient")]
    SingularMoment,
    #[error("zero variance in `{0}`")]
    ZeroVariance(String),
    #[error("every pair is tied")]
    AllTied,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("contingency table has an expected count below one")]
    SparseCells,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("need more than {params} observations, got {got}")]
    TooFewObservations { params: usize, got: usize },
    #[error("ARMA polynomial could not be mapped into the invertible region")]
    NonInvertible,
    #[error("predictor `{name}` does not cover year {year}")]
    MissingPredictorYears { name: String, year: i32 },
    #[error("AICc undefined for n = {n}, k = {k}")]
    AiccUndefined { n: usize, k: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("actual and forecast are both zero at year {year}")]
    BothZero { year: i32 },
    #[error("actual and forecast series are both identically zero")]
    BothZeroSeries,
    #[error("error tables cover different sample sizes ({left} vs {right})")]
    SampleMismatch { left: usize, right: usize },
    #[error("baseline Theil U1 is zero")]
    ZeroBaseline,
    #[error("no model variant could be fitted: {0}")]
    NoViableVariant(String),
    #[error("no elasticity supplied for predictor `{0}`")]
    MissingElasticity(String),
    #[error("year ranges do not match: {0}")]
    YearMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
