use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Every variant has a stable machine-readable code (see [`Error::code`]) that the
/// CLI prints in its error object and the C ABI returns as an integer status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "stability violation: arrival rate {lambda} must be below service rate {mu} (and mu < 1)"
    )]
    StabilityViolation { lambda: f64, mu: f64 },

    #[error(
        "no sign change of x - f(x) found in (0,1); the arrival law violates the model assumptions"
    )]
    NoBracket,

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("balance recursion unstable at q = {q} (iterate {value:e}); raise j_max or use the level-crossing method")]
    RecursionUnstable { q: usize, value: f64 },

    #[error("rate convention error: zero-batch probability {m0} is outside (0,1); {hint}")]
    ConventionError { m0: f64, hint: String },

    #[error("deterministic law needs an integer mean, got 1/lambda = {0}")]
    IntegralityError(f64),

    #[error("distribution means differ: {0} vs {1}")]
    MeanMismatch(f64, f64),

    #[error("inconsistent timestamps at job {index}: {reason}")]
    InconsistentTimestamps { index: usize, reason: String },

    #[error(
        "degenerate noise: job {index} observed zero-probability noise {z} at queue length {q}"
    )]
    DegenerateNoise { index: usize, q: usize, z: u32 },

    #[error("runaway queue: length exceeded {limit} at slot {slot} (likely lambda >= mu)")]
    RunawayQueue { limit: usize, slot: u64 },

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable identifier used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::StabilityViolation { .. } => "StabilityViolation",
            Error::NoBracket => "NoBracket",
            Error::AssumptionViolation(_) => "AssumptionViolation",
            Error::RecursionUnstable { .. } => "RecursionUnstable",
            Error::ConventionError { .. } => "ConventionError",
            Error::IntegralityError(_) => "IntegralityError",
            Error::MeanMismatch(..) => "MeanMismatch",
            Error::InconsistentTimestamps { .. } => "InconsistentTimestamps",
            Error::DegenerateNoise { .. } => "DegenerateNoise",
            Error::RunawayQueue { .. } => "RunawayQueue",
            Error::Infeasible(_) => "Infeasible",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }

    /// Integer status code; 0 is reserved for success.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidDistribution(_) => 1,
            Error::InvalidParameter(_) => 2,
            Error::StabilityViolation { .. } => 3,
            Error::NoBracket => 4,
            Error::AssumptionViolation(_) => 5,
            Error::RecursionUnstable { .. } => 6,
            Error::ConventionError { .. } => 7,
            Error::IntegralityError(_) => 8,
            Error::MeanMismatch(..) => 9,
            Error::InconsistentTimestamps { .. } => 10,
            Error::DegenerateNoise { .. } => 11,
            Error::RunawayQueue { .. } => 12,
            Error::Infeasible(_) => 13,
            Error::Config(_) => 14,
            Error::Io(_) => 15,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
