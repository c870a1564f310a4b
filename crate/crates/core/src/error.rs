use thiserror::Error;

/// Errors produced by the solver and estimate toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FnlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("embedding hypothesis violated: need J > N/2, got J = {j}, N = {dim}")]
    EmbeddingHypothesis { j: u32, dim: usize },

    #[error("non-vanishing condition violated: certified infimum {certified_inf:e} (required > 0)")]
    NonVanishing { certified_inf: f64 },

    #[error("domain error: nonlinearity `{label}` is singular at x = {x}")]
    Domain { label: String, x: f64 },

    #[error("empty interval [{lower}, {upper}]")]
    EmptyInterval { lower: f64, upper: f64 },

    #[error("unknown nonlinearity `{0}`")]
    UnknownNonlinearity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series diverges: increments grew for {run} consecutive terms")]
    SeriesDivergence { run: usize },

    #[error("estimate requires a C^J nonlinearity, got a series")]
    NotCjClass,

    #[error("zero norm: {0}")]
    ZeroNorm(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty sample set")]
    EmptySamples,

    #[error("identical initial data (zero denominator)")]
    IdenticalData,

    #[error("Picard iteration did not converge after {iterations} iterations (last difference {last_diff:e})")]
    PicardNonConvergence { iterations: usize, last_diff: f64 },

    #[error("solution left the fixed-point ball: {0}")]
    Membership(MembershipFailure),

    #[error("RK4 step too large: dt * max|k|^s = {stiffness} > 0.5")]
    StepSize { stiffness: f64 },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("config: {0}")]
    Config(String),

    #[error("I/O: {0}")]
    Io(String),
}

impl From<std::io::Error> for FnlsError {
    fn from(e: std::io::Error) -> Self {
        FnlsError::Io(e.to_string())
    }
}

/// Which of the two fixed-point ball conditions failed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum MembershipFailure {
    /// `sup ||u(t)||_{H^J} <= R` failed.
    NormBall { t: f64, norm: f64, radius: f64 },
    /// `eta * inf |u(t)| >= 1/2` failed.
    InfimumFloor { t: f64, eta_times_inf: f64 },
}

impl std::fmt::Display for MembershipFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MembershipFailure::NormBall { t, norm, radius } => {
                write!(f, "norm {norm:.6e} exceeds radius {radius:.6e} at t = {t}")
            }
            MembershipFailure::InfimumFloor { t, eta_times_inf } => {
                write!(f, "eta * inf |u| = {eta_times_inf:.6e} < 1/2 at t = {t}")
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, FnlsError>;
