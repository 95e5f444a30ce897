use thiserror::Error;

pub type Result<T, E = ElassoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ElassoError {
    #[error("data matrix is invalid: {0}")]
    InvalidData(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("covariance matrix is singular (smallest eigenvalue {smallest:.3e}, largest {largest:.3e})")]
    SingularCovariance { smallest: f64, largest: f64 },

    #[error("tuning value must be nonnegative, got {0}")]
    NegativeTuning(f64),

    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("dimension q = {q} must be smaller than sample size n = {n}")]
    DimensionExceedsSample { q: usize, n: usize },

    #[error("dimension q = {q} is too small (need at least {min})")]
    DimensionTooSmall { q: usize, min: usize },

    #[error("dimension q = {q} is too large (at most {max})")]
    DimensionTooLarge { q: usize, max: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("eigenvalue {0} is not strictly positive")]
    NonpositiveEigenvalue(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid grouping: {0}")]
    BadGrouping(String),

    #[error("1 + eta * a~ is not positive for group {group} (eta = {eta})")]
    NonpositiveDenominator { group: usize, eta: f64 },

    #[error("no convergence after {iterations} iterations (gradient-map norm {gap:.3e})")]
    NoConvergence {
        iterations: usize,
        gap: f64,
        best: Vec<f64>,
    },

    #[error("constraint level must be positive, got {0}")]
    InfeasibleConstraint(f64),

    #[error("training fold too small: n_train = {n_train} must exceed q = {q}")]
    FoldTooSmall { n_train: usize, q: usize },

    #[error("leading {0}x{0} block of the covariance estimate is singular")]
    SingularBlock(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("eigenvalue {lambda} is at or below the phase transition {threshold}")]
    BelowPhaseTransition { lambda: f64, threshold: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl ElassoError {
    /// Numeric failures (as opposed to bad input or configuration).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            ElassoError::SingularCovariance { .. }
                | ElassoError::NonpositiveDenominator { .. }
                | ElassoError::NoConvergence { .. }
                | ElassoError::SingularBlock(_)
                | ElassoError::FoldTooSmall { .. }
        )
    }

    /// Short variant name, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            ElassoError::InvalidData(_) => "InvalidData",
            ElassoError::NotSymmetric(_) => "NotSymmetric",
            ElassoError::SingularCovariance { .. } => "SingularCovariance",
            ElassoError::NegativeTuning(_) => "NegativeTuning",
            ElassoError::InvalidProbability(_) => "InvalidProbability",
            ElassoError::DimensionExceedsSample { .. } => "DimensionExceedsSample",
            ElassoError::DimensionTooSmall { .. } => "DimensionTooSmall",
            ElassoError::DimensionTooLarge { .. } => "DimensionTooLarge",
            ElassoError::LengthMismatch { .. } => "LengthMismatch",
            ElassoError::NonpositiveEigenvalue(_) => "NonpositiveEigenvalue",
            ElassoError::InvalidWeights(_) => "InvalidWeights",
            ElassoError::BadGrouping(_) => "BadGrouping",
            ElassoError::NonpositiveDenominator { .. } => "NonpositiveDenominator",
            ElassoError::NoConvergence { .. } => "NoConvergence",
            ElassoError::InfeasibleConstraint(_) => "InfeasibleConstraint",
            ElassoError::FoldTooSmall { .. } => "FoldTooSmall",
            ElassoError::SingularBlock(_) => "SingularBlock",
            ElassoError::ShapeMismatch(_) => "ShapeMismatch",
            ElassoError::BelowPhaseTransition { .. } => "BelowPhaseTransition",
            ElassoError::Config(_) => "Config",
            ElassoError::Io { .. } => "Io",
            ElassoError::Parse(_) => "Parse",
        }
    }
}
