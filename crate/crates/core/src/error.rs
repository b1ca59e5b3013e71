use thiserror::Error;

/// Every failure mode surfaced by the solvers and verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension n = {0} is below 3")]
    DimensionTooSmall(usize),
    #[error("alpha + beta = {sum} differs from the critical exponent {critical} by more than 1e-12")]
    CriticalityViolated { sum: f64, critical: f64 },
    #[error("exponents must satisfy alpha >= 1 and beta >= 1 (got alpha = {alpha}, beta = {beta})")]
    ExponentOutOfRange { alpha: f64, beta: f64 },
    #[error("alpha < beta cannot hold under criticality in dimension {0}")]
    InfeasibleHypothesis(usize),
    #[error("uniqueness experiments need alpha < beta (got alpha = {alpha}, beta = {beta})")]
    HypothesisNotApplicable { alpha: f64, beta: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bubble scale t must be positive (got {0})")]
    NonpositiveScale(f64),
    #[error("ordering term needs u > 0 and v > 0 (got u = {u}, v = {v})")]
    NonpositiveInput { u: f64, v: f64 },

    #[error("step size underflow at r = {r}")]
    StepSizeUnderflow { r: f64 },
    #[error("integration tolerance not met within {steps} steps (stopped at r = {r})")]
    ToleranceNotMet { r: f64, steps: usize },

    #[error("source is not integrable: {0}")]
    NonintegrableInput(String),
    #[error("Picard iterate blew up at step {step} (sup norm {sup})")]
    IterateBlowup { step: usize, sup: f64 },
    #[error("HLS exponent relation violated: 1/r + 1/s + lambda/n = {got}, expected 2")]
    ExponentRelationViolated { got: f64 },
    #[error("angular quadrature diverges: {0}")]
    QuadratureDivergence(String),

    #[error("sampler budget exceeded: {nodes} nodes requested, budget {budget}")]
    BudgetExceeded { nodes: usize, budget: usize },
    #[error("quadrature budget exceeded: {nodes} nodes requested, budget {budget}")]
    QuadratureBudgetExceeded { nodes: usize, budget: usize },
    #[error("plane scan inconclusive: {0}")]
    ScanInconclusive(String),

    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Failures caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GridTooCoarse(_)
                | Error::StepSizeUnderflow { .. }
                | Error::ToleranceNotMet { .. }
                | Error::NonintegrableInput(_)
                | Error::IterateBlowup { .. }
                | Error::QuadratureDivergence(_)
                | Error::BudgetExceeded { .. }
                | Error::QuadratureBudgetExceeded { .. }
                | Error::ScanInconclusive(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
