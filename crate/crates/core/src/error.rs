use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WarpError {
    #[error("non-finite value: {0}")]
    NumericalDomain(String),

    #[error("metric is singular (|det| = {det:e})")]
    SingularMetric { det: f64 },

    #[error("outside model domain: {0}")]
    Domain(String),

    #[error("v_s profile is singular at t = {t}")]
    SingularProfile { t: f64 },

    #[error("outside canonical-map branch domain: {0}")]
    BranchDomain(String),

    #[error("recursion-operator blocks undefined: {0}")]
    BlockDomain(String),

    #[error("inverse power of zero coordinate Q^{} requested", slot + 1)]
    ZeroCoordinate { slot: usize },

    #[error("point is in the {found} chart, expected {expected}")]
    ChartMismatch { expected: &'static str, found: &'static str },

    #[error("implicit midpoint failed to converge at step {step} (residual {residual:e})")]
    FixedPointDivergence { step: usize, residual: f64 },

    #[error("trajectory left the model domain at t = {t}: {reason}")]
    DomainExit { t: f64, reason: String },

    #[error("unknown monitor `{0}`")]
    UnknownMonitor(String),

    #[error("hierarchy mismatch for (i={i}, j={j}): bracket {bracket}, closed form {closed_form}")]
    HierarchyMismatch { i: u32, j: u32, bracket: f64, closed_form: f64 },

    #[error("{what} is not proportional to its target (residual {residual:e})")]
    FitResidual { what: &'static str, residual: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, WarpError>;
