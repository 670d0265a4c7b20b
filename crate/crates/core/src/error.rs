use thiserror::Error;

/// Errors produced by the solver, the kernel quadratures and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {panels} panels (partial sum {partial})")]
    Convergence { partial: f64, panels: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solution blew up at t = {t}; last valid time {last_valid_t}")]
    BlowUp { t: f64, last_valid_t: f64 },

    #[error("stability check failed at t = {t}: sup|phi| / phi(0) = {ratio}")]
    Stability { t: f64, ratio: f64 },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("fit needs at least {needed} usable points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("integrand tail not resolved; need x_max of at least {required_x_max}")]
    UnresolvedTail { required_x_max: f64 },

    #[error("weight parameters carry no Fourier cutoff")]
    MissingCutoff,

    #[error("trajectory too coarse: {0}")]
    TrajectoryTooCoarse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
