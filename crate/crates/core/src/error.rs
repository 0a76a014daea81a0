use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A rational nonlinearity was evaluated on or past one of its poles.
    #[error("domain error in {what}: denominator {denominator} is not positive")]
    Domain {
        what: &'static str,
        denominator: f64,
    },

    #[error("instability detected at t = {t}: component value {value} in cell {cell}")]
    InstabilityDetected { t: f64, cell: usize, value: f64 },

    #[error("negative state at t = {t}: value {value} in cell {cell}")]
    NegativeState { t: f64, cell: usize, value: f64 },

    #[error("no detached pulse found in trajectory")]
    NoPulse,

    #[error("pulse width undefined: the {threshold} level is not crossed on both flanks")]
    WidthUndefined { threshold: f64 },

    #[error("no bracket for root: {0}")]
    NoBracket(&'static str),

    #[error("power-law fit needs at least 2 positive points, got {0}")]
    FitFailed(usize),

    #[error("point {point} lies outside the grid domain [-{half_width}, {half_width}]")]
    OutOfDomain { point: f64, half_width: f64 },

    #[error("grid function tail {edge} exceeds tail tolerance {tol}")]
    TailTooFat { edge: f64, tol: f64 },

    #[error("multiplier output has imaginary part {leak} above tolerance {tol}")]
    ImaginaryLeak { leak: f64, tol: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trajectory format error: {0}")]
    Format(String),
}
