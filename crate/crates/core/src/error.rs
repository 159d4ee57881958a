use thiserror::Error;

/// Errors raised by the numerical, channel, valuation, mechanism and
/// simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value {value} is outside the valuation support (must exceed {p_si})")]
    Support { value: f64, p_si: f64 },

    #[error("target {target} is outside the virtual valuation range (must exceed {p_si})")]
    Range { target: f64, p_si: f64 },

    #[error("target {target} is not bracketed by [{f_lo}, {f_hi}]")]
    Bracket { target: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("mechanism error: {0}")]
    Mechanism(String),

    #[error("no candidates")]
    Empty,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{failed} of {total} trials failed (first error: {first})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
