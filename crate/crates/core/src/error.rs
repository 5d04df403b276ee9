use thiserror::Error;

/// Errors raised by the bound, sampling and stopping routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the routine.
    #[error("parameter `{name}` out of range: {value} ({expected})")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The sample violates an `IncidenceSample` invariant.
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// The declared alphabet is smaller than the set of observed species.
    #[error("alphabet size {declared} is smaller than the {observed} observed species")]
    AlphabetTooSmall { declared: u64, observed: u64 },

    /// The bound is undefined at this sample size (e.g. n <= b, or R* < 1).
    #[error("bound undefined: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value,
            expected: "must lie in (0, 1)",
        })
    }
}

pub(crate) fn check_at_least(name: &'static str, value: f64, min: f64, expected: &'static str) -> Result<()> {
    if value >= min {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange { name, value, expected })
    }
}
