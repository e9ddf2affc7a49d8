use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `x` not in `[0,1]`).
    #[error("domain error: {0}")]
    Domain(String),
    /// A model parameter is invalid (non-positive shift, bad lambda ordering, ...).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Input data is malformed (non-positive samples, unordered partition, ...).
    #[error("input error: {0}")]
    Input(String),
    /// Derivative data was needed but is not available.
    #[error("capability error: {0}")]
    Capability(String),
    /// The function does not satisfy the shape hypothesis asserted by the caller.
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub(crate) fn check_unit(x: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} = {x} is outside [0, 1]")))
    }
}
