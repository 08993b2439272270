use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// The closed-form law does not apply to the requested parameters.
    #[error("{0}; use a Monte Carlo ensemble instead")]
    Validity(String),

    /// An unlimited walk ran into the safety ceiling without being absorbed.
    #[error("walk from a0 = {a0} not absorbed after {ceiling} {unit}")]
    CeilingReached {
        a0: u64,
        ceiling: u64,
        unit: &'static str,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("cannot merge ensembles: {0}")]
    Mismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: f64, range: &'static str) -> Self {
        Error::OutOfRange {
            what,
            value,
            range,
        }
    }
}
