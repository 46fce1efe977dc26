use thiserror::Error;

use crate::analysis::NotInGReason;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),

    #[error("Pi is singular (2*Delta - Phi - 1 = 0)")]
    SingularPi,

    #[error("configuration is outside the meaningful set: {0}")]
    NotInG(NotInGReason),

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid error interval [{lower}, {upper}]: need 0 < e_lower <= e_upper")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("optimal social delay is zero; price of anarchy undefined")]
    ZeroOptimum,

    #[error("alpha = {alpha} is outside the transition regime (2*Delta - Phi - alpha <= 0)")]
    OutOfRegime { alpha: f64 },

    #[error("i/o failure: {0}")]
    Io(String),
}

pub(crate) fn domain<T: crate::Scalar>(
    what: &'static str,
    value: T,
    domain: &'static str,
) -> Error {
    Error::Domain {
        what,
        value: value.as_f64(),
        domain,
    }
}
