use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A bin carries no probability under the law it is being conditioned on.
    #[error("bin {bin} has zero mass under the conditioning law")]
    ZeroMassBin { bin: usize },

    /// An interval carries no probability under the law being conditioned.
    #[error("interval has zero mass under the conditioning law")]
    ZeroMass,

    /// Lloyd-Max converged to a partition with an empty bin.
    #[error("Lloyd-Max design left bin {bin} with zero design mass")]
    DegenerateDesign { bin: usize },

    #[error("integral diverges or exceeds the quadrature budget (estimate {estimate:e}, error {error:e})")]
    DivergentIntegral { estimate: f64, error: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    /// The bracketed minimizer ended on the bracket edge of bin `bin`.
    #[error("no interior minimum inside the search bracket of bin {bin}")]
    NoBracket { bin: usize },

    /// The received symbol has zero marginal probability.
    #[error("received index {received} has zero marginal probability")]
    ZeroEvidence { received: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
