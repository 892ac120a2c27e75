use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("operator order {order} exceeds the limit {limit} (set STARQ_MAX_OP_ORDER to raise it)")]
    OperatorOrderExceeded { order: u32, limit: u32 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("Poisson tensor is not constant")]
    NonConstantPoisson,

    #[error("Poisson tensor is not antisymmetric at ({0}, {1})")]
    NonAntisymmetricPoisson(usize, usize),

    #[error("frame vector fields {0} and {1} do not commute")]
    NonCommutingFrame(usize, usize),

    #[error("frame does not reproduce the Poisson tensor at component ({0}, {1})")]
    FrameMismatch(usize, usize),

    #[error("frame entry {0} is not a vector field")]
    NotAVectorField(usize),

    #[error("map is not an admissible triangular diffeomorphism: {0}")]
    NonInvertibleMap(String),

    #[error("connection is not flat")]
    NonFlatConnection,

    #[error("connection data is not symmetric: {0}")]
    AsymmetricConnection(String),

    #[error("invalid connection: {0}")]
    InvalidConnection(String),

    #[error("commutator family is incompatible at coordinate {alpha}")]
    IncompatibleFamily { alpha: usize },

    #[error("nested commutators did not terminate below the operator order limit")]
    NonTerminatingNesting,

    #[error("missing lower orders: have S_0..S_{have}, need S_0..S_{need}")]
    MissingLowerOrders { have: usize, need: usize },

    #[error("coordinates are not quantum canonical: {0}")]
    NotQuantumCanonical(String),

    #[error("commutator has a nonzero ħ⁰ part; cannot divide by iħ")]
    NonvanishingClassicalCommutator,

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}
