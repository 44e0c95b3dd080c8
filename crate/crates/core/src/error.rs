use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state length {0} is not a power of two >= 2")]
    BadLength(usize),

    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("target qubit {target} out of range for a {num_qubits}-qubit register")]
    TargetOutOfRange { target: usize, num_qubits: usize },

    #[error("operator is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("operator is not positive semidefinite (deviation {0:e})")]
    NotPositive(f64),

    #[error("measurement is incomplete (max |sum M^dag M - I| = {0:e})")]
    IncompleteMeasurement(f64),

    #[error("theta = {0} is outside [0, pi/2]")]
    ThetaOutOfRange(f64),

    #[error("{name} = {value} is outside [0, 1]")]
    KeyOutOfRange { name: &'static str, value: f64 },

    #[error("degenerate basis: smallest Gram eigenvalue {0:e} (theta = 0 requires y = 0)")]
    DegenerateBasis(f64),

    #[error("outcome branch has vanishing norm ({0:e})")]
    ZeroBranch(f64),

    #[error("extraction weight {0:e} vanishes; nothing to extract on this branch")]
    ZeroWeight(f64),

    #[error("qubit {0} is entangled with the rest of the register")]
    NotProduct(usize),

    #[error("shots must be at least 1")]
    NoShots,

    #[error("grid resolution {0} is below 2")]
    BadResolution(usize),
}
