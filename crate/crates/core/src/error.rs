use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("matrix must be square with at least one row")]
    NotSquare,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("shift {shift} is numerically an eigenvalue (pivot vanished at column {column})")]
    SingularShift { shift: f64, column: usize },

    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),

    #[error("zero vector")]
    ZeroVector,

    #[error("matrix is reducible")]
    Reducible,

    #[error("off-diagonal entry ({row}, {col}) is negative")]
    NegativeOffDiagonal { row: usize, col: usize },

    #[error("all killing rates vanish: the maximal eigenvalue is trivially 0")]
    TrivialSpectrum,

    #[error("r_{index} = {value} is not positive")]
    NonpositiveR { index: usize, value: f64 },

    #[error("component {index} = {value} is not strictly positive")]
    NonpositiveVector { index: usize, value: f64 },

    #[error("eigen oracle is limited to size {cap}, got {size}")]
    OracleSizeCap { size: usize, cap: usize },

    #[error("invalid tridiagonal data: {0}")]
    InvalidTridiagonal(String),

    #[error("zero coupling between states {0} and {1}")]
    ZeroCoupling(usize, usize),

    #[error("zero diagonal at state {0}")]
    ZeroDiagonal(usize),

    #[error("hitting probability x_1 = {0} is not below 1")]
    DegenerateHitting(f64),

    #[error("row {row} sums to {sum}, expected a conservative matrix")]
    NonConservative { row: usize, sum: f64 },

    #[error("initial vector is not strictly increasing at index {0}")]
    NotIncreasing(usize),

    #[error("r-scan produced no finite value")]
    DegenerateScan,

    #[error("Lanczos breakdown at step {0}")]
    Breakdown(usize),

    #[error("no strictly positive iterate available for certification")]
    NoPositiveIterate,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
