use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. The first field names it.
    #[error("invalid {0}: {1}")]
    InvalidParameter(&'static str, String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("node index {index} outside {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("operation requires {required}, got theta = {theta}")]
    Regime { required: &'static str, theta: f64 },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    SingularTridiagonal { row: usize },

    #[error(
        "Newton iteration did not converge at level {level} after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence {
        level: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("blow-up at level {level} (max norm {linf:e})")]
    BlowUp { level: usize, linf: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("trajectory has no stored history")]
    HistoryMissing,

    #[error("incompatible runs: {0}")]
    Incompatible(String),
}
