use thiserror::Error;

/// Errors produced while building chains or running the solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("kernel entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("kernel row {row} sums to {sum} (deviation {deviation:e})")]
    RowSumViolation { row: usize, sum: f64, deviation: f64 },

    #[error("restart distribution invalid: {reason}")]
    BadDistribution { reason: String },

    #[error("restart probability must lie strictly inside (0, 1), got {p}")]
    BadRestartProbability { p: f64 },

    #[error("target set is empty")]
    EmptyTarget,

    #[error("target index {index} out of range for {n} states")]
    TargetOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("linear solve failed: residual {residual:e} exceeds {limit:e}")]
    SolverFailure { residual: f64, limit: f64 },

    /// Value iteration ran out of iterations. Expected exactly when the
    /// hitting time is infinite; carries the last iterate so callers can
    /// inspect the divergence.
    #[error("value iteration did not converge within {iterations} iterations")]
    NonConverged { iterations: usize, last: Vec<f64> },

    /// The four finiteness criteria disagreed. This signals an
    /// implementation bug, not a property of the input chain.
    #[error("finiteness criteria disagree: {details}")]
    EquivalenceViolation { details: String },

    /// The target cannot be reached from the restart distribution under the
    /// base kernel, so the expected hitting time is infinite for every
    /// restart probability.
    #[error("target unreachable from the restart distribution; hitting time is infinite for every p")]
    InfeasibleTarget,

    #[error("truncation boundary too close: tail bound {bound:e} exceeds {limit:e}")]
    BoundaryTooClose { bound: f64, limit: f64 },

    #[error("unknown state label {label:?}")]
    UnknownState { label: String },

    #[error("unsupported schema_version {version} (expected {expected})")]
    UnsupportedSchema { version: u32, expected: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
