use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("generator has a negative off-diagonal rate at ({row}, {col})")]
    NegativeOffDiagonal { row: usize, col: usize },

    #[error("generator row {row} sums to {sum}, expected 0")]
    RowSumNonzero { row: usize, sum: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("observation label {label} is never attained")]
    NotSurjective { label: usize },

    #[error("observation label {label} out of range")]
    LabelOutOfRange { label: usize },

    #[error("state index {state} out of range")]
    StateOutOfRange { state: usize },

    #[error("state subset is empty")]
    EmptySubset,

    #[error("state {state} is not in the subset")]
    StateNotInSubset { state: usize },

    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: &'static str },

    #[error("negative mass {value} at state {state} on the conditioning face")]
    NegativeMass { state: usize, value: f64 },

    #[error("face mass vanished along the flow")]
    FaceMassVanished,

    #[error("degenerate observation jump at t = {time}: denominator {denominator}")]
    DegenerateJump { time: f64, denominator: f64 },

    #[error("invalid path: {reason}")]
    InvalidPath { reason: &'static str },

    #[error("target label equals the source label")]
    LabelEqualsSource,

    #[error("at least two observation labels are required")]
    TrivialObservation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("value iteration did not converge after {iterations} sweeps (last change {change})")]
    NoConvergence { iterations: usize, change: f64 },
}
