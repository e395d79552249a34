//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum McfError {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A stencil was evaluated at a node too close to the grid edge.
    #[error("index ({i}, {j}) is out of the stencil domain of a {nx}x{ny} grid")]
    OutOfDomain {
        i: usize,
        j: usize,
        nx: usize,
        ny: usize,
    },

    /// Explicit time step above the stability bound.
    #[error("time step {dt} exceeds the stability bound {bound}")]
    Stability { dt: f64, bound: f64 },

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A check needs more frames or levels than supplied.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Sub-level sets of a family are not nested, so it cannot be the
    /// foliation of a function.
    #[error("nesting violation: Ω_{s_lo} ⊄ Ω_{s_hi} at t = {t} ({cells} cells)")]
    NestingViolation {
        s_lo: f64,
        s_hi: f64,
        t: f64,
        cells: usize,
    },

    /// A test function violates its admissibility constraints.
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    /// A geometric construction could not be carried out.
    #[error("construction error: {0}")]
    Construction(String),

    /// Malformed snapshot or family file.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, McfError>;
