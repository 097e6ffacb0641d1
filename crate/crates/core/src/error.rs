use thiserror::Error;

/// Errors produced by the proxpair library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("support direction must be nonzero")]
    ZeroDirection,

    /// The conic backend did not reach an acceptable status.
    #[error("solver failed on {context}: {status}")]
    Solver { context: &'static str, status: String },

    /// A solve terminated but its optimality gap certificate is above tolerance.
    #[error("{context}: certified gap {gap:e} exceeds tolerance {tol:e}")]
    GapNotClosed {
        context: &'static str,
        gap: f64,
        tol: f64,
    },

    #[error("no mate within d + tol for point {point:?} (distance {distance})")]
    NoMate { point: Vec<f64>, distance: f64 },

    #[error("no nondegenerate sub-pairs could be sampled")]
    DegeneratePair,

    #[error("admissible set on side {side} is empty for c = {c}")]
    EmptyAdmissible { side: char, c: f64 },

    #[error("map is not cyclic: image of {point:?} leaves side {side}")]
    NotCyclic { side: char, point: Vec<f64> },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("orbit hull did not stabilize within {rounds} rounds")]
    OrbitNotStabilized { rounds: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}
