use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("group closure exceeded the order limit of {limit}")]
    OrderExceeded { limit: usize },

    #[error("degree {n} exceeds the backtracking bound {limit}")]
    DegreeTooLarge { n: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {n} exceeds the dense operator cap {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("orbit {orbit} has length {len}, but the group has order {order}")]
    NotFullOrbit { orbit: usize, len: usize, order: usize },

    #[error("signature is not constant on orbit {orbit} (spread {spread:.3e})")]
    InconsistentSignature { orbit: usize, spread: f64 },

    #[error("matrix is not invariant under the group (deviation {deviation:.3e})")]
    NotInvariant { deviation: f64 },

    #[error("group is not a symmetry group: the invariant space forces {closure_order} automorphisms, group has {order}")]
    NotSymmetryGroup { order: usize, closure_order: usize },

    #[error("barrier iterate left the interior at alpha = {alpha:.3e}")]
    BarrierDiverged { alpha: f64 },

    #[error("state is not a convex isomorphism (residual {residual:.3e})")]
    InfeasibleState { residual: f64 },

    #[error("face walk stalled: support did not shrink at step {step}")]
    StalledFace { step: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("extreme point is not a permutation (max fractional entry {fractional:.3e})")]
    NonPermutationExtreme { fractional: f64 },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
