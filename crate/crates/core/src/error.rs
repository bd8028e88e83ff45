//! Crate-wide error type.

use alloc::string::String;

/// Errors surfaced by graph construction, spectral algebra, generators,
/// the solver, and certificate checks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Edge-list ingestion failure; `line` is 1-based.
    #[error("edge list line {line}: {msg}")]
    EdgeList { line: usize, msg: String },

    /// Normalized adjacency is undefined when a node has zero degree.
    #[error("node {0} is isolated (zero degree); normalized adjacency undefined")]
    IsolatedNode(usize),

    /// A matrix expected to be symmetric is not, within tolerance.
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Filter order outside `1..=N`.
    #[error("filter order {got} out of range 1..={max}")]
    OrderOutOfRange { got: usize, max: usize },

    /// Frequency response vanishes at some graph frequency.
    #[error("filter not invertible: min |h_tilde| = {min_abs:e} <= threshold {threshold:e}")]
    SingularFilter { min_abs: f64, threshold: f64 },

    /// Random filter generation exhausted its redraw budget.
    #[error("no invertible filter after {attempts} draws (order {order}, alpha {alpha})")]
    FilterRetryExhausted {
        order: usize,
        alpha: f64,
        attempts: usize,
    },

    /// An inverse-response entry is too close to zero to invert back.
    #[error("inverse response entry {index} is near zero ({value:e})")]
    SingularInverse { index: usize, value: f64 },

    /// Relative error against an all-zero reference is undefined.
    #[error("relative error undefined: reference matrix is zero")]
    UndefinedMetric,

    /// The supplied eigenvector index does not match the node-pair
    /// difference vector.
    #[error("eigenvector {k} is not the normalized difference vector of nodes ({i},{j})")]
    EigenvectorMismatch { i: usize, j: usize, k: usize },

    /// Certificate preconditions on the ground truth are not met.
    #[error("support inconsistent with g_tilde0: {0}")]
    SupportInconsistent(String),

    /// `sign(Z_I g_tilde0)` has an entry too close to zero to orient.
    #[error("sign of (Z_I g_tilde0) ambiguous at support row {row} (|value| = {value:e})")]
    SignAmbiguous { row: usize, value: f64 },
}
