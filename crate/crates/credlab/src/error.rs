//! Error taxonomy shared by all modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A probability or report fell outside a generator's domain, or hit a
    /// curvature singularity.
    #[error("domain violation: value {value} outside [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    /// An operation that needs q' or q'' was handed a step function (or a
    /// clamped affine region).
    #[error("approval function not differentiable at {at}: {reason}")]
    NotDifferentiable { at: f64, reason: String },

    /// A constructor or operation received parameters violating a stated
    /// invariant.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An operation's precondition does not hold for these inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The approval function offers nothing beyond its value at the truthful
    /// report, so no calibration/approval conflict exists.
    #[error("no conflict: {0}")]
    NoConflict(String),

    /// Quadrature panel doubling failed to converge.
    #[error("numerics failure: {0}")]
    Numerics(String),

    /// The step threshold would leave the report space; screening collapses
    /// to rejecting everyone.
    #[error("degenerate regime: {0}")]
    DegenerateRegime(String),

    /// A capacity table is not monotone submodular with unit-bounded
    /// marginals; the message carries the first violating witness.
    #[error("capacity violation: {0}")]
    Capacity(String),

    /// A finite-difference step changed the greedy ordering; the caller must
    /// shrink the step.
    #[error("greedy ordering changed: {0}")]
    OrderingChanged(String),

    /// Coordinate ascent exceeded its sweep budget.
    #[error("convergence failure: {0}")]
    Convergence(String),
}
