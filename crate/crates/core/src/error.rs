//! Error type shared by every module of the crate.

/// Failure modes for constructors, evaluators, and solvers.
///
/// Scalar payloads are widened to `f64` so the enum stays object-safe to
/// format regardless of the generic scalar in use.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A value failed a structural invariant at construction time.
    #[error("invalid construction: {0}")]
    InvalidConstruction(String),

    /// Two objects that must live on the same interval do not.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A truncated catalog weight was evaluated below its smallest cell.
    #[error("evaluation at t = {t:e} below truncation floor {floor:e}")]
    BelowTruncation { t: f64, floor: f64 },

    /// Point evaluation outside the interval the object is defined on.
    #[error("argument t = {t:e} outside domain (0, {end:e})")]
    OutOfDomain { t: f64, end: f64 },

    /// The requested integral has no exact closed form for this pairing of
    /// Orlicz function and weight piece.
    #[error("no exact modular form: {0}")]
    UnsupportedModular(String),

    /// An operation's documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative solver exhausted its budget without certifying a result.
    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    /// Exhaustive enumeration was requested beyond the supported size.
    #[error("instance size {n} exceeds oracle limit {max}")]
    TooLarge { n: usize, max: usize },

    /// A matrix argument violates the row-sum = column-sum balance condition.
    #[error("matrix unbalanced at index {index}: row sum {row:e} != column sum {col:e}")]
    Unbalanced { index: usize, row: f64, col: f64 },

    /// A cumulative weight required to be finite is infinite.
    #[error("cumulative weight is infinite at t = {t:e}")]
    InfiniteCumulative { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
