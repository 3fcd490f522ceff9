//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability outside [0, 1] was supplied to a measure.
    #[error("invalid probability {value}: must lie in [0, 1]")]
    InvalidProbability { value: String },

    /// Surprise of a zero-probability event diverges.
    #[error("surprise diverges for probability 0")]
    DivergentSurprise,

    /// A distribution or support with no outcomes.
    #[error("empty support: need at least one outcome")]
    EmptySupport,

    /// Probabilities do not sum to exactly 1.
    #[error("probabilities sum to {total}, expected exactly 1")]
    NotNormalized { total: String },

    /// Duplicate outcome or register label.
    #[error("duplicate label {label:?}")]
    DuplicateLabel { label: String },

    /// Parallel lists of different lengths.
    #[error("length mismatch: {expected} labels vs {got} probabilities")]
    LengthMismatch { expected: usize, got: usize },

    /// A rational literal that could not be parsed.
    #[error("cannot parse {text:?} as an exact rational (use \"num/den\" or \"num\")")]
    InvalidRational { text: String },

    /// A distribution was paired with a partition over a different space.
    #[error("space mismatch: {detail}")]
    SpaceMismatch { detail: String },

    /// Permutation / distribution size disagreement.
    #[error("size mismatch: expected {expected} states, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    /// Not a valid permutation of 0..n-1.
    #[error("invalid permutation: {detail}")]
    InvalidPermutation { detail: String },

    /// Malformed partition (overlap, out-of-range index, reserved label).
    #[error("invalid partition: {detail}")]
    InvalidPartition { detail: String },

    /// Malformed computational operation.
    #[error("invalid operation: {detail}")]
    InvalidOperation { detail: String },

    /// Operation composition or prior with incompatible state lists.
    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    /// Microstate budget exceeds addressable memory.
    #[error("microstate budget {requested} does not fit in memory")]
    BudgetTooLarge { requested: String },

    /// A protocol step referenced a register that does not exist.
    #[error("unknown register {name:?}")]
    UnknownRegister { name: String },

    /// Thermalization targeted a register that is not (currently) non-computational.
    #[error("register {name:?} is computational; only environment or merged registers thermalize")]
    NotEnvironment { name: String },

    /// Merge/unmerge applied in the wrong state.
    #[error("merge state error: {detail}")]
    MergeStateError { detail: String },

    /// Partition over tree leaves does not cover exactly the leaf labels.
    #[error("partition mismatch: {detail}")]
    PartitionMismatch { detail: String },

    /// A zero-probability branch was rejected by the chosen policy.
    #[error("zero-probability outcome {label:?} has no finite branch")]
    ZeroBranch { label: String },

    /// A step would have decreased total entropy: the model forbids it.
    #[error("second-law violation at step {index}: total entropy {before} -> {after}")]
    SecondLawViolation {
        index: usize,
        before: f64,
        after: f64,
    },

    /// Failure inside a protocol step, tagged with the step index.
    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
