use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum GciError {
    #[error("ground-set size {0} out of range {1}..={2}")]
    GroundSetOutOfRange(usize, usize, usize),
    #[error("singular conditioning block")]
    SingularBlock,
    #[error("input not positive definite")]
    NotPositiveDefinite,
    #[error("restriction mismatch")]
    RestrictionMismatch,
    #[error("overlap {overlap} exceeds matrix dimensions {n_left}x{n_right}")]
    BadOverlap {
        overlap: usize,
        n_left: usize,
        n_right: usize,
    },
    #[error("not a polymatroid")]
    NotPolymatroid,
    #[error("oracle requires ground-set size {expected}, got {got}")]
    WrongGroundSet { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("corrupt shard file {0}")]
    CorruptShard(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GciError>;
