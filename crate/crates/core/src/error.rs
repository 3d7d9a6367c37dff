use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-invertible dual scalar (zero body)")]
    NonInvertible,
    #[error("logarithm branch error: base {0} lies on the branch cut")]
    Branch(String),
    #[error("singular dual power: zero body")]
    Singular,
    #[error("no exact rational square root of {0}")]
    NotPerfectSquare(String),
    #[error("gamma pole at delta = -1/2 (2*delta + 1 = 0)")]
    GammaPole,
    #[error("not a null vector: L1 or L2 residual is nonzero")]
    NotNullVector,
    #[error("state is not homogeneous of level {0}")]
    NotHomogeneous(u32),
    #[error("state level {level} exceeds cutoff {cutoff}")]
    LevelAboveCutoff { level: u32, cutoff: u32 },
    #[error("module contexts differ")]
    ContextMismatch,
    #[error("non-graded walk not supported: coefficient at index {0} >= 0")]
    NonGradedWalk(i32),
    #[error("absorbed point: observable undefined after swallowing")]
    AbsorbedPoint,
    #[error("all paths absorbed at checkpoint t = {0}")]
    AllAbsorbed(f64),
    #[error("empty point list")]
    EmptyPoints,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
