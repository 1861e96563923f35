use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("non-finite value")]
    NonFinite,
    #[error("degenerate interval")]
    DegenerateInterval,
    #[error("empty interval")]
    EmptyInterval,
    #[error("no valley exists")]
    NoValley,
    #[error("unstable partition")]
    UnstablePartition,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("zero variance in feature {feature} of class {class}")]
    ZeroVariance { class: i64, feature: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("image format: {0}")]
    Image(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
