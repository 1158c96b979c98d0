use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("sequence length {len} exceeds max_len {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("token id {id} out of vocabulary range {vocab}")]
    UnknownId { id: usize, vocab: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("loss diverged (NaN/inf) at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("gradient mismatch on {param}: relative error {rel_err:.3e} exceeds {tol:.1e}")]
    GradMismatch {
        param: String,
        rel_err: f64,
        tol: f64,
    },
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint io: {0}")]
    CheckpointIo(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    CheckpointFormat(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
