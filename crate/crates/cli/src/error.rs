use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes: 0 success, 1 usage, 2 data error, 3 numeric
/// divergence.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("no valid reaction lines in {0}")]
    AllLinesInvalid(PathBuf),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Smiles(#[from] smiles_core::SmilesError),
    #[error(transparent)]
    Csmiles(#[from] csmiles::CsmilesError),
    #[error(transparent)]
    Engine(#[from] seq2seq::EngineError),
    #[error(transparent)]
    Decoding(#[from] decoding::DecodingError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Engine(seq2seq::EngineError::DivergedLoss { .. })
            | CliError::Engine(seq2seq::EngineError::GradMismatch { .. }) => 3,
            CliError::Decoding(decoding::DecodingError::Model(
                seq2seq::EngineError::DivergedLoss { .. },
            )) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}
