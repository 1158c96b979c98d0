use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecodingError {
    #[error("model error: {0}")]
    Model(#[from] seq2seq::EngineError),
    #[error("gold reactants failed to parse: {0}")]
    GoldParse(#[source] smiles_core::SmilesError),
    #[error("token error: {0}")]
    Token(#[from] csmiles::CsmilesError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DecodingError>;
