use smiles_core::SmilesError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsmilesError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error("modifier token {text:?} at position {position} has no preceding element")]
    DanglingModifier { position: usize, text: String },
    #[error("malformed token sequence at position {position}: {reason}")]
    MalformedSequence { position: usize, reason: String },
    #[error("atom map {map} appears more than once on one side")]
    DuplicateAtomMap { map: u32 },
    #[error("vocabulary corpus is empty")]
    EmptyCorpus,
}

pub type Result<T> = std::result::Result<T, CsmilesError>;
