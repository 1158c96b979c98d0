use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty input")]
    EmptyInput,
    #[error("unterminated bracket atom starting at byte {0}")]
    UnterminatedBracket(usize),
    #[error("illegal character {1:?} at byte {0}")]
    IllegalCharacter(usize, char),
    #[error("unbalanced branch parenthesis")]
    UnbalancedBranch,
    #[error("ring closure {0} opened but never matched")]
    UnmatchedRingClosure(u16),
    #[error("bond symbol at token {0} is not followed by an atom")]
    DanglingBond(usize),
    #[error("invalid ring bond for closure {0}: {1}")]
    InvalidRingBond(u16, &'static str),
    #[error("root index {0} out of range for graph with {1} atoms")]
    InvalidRoot(usize, usize),
    #[error("more than 99 simultaneously open ring closures")]
    TooManyRings,
}

pub type Result<T> = std::result::Result<T, SmilesError>;
