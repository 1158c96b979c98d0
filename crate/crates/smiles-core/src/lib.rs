//! SMILES grammar substrate: tokenizer, graph parser, writer, canonicalizer,
//! and valence checker.
//!
//! The supported dialect covers atoms, bracket atoms (isotope, @/@@
//! chirality, H count, charge, atom map), bond symbols `- = # : / \`,
//! branches, ring closures including `%nn`, and dot disconnection. Cis/trans
//! slashes are preserved as text but carry no graph semantics. There is no
//! kekulization and no implicit-hydrogen model: an atom's `explicit_h` is
//! exactly what its bracket said.

pub mod atom;
pub mod canon;
pub mod error;
pub mod gen;
pub mod graph;
pub mod token;
pub mod valence;
pub mod writer;

pub use atom::{AtomDescriptor, Chirality};
pub use canon::canonicalize;
pub use error::{Result, SmilesError};
pub use graph::{parse, strip_atom_maps, Bond, BondOrder, MolGraph};
pub use token::{tokenize, Token, TokenKind, TokenSequence};
pub use valence::{check_valence, fill_implicit_hydrogens, ValenceViolation};
pub use writer::{render_atom, to_smiles, write_smiles, NeighborOrder};

/// Tokenize and parse in one step.
pub fn parse_smiles(smiles: &str) -> Result<MolGraph> {
    parse(&tokenize(smiles)?)
}

/// Canonical comparison key used by the evaluation metrics: atom maps
/// removed and implicit hydrogens filled, so an atom-mapped bracket form
/// and the bare form of the same molecule compare equal.
pub fn canonical_key(smiles: &str) -> Result<String> {
    let graph = strip_atom_maps(&parse_smiles(smiles)?);
    Ok(canonicalize(&fill_implicit_hydrogens(&graph)))
}
