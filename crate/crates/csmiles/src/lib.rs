//! Decomposed molecular token representation and reaction token alignment.
//!
//! `codec` replaces bracket atoms with element tokens plus the five specials
//! `& + $ H @`; `vocab` builds dense token tables over a corpus; `align`
//! derives binary reactant/product alignment maps from atom mappings and the
//! copy labels and smoothed targets used for training supervision.

pub mod align;
pub mod codec;
pub mod error;
pub mod vocab;

pub use align::{build_sam, copy_labels, smooth, AlignmentMap, CopyLabelVector, SmoothedAlignment};
pub use codec::{
    classify, decode, encode, encode_atom, tokens_from_line, CSmilesKind, CSmilesSequence,
    CSmilesToken,
};
pub use error::{CsmilesError, Result};
pub use vocab::{build_vocab, raw_token_set, Vocabulary, EOS, PAD, SENTINELS, SOS, UNK};
