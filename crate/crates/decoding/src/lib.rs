//! Inference and evaluation: beam search over the copy-augmented
//! distribution, copy tracing, top-k accuracy and validity tables,
//! token-level edit-distance analytics, and attention dump files.

pub mod beam;
pub mod dump;
pub mod editdist;
pub mod error;
pub mod metrics;
pub mod trace;

pub use beam::{beam_search, greedy_decode, BeamConfig, Candidate, Hypothesis, PredictionSet};
pub use dump::{attention_dump, write_matrix_csv, write_matrix_pgm};
pub use editdist::{edit_distance_report, levenshtein, EditDistanceReport};
pub use error::{DecodingError, Result};
pub use metrics::{gold_key, topk_accuracy, validity};
pub use trace::{copy_trace, trace_to_tsv, TraceRecord};
