//! Desk-scale sequence-to-sequence engine: a transformer encoder-decoder
//! whose output mixes vocabulary generation with attention-weighted copying
//! from the source, trained with a composite objective (language modeling,
//! attention alignment, copy-gate supervision) under annealed teacher
//! forcing of the gate. All computation is f64 on a small reverse-mode
//! tape; checkpoints serialize f32.

pub mod adam;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod params;
pub mod tape;
pub mod tensor;
pub mod train;

pub use adam::Adam;
pub use config::{teacher_forcing_tau, ModelConfig, TrainingConfig};
pub use error::{EngineError, Result};
pub use gradcheck::{grad_check, GradCheckReport, LossTerm};
pub use loss::{
    alignment_loss, copy_index_loss, gen_prob, lm_loss, mix_distribution, rdrop_lm_loss,
    LossBreakdown,
};
pub use model::{decode_step, encode, DecoderStep, ForwardOptions};
pub use params::{init_parameters, Parameters};
pub use tensor::Tensor;
pub use train::{
    alignment_attention, evaluate_losses, gate_values, train, EpochMetrics, EpochSource,
    SpecialIds, TrainExample, TrainOutcome,
};
