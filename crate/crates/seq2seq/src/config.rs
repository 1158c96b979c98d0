use crate::error::{EngineError, Result};

/// Transformer dimensions. The desk-scale default (2 layers, 4 heads,
/// d_model 64) trains on a laptop CPU; larger settings are config choices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub num_heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub dropout: f64,
    pub vocab_size: usize,
    pub max_len: usize,
    /// (decoder layer, head) whose cross-attention feeds the copy head and
    /// receives alignment supervision.
    pub alignment_head: (usize, usize),
}

impl ModelConfig {
    pub fn desk_default(vocab_size: usize) -> Self {
        ModelConfig {
            num_layers: 2,
            num_heads: 4,
            d_model: 64,
            d_ff: 128,
            dropout: 0.1,
            vocab_size,
            max_len: 256,
            alignment_head: (1, 0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model % self.num_heads != 0 {
            return Err(EngineError::InvalidConfig(format!(
                "d_model {} not divisible by num_heads {}",
                self.d_model, self.num_heads
            )));
        }
        let (layer, head) = self.alignment_head;
        if layer >= self.num_layers || head >= self.num_heads {
            return Err(EngineError::InvalidConfig(format!(
                "alignment head ({layer}, {head}) out of range"
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(EngineError::InvalidConfig(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.vocab_size == 0 || self.d_model == 0 || self.num_layers == 0 {
            return Err(EngineError::InvalidConfig("zero-sized dimension".to_string()));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.num_heads
    }
}

/// Optimization and loss-weighting settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub lambda_sa: f64,
    pub lambda_ci: f64,
    pub epsilon_smooth: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub rdrop_enabled: bool,
    pub rdrop_alpha: f64,
    pub enable_copy: bool,
    pub enable_sa: bool,
    pub enable_ci: bool,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            lambda_sa: 0.1,
            lambda_ci: 0.1,
            epsilon_smooth: 0.1,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.98,
            adam_eps: 1e-9,
            batch_size: 32,
            epochs: 100,
            rdrop_enabled: false,
            rdrop_alpha: 1.0,
            enable_copy: true,
            enable_sa: true,
            enable_ci: true,
            seed: 0,
        }
    }
}

/// Teacher-forcing probability for the copy gate: linear 1.0 -> 0.1 over the
/// first half of training, then flat 0.1.
pub fn teacher_forcing_tau(epoch: usize, total_epochs: usize) -> f64 {
    let half = total_epochs as f64 * 0.5;
    if half <= 0.0 || epoch as f64 >= half {
        0.1
    } else {
        1.0 - 0.9 * (epoch as f64 / half)
    }
}
