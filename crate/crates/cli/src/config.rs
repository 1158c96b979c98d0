//! Flat `key = value` run configuration with dotted keys. Lines starting
//! with '#' and blank lines are ignored. Every key has a default; the
//! resolved form can be re-emitted verbatim for the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use decoding::BeamConfig;
use seq2seq::{ModelConfig, TrainingConfig};

use crate::error::{io_err, CliError, Result};

#[derive(Debug, Clone, Default)]
pub struct DataPaths {
    pub train: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
    pub checkpoint_dir: PathBuf,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: DataPaths,
    /// vocab_size is a placeholder until the vocabulary is built.
    pub model: ModelConfig,
    pub train: TrainingConfig,
    pub augment_factor: usize,
    pub freeze_augmentation: bool,
    pub class_conditioning: bool,
    pub beam: BeamConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            paths: DataPaths::default(),
            model: ModelConfig::desk_default(0),
            train: TrainingConfig::default(),
            augment_factor: 0,
            freeze_augmentation: false,
            class_conditioning: false,
            beam: BeamConfig::default(),
        }
    }
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`, got {raw:?}",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, String>,
}

impl Reader {
    fn take<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("key {key}: cannot parse {v:?}"))),
        }
    }

    fn take_path(&mut self, key: &str) -> Option<PathBuf> {
        self.map.remove(key).map(PathBuf::from)
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut r = Reader {
            map: parse_kv(text)?,
        };
        let mut cfg = RunConfig::default();

        cfg.seed = r.take("seed", cfg.seed)?;
        if let Some(p) = r.take_path("data.train") {
            cfg.paths.train = p;
        }
        if let Some(p) = r.take_path("data.valid") {
            cfg.paths.valid = p;
        }
        if let Some(p) = r.take_path("data.test") {
            cfg.paths.test = p;
        }
        if let Some(p) = r.take_path("data.checkpoint_dir") {
            cfg.paths.checkpoint_dir = p;
        }
        if let Some(p) = r.take_path("data.output_dir") {
            cfg.paths.output_dir = p;
        }

        cfg.model.num_layers = r.take("model.num_layers", cfg.model.num_layers)?;
        cfg.model.num_heads = r.take("model.num_heads", cfg.model.num_heads)?;
        cfg.model.d_model = r.take("model.d_model", cfg.model.d_model)?;
        cfg.model.d_ff = r.take("model.d_ff", cfg.model.d_ff)?;
        cfg.model.dropout = r.take("model.dropout", cfg.model.dropout)?;
        cfg.model.max_len = r.take("model.max_len", cfg.model.max_len)?;
        let align_layer = r.take("model.alignment_layer", cfg.model.alignment_head.0)?;
        let align_head = r.take("model.alignment_head", cfg.model.alignment_head.1)?;
        cfg.model.alignment_head = (align_layer, align_head);

        cfg.train.lambda_sa = r.take("train.lambda_sa", cfg.train.lambda_sa)?;
        cfg.train.lambda_ci = r.take("train.lambda_ci", cfg.train.lambda_ci)?;
        cfg.train.epsilon_smooth = r.take("train.epsilon_smooth", cfg.train.epsilon_smooth)?;
        cfg.train.learning_rate = r.take("train.learning_rate", cfg.train.learning_rate)?;
        cfg.train.beta1 = r.take("train.beta1", cfg.train.beta1)?;
        cfg.train.beta2 = r.take("train.beta2", cfg.train.beta2)?;
        cfg.train.adam_eps = r.take("train.adam_eps", cfg.train.adam_eps)?;
        cfg.train.batch_size = r.take("train.batch_size", cfg.train.batch_size)?;
        cfg.train.epochs = r.take("train.epochs", cfg.train.epochs)?;
        cfg.train.rdrop_enabled = r.take("train.rdrop_enabled", cfg.train.rdrop_enabled)?;
        cfg.train.rdrop_alpha = r.take("train.rdrop_alpha", cfg.train.rdrop_alpha)?;
        cfg.train.enable_copy = r.take("train.enable_copy", cfg.train.enable_copy)?;
        cfg.train.enable_sa = r.take("train.enable_sa", cfg.train.enable_sa)?;
        cfg.train.enable_ci = r.take("train.enable_ci", cfg.train.enable_ci)?;

        cfg.augment_factor = r.take("augment.factor", cfg.augment_factor)?;
        cfg.freeze_augmentation = r.take("augment.freeze", cfg.freeze_augmentation)?;
        cfg.class_conditioning = r.take("class_conditioning", cfg.class_conditioning)?;

        cfg.beam.beam_size = r.take("decode.beam_size", cfg.beam.beam_size)?;
        cfg.beam.max_len = r.take("decode.max_len", cfg.beam.max_len)?;
        cfg.beam.length_exponent = r.take("decode.length_exponent", cfg.beam.length_exponent)?;
        cfg.beam.copy_threshold = r.take("decode.copy_threshold", cfg.beam.copy_threshold)?;

        for key in r.map.keys() {
            log::warn!("config: unknown key {key} ignored");
        }
        cfg.train.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        if !path.exists() {
            return Err(CliError::FileNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_text(&text)
    }

    /// The fully resolved key = value form, suitable for the manifest and
    /// for reproducing the run.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("seed", self.seed.to_string());
        push("data.train", self.paths.train.display().to_string());
        push("data.valid", self.paths.valid.display().to_string());
        push("data.test", self.paths.test.display().to_string());
        push(
            "data.checkpoint_dir",
            self.paths.checkpoint_dir.display().to_string(),
        );
        push("data.output_dir", self.paths.output_dir.display().to_string());
        push("model.num_layers", self.model.num_layers.to_string());
        push("model.num_heads", self.model.num_heads.to_string());
        push("model.d_model", self.model.d_model.to_string());
        push("model.d_ff", self.model.d_ff.to_string());
        push("model.dropout", self.model.dropout.to_string());
        push("model.max_len", self.model.max_len.to_string());
        push("model.alignment_layer", self.model.alignment_head.0.to_string());
        push("model.alignment_head", self.model.alignment_head.1.to_string());
        push("train.lambda_sa", self.train.lambda_sa.to_string());
        push("train.lambda_ci", self.train.lambda_ci.to_string());
        push("train.epsilon_smooth", self.train.epsilon_smooth.to_string());
        push("train.learning_rate", self.train.learning_rate.to_string());
        push("train.beta1", self.train.beta1.to_string());
        push("train.beta2", self.train.beta2.to_string());
        push("train.adam_eps", self.train.adam_eps.to_string());
        push("train.batch_size", self.train.batch_size.to_string());
        push("train.epochs", self.train.epochs.to_string());
        push("train.rdrop_enabled", self.train.rdrop_enabled.to_string());
        push("train.rdrop_alpha", self.train.rdrop_alpha.to_string());
        push("train.enable_copy", self.train.enable_copy.to_string());
        push("train.enable_sa", self.train.enable_sa.to_string());
        push("train.enable_ci", self.train.enable_ci.to_string());
        push("augment.factor", self.augment_factor.to_string());
        push("augment.freeze", self.freeze_augmentation.to_string());
        push("class_conditioning", self.class_conditioning.to_string());
        push("decode.beam_size", self.beam.beam_size.to_string());
        push("decode.max_len", self.beam.max_len.to_string());
        push("decode.length_exponent", self.beam.length_exponent.to_string());
        push("decode.copy_threshold", self.beam.copy_threshold.to_string());
        out
    }
}
