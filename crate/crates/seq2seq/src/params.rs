use std::collections::BTreeMap;

use rand::Rng;

use crate::config::ModelConfig;
use crate::tensor::Tensor;

/// Named parameter tensors, ordered by name for deterministic serialization
/// and optimizer iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Parameters {
    pub tensors: BTreeMap<String, Tensor>,
}

impl Parameters {
    pub fn get(&self, name: &str) -> &Tensor {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        self.tensors
            .get_mut(name)
            .unwrap_or_else(|| panic!("missing parameter {name}"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(|s| s.as_str())
    }

    pub fn total_values(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    pub fn has_nan(&self) -> bool {
        self.tensors.values().any(Tensor::has_nan)
    }

    /// Hex digest of the exact little-endian f32 serialization, for
    /// determinism checks.
    pub fn checksum(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for (name, t) in &self.tensors {
            for b in name.as_bytes() {
                h = (h ^ u64::from(*b)).wrapping_mul(0x100000001b3);
            }
            for v in &t.data {
                for b in (*v as f32).to_le_bytes() {
                    h = (h ^ u64::from(b)).wrapping_mul(0x100000001b3);
                }
            }
        }
        format!("{h:016x}")
    }
}

/// Initialize parameters: Xavier-uniform matrices, unit layer-norm gains,
/// zero biases. Creation order is fixed so a seeded RNG yields identical
/// tensors run to run.
pub fn init_parameters(config: &ModelConfig, rng: &mut impl Rng) -> Parameters {
    let d = config.d_model;
    let v = config.vocab_size;
    let ff = config.d_ff;
    let mut p = Parameters::default();

    let xavier = |p: &mut Parameters, name: &str, rows: usize, cols: usize, rng: &mut dyn rand::RngCore| {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        p.tensors
            .insert(name.to_string(), Tensor::from_vec(rows, cols, data));
    };
    let ones = |p: &mut Parameters, name: &str, cols: usize| {
        p.tensors
            .insert(name.to_string(), Tensor::from_vec(1, cols, vec![1.0; cols]));
    };
    let zeros = |p: &mut Parameters, name: &str, rows: usize, cols: usize| {
        p.tensors.insert(name.to_string(), Tensor::zeros(rows, cols));
    };

    xavier(&mut p, "embed.tok", v, d, rng);

    for l in 0..config.num_layers {
        for proj in ["wq", "wk", "wv", "wo"] {
            xavier(&mut p, &format!("enc.l{l}.attn.{proj}"), d, d, rng);
        }
        ones(&mut p, &format!("enc.l{l}.ln1.g"), d);
        zeros(&mut p, &format!("enc.l{l}.ln1.b"), 1, d);
        ones(&mut p, &format!("enc.l{l}.ln2.g"), d);
        zeros(&mut p, &format!("enc.l{l}.ln2.b"), 1, d);
        xavier(&mut p, &format!("enc.l{l}.ffn.w1"), d, ff, rng);
        zeros(&mut p, &format!("enc.l{l}.ffn.b1"), 1, ff);
        xavier(&mut p, &format!("enc.l{l}.ffn.w2"), ff, d, rng);
        zeros(&mut p, &format!("enc.l{l}.ffn.b2"), 1, d);
    }
    ones(&mut p, "enc.final.g", d);
    zeros(&mut p, "enc.final.b", 1, d);

    for l in 0..config.num_layers {
        for proj in ["wq", "wk", "wv", "wo"] {
            xavier(&mut p, &format!("dec.l{l}.self.{proj}"), d, d, rng);
        }
        for proj in ["wq", "wk", "wv", "wo"] {
            xavier(&mut p, &format!("dec.l{l}.cross.{proj}"), d, d, rng);
        }
        for ln in ["ln1", "ln2", "ln3"] {
            ones(&mut p, &format!("dec.l{l}.{ln}.g"), d);
            zeros(&mut p, &format!("dec.l{l}.{ln}.b"), 1, d);
        }
        xavier(&mut p, &format!("dec.l{l}.ffn.w1"), d, ff, rng);
        zeros(&mut p, &format!("dec.l{l}.ffn.b1"), 1, ff);
        xavier(&mut p, &format!("dec.l{l}.ffn.w2"), ff, d, rng);
        zeros(&mut p, &format!("dec.l{l}.ffn.b2"), 1, d);
    }
    ones(&mut p, "dec.final.g", d);
    zeros(&mut p, "dec.final.b", 1, d);

    xavier(&mut p, "out.w", d, v, rng);
    zeros(&mut p, "out.b", 1, v);

    xavier(&mut p, "copy.wh", d, 1, rng);
    xavier(&mut p, "copy.ws", d, 1, rng);
    xavier(&mut p, "copy.wx", d, 1, rng);
    zeros(&mut p, "copy.b", 1, 1);

    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn init_is_deterministic() {
        let cfg = ModelConfig::desk_default(30);
        let a = init_parameters(&cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let b = init_parameters(&cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a.checksum(), b.checksum());
        let c = init_parameters(&cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(2));
        assert_ne!(a.checksum(), c.checksum());
    }

    #[test]
    fn shapes_are_consistent() {
        let cfg = ModelConfig::desk_default(30);
        let p = init_parameters(&cfg, &mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        assert_eq!(p.get("embed.tok").rows, 30);
        assert_eq!(p.get("embed.tok").cols, 64);
        assert_eq!(p.get("out.w").cols, 30);
        assert_eq!(p.get("copy.wh").rows, 64);
        assert_eq!(p.get("copy.b").len(), 1);
        assert!(!p.has_nan());
    }
}
