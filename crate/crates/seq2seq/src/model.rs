//! Transformer encoder-decoder with a pointer-style copy head.
//!
//! Pre-norm residual blocks with a final layer norm on each stack. One
//! configured decoder cross-attention head both feeds the copy head (its
//! weights over encoder outputs form the context of Eq-style mixing) and is
//! the head the alignment loss supervises.

use std::collections::BTreeMap;

use rand::RngCore;

use crate::config::ModelConfig;
use crate::error::{EngineError, Result};
use crate::params::Parameters;
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;

/// Parameter leaves registered on a tape, by name.
pub struct ParamNodes {
    pub map: BTreeMap<String, NodeId>,
}

pub fn insert_params(tape: &mut Tape, params: &Parameters) -> ParamNodes {
    let map = params
        .tensors
        .iter()
        .map(|(name, tensor)| (name.clone(), tape.parameter(tensor.clone())))
        .collect();
    ParamNodes { map }
}

impl ParamNodes {
    fn get(&self, name: &str) -> NodeId {
        *self
            .map
            .get(name)
            .unwrap_or_else(|| panic!("missing parameter node {name}"))
    }
}

/// Per-pass switches. Dropout fires only when an RNG is supplied.
pub struct ForwardOptions<'a> {
    pub dropout_rng: Option<&'a mut dyn RngCore>,
    /// Per-target-step hard copy-gate substitution: Some(y) replaces the
    /// model's generation probability at that step.
    pub gate_override: Option<&'a [Option<f64>]>,
    pub enable_copy: bool,
}

impl Default for ForwardOptions<'_> {
    fn default() -> Self {
        ForwardOptions {
            dropout_rng: None,
            gate_override: None,
            enable_copy: true,
        }
    }
}

/// Node handles of one teacher-forced pass.
pub struct ForwardPass {
    /// Encoder output H, |P|×d.
    pub enc_out: NodeId,
    /// Decoder states after the final norm, T×d.
    pub dec_states: NodeId,
    /// Decoder input embeddings (token + positional), T×d.
    pub dec_input: NodeId,
    /// Cross-attention per decoder layer and head, each T×|P|.
    pub cross_attn: Vec<Vec<NodeId>>,
    /// The supervised/copy head's attention, T×|P|.
    pub align_attn: NodeId,
    /// Attention-weighted context over H, T×d.
    pub h_star: NodeId,
    /// Raw generation gate, T×1.
    pub p_gen: NodeId,
    /// Gate actually used in the mixture (after any override), T×1.
    pub p_gen_used: NodeId,
    /// Vocabulary softmax, T×V.
    pub p_vocab: NodeId,
    /// Final mixture (equal to p_vocab when copying is disabled), T×V.
    pub mixed: NodeId,
}

pub fn check_ids(config: &ModelConfig, ids: &[usize]) -> Result<()> {
    if ids.len() > config.max_len {
        return Err(EngineError::SequenceTooLong {
            len: ids.len(),
            max: config.max_len,
        });
    }
    for &id in ids {
        if id >= config.vocab_size {
            return Err(EngineError::UnknownId {
                id,
                vocab: config.vocab_size,
            });
        }
    }
    Ok(())
}

/// Sinusoidal position rows for positions 0..len.
pub fn positional_encoding(len: usize, d_model: usize) -> Tensor {
    let mut pe = Tensor::zeros(len, d_model);
    for pos in 0..len {
        for i in 0..d_model {
            let exponent = (2 * (i / 2)) as f64 / d_model as f64;
            let angle = pos as f64 / 10_000f64.powf(exponent);
            pe.set(pos, i, if i % 2 == 0 { angle.sin() } else { angle.cos() });
        }
    }
    pe
}

fn dropout(
    tape: &mut Tape,
    x: NodeId,
    p: f64,
    rng: &mut Option<&mut dyn RngCore>,
) -> NodeId {
    let Some(rng) = rng.as_deref_mut() else {
        return x;
    };
    if p <= 0.0 {
        return x;
    }
    let shape = (tape.value(x).rows, tape.value(x).cols);
    let keep = 1.0 - p;
    let data = (0..shape.0 * shape.1)
        .map(|_| {
            if rand::Rng::gen_bool(&mut *rng, keep) {
                1.0 / keep
            } else {
                0.0
            }
        })
        .collect();
    let mask = tape.constant(Tensor::from_vec(shape.0, shape.1, data));
    tape.mul(x, mask)
}

fn embed(
    tape: &mut Tape,
    nodes: &ParamNodes,
    config: &ModelConfig,
    ids: &[usize],
) -> NodeId {
    let table = nodes.get("embed.tok");
    let raw = tape.gather_rows(table, ids);
    let scaled = tape.affine(raw, (config.d_model as f64).sqrt(), 0.0);
    let pe = tape.constant(positional_encoding(ids.len(), config.d_model));
    tape.add(scaled, pe)
}

struct AttentionOut {
    out: NodeId,
    heads: Vec<NodeId>,
}

fn multi_head_attention(
    tape: &mut Tape,
    nodes: &ParamNodes,
    config: &ModelConfig,
    prefix: &str,
    queries: NodeId,
    keys_values: NodeId,
    mask: Option<NodeId>,
) -> AttentionOut {
    let q = tape.matmul(queries, nodes.get(&format!("{prefix}.wq")));
    let k = tape.matmul(keys_values, nodes.get(&format!("{prefix}.wk")));
    let v = tape.matmul(keys_values, nodes.get(&format!("{prefix}.wv")));
    let dk = config.head_dim();
    let scale = 1.0 / (dk as f64).sqrt();
    let mut heads = Vec::with_capacity(config.num_heads);
    let mut contexts = Vec::with_capacity(config.num_heads);
    for h in 0..config.num_heads {
        let qh = tape.slice_cols(q, h * dk, dk);
        let kh = tape.slice_cols(k, h * dk, dk);
        let vh = tape.slice_cols(v, h * dk, dk);
        let kt = tape.transpose(kh);
        let raw = tape.matmul(qh, kt);
        let mut logits = tape.affine(raw, scale, 0.0);
        if let Some(m) = mask {
            logits = tape.add(logits, m);
        }
        let attn = tape.softmax_rows(logits);
        heads.push(attn);
        contexts.push(tape.matmul(attn, vh));
    }
    let ctx = tape.concat_cols(&contexts);
    let out = tape.matmul(ctx, nodes.get(&format!("{prefix}.wo")));
    AttentionOut { out, heads }
}

fn feed_forward(
    tape: &mut Tape,
    nodes: &ParamNodes,
    prefix: &str,
    x: NodeId,
) -> NodeId {
    let h = tape.matmul(x, nodes.get(&format!("{prefix}.w1")));
    let h = tape.add_row(h, nodes.get(&format!("{prefix}.b1")));
    let h = tape.relu(h);
    let h = tape.matmul(h, nodes.get(&format!("{prefix}.w2")));
    tape.add_row(h, nodes.get(&format!("{prefix}.b2")))
}

fn layer_norm(tape: &mut Tape, nodes: &ParamNodes, prefix: &str, x: NodeId) -> NodeId {
    let g = nodes.get(&format!("{prefix}.g"));
    let b = nodes.get(&format!("{prefix}.b"));
    tape.layer_norm(x, g, b)
}

fn causal_mask(tape: &mut Tape, len: usize) -> NodeId {
    let mut m = Tensor::zeros(len, len);
    for r in 0..len {
        for c in r + 1..len {
            m.set(r, c, -1e9);
        }
    }
    tape.constant(m)
}

/// Encoder stack over product ids; returns the H node.
pub fn build_encoder(
    tape: &mut Tape,
    nodes: &ParamNodes,
    config: &ModelConfig,
    src_ids: &[usize],
    rng: &mut Option<&mut dyn RngCore>,
) -> Result<NodeId> {
    check_ids(config, src_ids)?;
    let mut x = embed(tape, nodes, config, src_ids);
    x = dropout(tape, x, config.dropout, rng);
    for l in 0..config.num_layers {
        let normed = layer_norm(tape, nodes, &format!("enc.l{l}.ln1"), x);
        let attn = multi_head_attention(
            tape,
            nodes,
            config,
            &format!("enc.l{l}.attn"),
            normed,
            normed,
            None,
        );
        let attn_do = dropout(tape, attn.out, config.dropout, rng);
        x = tape.add(x, attn_do);
        let normed = layer_norm(tape, nodes, &format!("enc.l{l}.ln2"), x);
        let ff = feed_forward(tape, nodes, &format!("enc.l{l}.ffn"), normed);
        let ff_do = dropout(tape, ff, config.dropout, rng);
        x = tape.add(x, ff_do);
    }
    Ok(layer_norm(tape, nodes, "enc.final", x))
}

/// Full teacher-forced pass: encoder, decoder, copy head, mixture.
/// `tgt_in_ids` is the shifted decoder input (SOS + target prefix).
pub fn build_forward(
    tape: &mut Tape,
    nodes: &ParamNodes,
    config: &ModelConfig,
    src_ids: &[usize],
    tgt_in_ids: &[usize],
    opts: ForwardOptions,
) -> Result<ForwardPass> {
    config.validate()?;
    check_ids(config, tgt_in_ids)?;
    let ForwardOptions {
        mut dropout_rng,
        gate_override,
        enable_copy,
    } = opts;

    let enc_out = build_encoder(tape, nodes, config, src_ids, &mut dropout_rng)?;

    let t_len = tgt_in_ids.len();
    let dec_input = embed(tape, nodes, config, tgt_in_ids);
    let mut x = dropout(tape, dec_input, config.dropout, &mut dropout_rng);
    let mask = causal_mask(tape, t_len);
    let mut cross_attn: Vec<Vec<NodeId>> = Vec::with_capacity(config.num_layers);
    for l in 0..config.num_layers {
        let normed = layer_norm(tape, nodes, &format!("dec.l{l}.ln1"), x);
        let self_attn = multi_head_attention(
            tape,
            nodes,
            config,
            &format!("dec.l{l}.self"),
            normed,
            normed,
            Some(mask),
        );
        let self_do = dropout(tape, self_attn.out, config.dropout, &mut dropout_rng);
        x = tape.add(x, self_do);

        let normed = layer_norm(tape, nodes, &format!("dec.l{l}.ln2"), x);
        let cross = multi_head_attention(
            tape,
            nodes,
            config,
            &format!("dec.l{l}.cross"),
            normed,
            enc_out,
            None,
        );
        cross_attn.push(cross.heads);
        let cross_do = dropout(tape, cross.out, config.dropout, &mut dropout_rng);
        x = tape.add(x, cross_do);

        let normed = layer_norm(tape, nodes, &format!("dec.l{l}.ln3"), x);
        let ff = feed_forward(tape, nodes, &format!("dec.l{l}.ffn"), normed);
        let ff_do = dropout(tape, ff, config.dropout, &mut dropout_rng);
        x = tape.add(x, ff_do);
    }
    let dec_states = layer_norm(tape, nodes, "dec.final", x);

    let (align_layer, align_head) = config.alignment_head;
    let align_attn = cross_attn[align_layer][align_head];

    // Context over raw encoder outputs, then the generation gate.
    let h_star = tape.matmul(align_attn, enc_out);
    let gh = tape.matmul(h_star, nodes.get("copy.wh"));
    let gs = tape.matmul(dec_states, nodes.get("copy.ws"));
    let gx = tape.matmul(dec_input, nodes.get("copy.wx"));
    let gsum = tape.add(gh, gs);
    let gsum = tape.add(gsum, gx);
    let gsum = tape.add_row(gsum, nodes.get("copy.b"));
    let p_gen = tape.sigmoid(gsum);

    let p_gen_used = match gate_override {
        Some(overrides) => {
            assert_eq!(overrides.len(), t_len, "gate override length");
            let keep: Vec<f64> = overrides
                .iter()
                .map(|o| if o.is_some() { 0.0 } else { 1.0 })
                .collect();
            let forced: Vec<f64> = overrides.iter().map(|o| o.unwrap_or(0.0)).collect();
            let keep = tape.constant(Tensor::column(&keep));
            let forced = tape.constant(Tensor::column(&forced));
            let kept = tape.mul(p_gen, keep);
            tape.add(kept, forced)
        }
        None => p_gen,
    };

    let logits = tape.matmul(dec_states, nodes.get("out.w"));
    let logits = tape.add_row(logits, nodes.get("out.b"));
    let p_vocab = tape.softmax_rows(logits);

    let mixed = if enable_copy {
        let copy_dist = tape.scatter_cols(align_attn, src_ids, config.vocab_size);
        let gen_part = tape.mul_col(p_vocab, p_gen_used);
        let one_minus = tape.affine(p_gen_used, -1.0, 1.0);
        let copy_part = tape.mul_col(copy_dist, one_minus);
        tape.add(gen_part, copy_part)
    } else {
        p_vocab
    };

    Ok(ForwardPass {
        enc_out,
        dec_states,
        dec_input,
        cross_attn,
        align_attn,
        h_star,
        p_gen,
        p_gen_used,
        p_vocab,
        mixed,
    })
}

/// Spec-surface encoder call: H as a plain tensor.
pub fn encode(params: &Parameters, config: &ModelConfig, src_ids: &[usize]) -> Result<Tensor> {
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let h = build_encoder(&mut tape, &nodes, config, src_ids, &mut None)?;
    Ok(tape.value(h).clone())
}

/// One inference step: run the prefix teacher-forced and report the last
/// step's distributions and gate.
#[derive(Debug, Clone)]
pub struct DecoderStep {
    pub state: Vec<f64>,
    pub input_embedding: Vec<f64>,
    /// All heads of the configured alignment layer, each a distribution
    /// over source positions.
    pub attention_heads: Vec<Vec<f64>>,
    /// Attention-weighted context from the alignment head.
    pub context: Vec<f64>,
    pub p_gen: f64,
    pub vocab_probs: Vec<f64>,
    pub mixed_probs: Vec<f64>,
}

pub fn decode_step(
    params: &Parameters,
    config: &ModelConfig,
    src_ids: &[usize],
    prefix_ids: &[usize],
    enable_copy: bool,
) -> Result<DecoderStep> {
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let fp = build_forward(
        &mut tape,
        &nodes,
        config,
        src_ids,
        prefix_ids,
        ForwardOptions {
            enable_copy,
            ..ForwardOptions::default()
        },
    )?;
    let last = prefix_ids.len() - 1;
    let (align_layer, _) = config.alignment_head;
    Ok(DecoderStep {
        state: tape.value(fp.dec_states).row(last).to_vec(),
        input_embedding: tape.value(fp.dec_input).row(last).to_vec(),
        attention_heads: fp.cross_attn[align_layer]
            .iter()
            .map(|&h| tape.value(h).row(last).to_vec())
            .collect(),
        context: tape.value(fp.h_star).row(last).to_vec(),
        p_gen: tape.value(fp.p_gen).get(last, 0),
        vocab_probs: tape.value(fp.p_vocab).row(last).to_vec(),
        mixed_probs: tape.value(fp.mixed).row(last).to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::init_parameters;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            num_layers: 1,
            num_heads: 2,
            d_model: 8,
            d_ff: 16,
            dropout: 0.0,
            vocab_size: 12,
            max_len: 32,
            alignment_head: (0, 0),
        }
    }

    #[test]
    fn encoder_shape_and_determinism() {
        let cfg = tiny_config();
        let params = init_parameters(&cfg, &mut ChaCha8Rng::seed_from_u64(3));
        let h1 = encode(&params, &cfg, &[4, 5, 6, 7, 8]).unwrap();
        let h2 = encode(&params, &cfg, &[4, 5, 6, 7, 8]).unwrap();
        assert_eq!(h1.rows, 5);
        assert_eq!(h1.cols, 8);
        assert_eq!(h1, h2);
    }

    #[test]
    fn attention_rows_sum_to_one_and_context_matches() {
        let cfg = tiny_config();
        let params = init_parameters(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let src = [4usize, 5, 6, 7];
        let step = decode_step(&params, &cfg, &src, &[2, 4, 5], true).unwrap();
        for head in &step.attention_heads {
            let s: f64 = head.iter().sum();
            assert!((s - 1.0).abs() < 1e-6, "attention row sums to {s}");
        }
        // h* must equal the attention-weighted sum of encoder rows.
        let h = encode(&params, &cfg, &src).unwrap();
        let attn = &step.attention_heads[cfg.alignment_head.1];
        for c in 0..cfg.d_model {
            let manual: f64 = (0..src.len()).map(|i| attn[i] * h.get(i, c)).sum();
            assert!((manual - step.context[c]).abs() < 1e-9);
        }
        assert!(step.p_gen > 0.0 && step.p_gen < 1.0);
        let mix_sum: f64 = step.mixed_probs.iter().sum();
        assert!((mix_sum - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_hot_attention_reproduces_encoder_row() {
        // Convexity identity: uniform attention over identical rows gives
        // back the row; verified through the pure mixture instead of
        // engineering degenerate weights.
        let rows = [
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
            vec![1.0, 2.0, 3.0],
        ];
        let attn = [1.0 / 3.0; 3];
        for c in 0..3 {
            let mixed: f64 = (0..3).map(|i| attn[i] * rows[i][c]).sum();
            assert!((mixed - rows[0][c]).abs() < 1e-12);
        }
    }

    #[test]
    fn copy_disabled_mixture_equals_vocab() {
        let cfg = tiny_config();
        let params = init_parameters(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let step = decode_step(&params, &cfg, &[4, 5, 6], &[2, 4], false).unwrap();
        for (a, b) in step.mixed_probs.iter().zip(&step.vocab_probs) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn length_and_id_errors() {
        let cfg = tiny_config();
        let params = init_parameters(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        assert!(matches!(
            encode(&params, &cfg, &[99]),
            Err(EngineError::UnknownId { id: 99, .. })
        ));
        let long: Vec<usize> = vec![4; 33];
        assert!(matches!(
            encode(&params, &cfg, &long),
            Err(EngineError::SequenceTooLong { .. })
        ));
    }
}
