//! The three training losses, both as plain-number reference functions and
//! as tape builders used by the optimizer. Probabilities inside logs are
//! clipped to [1e-7, 1-1e-7].

use crate::error::{EngineError, Result};
use crate::model::ForwardPass;
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;

pub const PROB_CLIP: f64 = 1e-7;

fn clipped_ln(p: f64) -> f64 {
    p.clamp(PROB_CLIP, 1.0 - PROB_CLIP).ln()
}

/// Generation gate: sigmoid(w_h·h* + w_s·s + w_x·x + b).
pub fn gen_prob(h_star: &[f64], s_t: &[f64], x_t: &[f64], w_h: &[f64], w_s: &[f64], w_x: &[f64], b: f64) -> f64 {
    let dot = |a: &[f64], w: &[f64]| a.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
    let z = dot(h_star, w_h) + dot(s_t, w_s) + dot(x_t, w_x) + b;
    1.0 / (1.0 + (-z).exp())
}

/// Mixture of the vocabulary distribution and attention-aggregated copying:
/// P(w) = p_gen·P_vocab(w) + (1-p_gen)·Σ_{i: src_i = w} a_i.
pub fn mix_distribution(
    p_vocab: &[f64],
    attention: &[f64],
    p_gen: f64,
    src_vocab_ids: &[usize],
) -> Vec<f64> {
    assert_eq!(attention.len(), src_vocab_ids.len(), "attention/source length");
    let mut out: Vec<f64> = p_vocab.iter().map(|&p| p_gen * p).collect();
    for (&a, &id) in attention.iter().zip(src_vocab_ids) {
        out[id] += (1.0 - p_gen) * a;
    }
    out
}

/// Mean token cross-entropy of the mixed distributions against targets.
pub fn lm_loss(mixed: &[Vec<f64>], targets: &[usize]) -> Result<f64> {
    if mixed.len() != targets.len() {
        return Err(EngineError::LengthMismatch {
            left: mixed.len(),
            right: targets.len(),
        });
    }
    let total: f64 = mixed
        .iter()
        .zip(targets)
        .map(|(row, &t)| -clipped_ln(row[t]))
        .sum();
    Ok(total / targets.len().max(1) as f64)
}

/// R-Drop form: average cross-entropy of two passes plus alpha times the
/// per-token mean symmetric KL between their distributions.
pub fn rdrop_lm_loss(
    mixed_a: &[Vec<f64>],
    mixed_b: &[Vec<f64>],
    targets: &[usize],
    alpha: f64,
) -> Result<f64> {
    if mixed_a.len() != mixed_b.len() {
        return Err(EngineError::LengthMismatch {
            left: mixed_a.len(),
            right: mixed_b.len(),
        });
    }
    let ce = 0.5 * (lm_loss(mixed_a, targets)? + lm_loss(mixed_b, targets)?);
    let mut kl = 0.0;
    for (pa, pb) in mixed_a.iter().zip(mixed_b) {
        for (&a, &b) in pa.iter().zip(pb) {
            kl += 0.5 * a * (clipped_ln(a) - clipped_ln(b));
            kl += 0.5 * b * (clipped_ln(b) - clipped_ln(a));
        }
    }
    Ok(ce + alpha * kl / targets.len().max(1) as f64)
}

/// Binary cross-entropy of the gate against copy labels, summed over steps:
/// -Σ_t [y_t ln p_gen + (1-y_t) ln(1-p_gen)].
pub fn copy_index_loss(p_gen: &[f64], labels: &[u8]) -> Result<f64> {
    if p_gen.len() != labels.len() {
        return Err(EngineError::LengthMismatch {
            left: p_gen.len(),
            right: labels.len(),
        });
    }
    Ok(p_gen
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            -(f64::from(y) * clipped_ln(p) + (1.0 - f64::from(y)) * clipped_ln(1.0 - p))
        })
        .sum())
}

/// Cellwise binary cross-entropy of attention rows against the smoothed
/// alignment, averaged over steps:
/// -(1/T)·Σ_t Σ_j [S̃_tj ln a_j + (1-S̃_tj) ln(1-a_j)].
pub fn alignment_loss(attention: &[Vec<f64>], smoothed: &[Vec<f64>]) -> Result<f64> {
    if attention.len() != smoothed.len()
        || attention
            .iter()
            .zip(smoothed)
            .any(|(a, s)| a.len() != s.len())
    {
        return Err(EngineError::ShapeMismatch(format!(
            "attention {}rows vs alignment {}rows",
            attention.len(),
            smoothed.len()
        )));
    }
    let t = attention.len().max(1) as f64;
    let mut total = 0.0;
    for (arow, srow) in attention.iter().zip(smoothed) {
        for (&a, &s) in arow.iter().zip(srow) {
            total -= s * clipped_ln(a) + (1.0 - s) * clipped_ln(1.0 - a);
        }
    }
    Ok(total / t)
}

/// Per-term values of one loss evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    pub lm: f64,
    pub sa: f64,
    pub ci: f64,
    pub total: f64,
}

/// Weights/switches the loss graph needs; a view over TrainingConfig.
#[derive(Debug, Clone, Copy)]
pub struct LossWeights {
    pub lambda_sa: f64,
    pub lambda_ci: f64,
    pub enable_sa: bool,
    pub enable_ci: bool,
}

pub struct LossNodes {
    pub lm: NodeId,
    pub sa: Option<NodeId>,
    pub ci: Option<NodeId>,
    pub total: NodeId,
}

/// One-hot rows for the target ids.
fn one_hot(targets: &[usize], vocab: usize) -> Tensor {
    let mut t = Tensor::zeros(targets.len(), vocab);
    for (r, &id) in targets.iter().enumerate() {
        t.set(r, id, 1.0);
    }
    t
}

/// Tape version of the language-model loss: mean -ln mixed[target].
pub fn lm_loss_node(tape: &mut Tape, mixed: NodeId, targets: &[usize]) -> NodeId {
    let vocab = tape.value(mixed).cols;
    let t = targets.len().max(1) as f64;
    let hot = tape.constant(one_hot(targets, vocab));
    let logp = tape.log_clip(mixed, PROB_CLIP);
    let picked = tape.mul(hot, logp);
    let sum = tape.sum_all(picked);
    tape.affine(sum, -1.0 / t, 0.0)
}

/// Tape version of the symmetric-KL regularizer between two mixtures.
pub fn rdrop_kl_node(tape: &mut Tape, mixed_a: NodeId, mixed_b: NodeId, steps: usize) -> NodeId {
    let la = tape.log_clip(mixed_a, PROB_CLIP);
    let lb = tape.log_clip(mixed_b, PROB_CLIP);
    let diff_ab = tape.sub(la, lb);
    let term_a = tape.mul(mixed_a, diff_ab);
    let diff_ba = tape.sub(lb, la);
    let term_b = tape.mul(mixed_b, diff_ba);
    let sum_a = tape.sum_all(term_a);
    let sum_b = tape.sum_all(term_b);
    let total = tape.add(sum_a, sum_b);
    tape.affine(total, 0.5 / steps.max(1) as f64, 0.0)
}

/// Tape version of the copy-index loss over the raw gate.
pub fn copy_index_loss_node(tape: &mut Tape, p_gen: NodeId, labels: &[u8]) -> NodeId {
    let y: Vec<f64> = labels.iter().map(|&v| f64::from(v)).collect();
    let y_node = tape.constant(Tensor::column(&y));
    let inv_y: Vec<f64> = labels.iter().map(|&v| 1.0 - f64::from(v)).collect();
    let inv_y_node = tape.constant(Tensor::column(&inv_y));
    let logp = tape.log_clip(p_gen, PROB_CLIP);
    let one_minus = tape.affine(p_gen, -1.0, 1.0);
    let log1m = tape.log_clip(one_minus, PROB_CLIP);
    let a = tape.mul(y_node, logp);
    let b = tape.mul(inv_y_node, log1m);
    let s = tape.add(a, b);
    let sum = tape.sum_all(s);
    tape.affine(sum, -1.0, 0.0)
}

/// Tape version of the alignment loss against an already-smoothed target.
pub fn alignment_loss_node(tape: &mut Tape, attention: NodeId, smoothed: Tensor) -> NodeId {
    let t = tape.value(attention).rows.max(1) as f64;
    let inv: Vec<f64> = smoothed.data.iter().map(|&s| 1.0 - s).collect();
    let inv_t = Tensor::from_vec(smoothed.rows, smoothed.cols, inv);
    let s_node = tape.constant(smoothed);
    let inv_node = tape.constant(inv_t);
    let loga = tape.log_clip(attention, PROB_CLIP);
    let one_minus = tape.affine(attention, -1.0, 1.0);
    let log1m = tape.log_clip(one_minus, PROB_CLIP);
    let a = tape.mul(s_node, loga);
    let b = tape.mul(inv_node, log1m);
    let s = tape.add(a, b);
    let sum = tape.sum_all(s);
    tape.affine(sum, -1.0 / t, 0.0)
}

/// Assemble the composite objective for one pass.
pub fn build_losses(
    tape: &mut Tape,
    fp: &ForwardPass,
    targets: &[usize],
    smoothed_sam: Tensor,
    copy_labels: &[u8],
    weights: LossWeights,
) -> LossNodes {
    let lm = lm_loss_node(tape, fp.mixed, targets);
    let sa = weights
        .enable_sa
        .then(|| alignment_loss_node(tape, fp.align_attn, smoothed_sam));
    let ci = weights
        .enable_ci
        .then(|| copy_index_loss_node(tape, fp.p_gen, copy_labels));
    let mut total = lm;
    if let Some(sa) = sa {
        let w = tape.affine(sa, weights.lambda_sa, 0.0);
        total = tape.add(total, w);
    }
    if let Some(ci) = ci {
        let w = tape.affine(ci, weights.lambda_ci, 0.0);
        total = tape.add(total, w);
    }
    LossNodes { lm, sa, ci, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gen_prob_zero_weights_is_half() {
        let z = vec![0.0; 4];
        assert_eq!(gen_prob(&[1.0; 4], &[2.0; 4], &[3.0; 4], &z, &z, &z, 0.0), 0.5);
    }

    #[test]
    fn gen_prob_saturates_with_bias() {
        let z = vec![0.0; 4];
        let p = gen_prob(&[0.0; 4], &[0.0; 4], &[0.0; 4], &z, &z, &z, 40.0);
        assert!(p > 1.0 - 1e-12);
    }

    #[test]
    fn gen_prob_matches_scalar_recomputation() {
        let h = [0.3, -0.5, 0.2, 0.9];
        let s = [-0.1, 0.4, 0.7, -0.8];
        let x = [0.6, 0.1, -0.2, 0.5];
        let wh = [0.2, 0.3, -0.4, 0.1];
        let ws = [-0.5, 0.2, 0.6, 0.3];
        let wx = [0.7, -0.6, 0.1, 0.2];
        let b = 0.25;
        let mut z: f64 = b;
        for k in 0..4 {
            z += h[k] * wh[k] + s[k] * ws[k] + x[k] * wx[k];
        }
        let expected = 1.0 / (1.0 + (-z).exp());
        assert_relative_eq!(
            gen_prob(&h, &s, &x, &wh, &ws, &wx, b),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mixture_limits() {
        let p_vocab = vec![0.25, 0.25, 0.25, 0.25];
        let attn = vec![0.5, 0.3, 0.2];
        let src = vec![0usize, 0, 1];
        let pure_gen = mix_distribution(&p_vocab, &attn, 1.0, &src);
        assert_eq!(pure_gen, p_vocab);

        // p_gen = 0, source tokens [C, C, O] with ids [0, 0, 1].
        let pure_copy = mix_distribution(&p_vocab, &attn, 0.0, &src);
        assert_relative_eq!(pure_copy[0], 0.8, max_relative = 1e-12);
        assert_relative_eq!(pure_copy[1], 0.2, max_relative = 1e-12);
        assert_eq!(pure_copy[2], 0.0);
        assert_eq!(pure_copy[3], 0.0);
    }

    #[test]
    fn mixture_half_and_half() {
        // Degenerate vocab one-hot on id 1 ("O"), source [C, C, O].
        let p_vocab = vec![0.0, 1.0, 0.0];
        let attn = vec![0.5, 0.3, 0.2];
        let src = vec![0usize, 0, 1];
        let mix = mix_distribution(&p_vocab, &attn, 0.5, &src);
        assert_relative_eq!(mix[1], 0.6, max_relative = 1e-12);
        assert_relative_eq!(mix[0], 0.4, max_relative = 1e-12);
        let sum: f64 = mix.iter().sum();
        assert_relative_eq!(sum, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn lm_loss_cases() {
        // Exact one-hot on targets: zero (up to clipping).
        let probs = vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]];
        let loss = lm_loss(&probs, &[1, 0]).unwrap();
        assert!(loss.abs() < 1e-6);

        // Uniform over V classes: ln V per token.
        let v = 7usize;
        let probs = vec![vec![1.0 / v as f64; v]; 3];
        let loss = lm_loss(&probs, &[0, 3, 6]).unwrap();
        assert_relative_eq!(loss, (v as f64).ln(), max_relative = 1e-9);

        assert!(matches!(
            lm_loss(&probs, &[0]),
            Err(EngineError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rdrop_identical_passes_reduce_to_ce() {
        let probs = vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.8, 0.1]];
        let plain = lm_loss(&probs, &[0, 1]).unwrap();
        let rd = rdrop_lm_loss(&probs, &probs, &[0, 1], 0.7).unwrap();
        assert_relative_eq!(rd, plain, max_relative = 1e-12);
    }

    #[test]
    fn copy_index_loss_cases() {
        // Perfect agreement (clipped): near zero.
        let loss = copy_index_loss(&[1.0 - 1e-9, 1e-9], &[1, 0]).unwrap();
        assert!(loss < 1e-6);

        // Coin gate: T ln 2.
        let loss = copy_index_loss(&[0.5; 5], &[1, 0, 1, 0, 1]).unwrap();
        assert_relative_eq!(loss, 5.0 * 2f64.ln(), max_relative = 1e-12);

        // Hand arithmetic: y=[1,0], p=[0.9,0.2] -> -(ln 0.9 + ln 0.8).
        let loss = copy_index_loss(&[0.9, 0.2], &[1, 0]).unwrap();
        assert_relative_eq!(loss, -(0.9f64.ln() + 0.8f64.ln()), max_relative = 1e-12);
    }

    #[test]
    fn alignment_loss_cases() {
        // Perfect match: per-cell binary entropy of the attention itself.
        let a = vec![vec![0.3, 0.7]];
        let loss = alignment_loss(&a, &a).unwrap();
        let expected = -(0.3 * 0.3f64.ln()
            + 0.7 * 0.7f64.ln()
            + 0.7 * 0.7f64.ln()
            + 0.3 * 0.3f64.ln());
        assert_relative_eq!(loss, expected, max_relative = 1e-12);

        // T=1, |P|=2, a=[0.5,0.5], S̃=[0.91,0.01]: every term is ln 2.
        let a = vec![vec![0.5, 0.5]];
        let s = vec![vec![0.91, 0.01]];
        let loss = alignment_loss(&a, &s).unwrap();
        assert_relative_eq!(loss, 2.0 * 2f64.ln(), max_relative = 1e-12);

        // Duplicating identical rows leaves the mean unchanged.
        let a2 = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let s2 = vec![vec![0.91, 0.01], vec![0.91, 0.01]];
        assert_relative_eq!(
            alignment_loss(&a2, &s2).unwrap(),
            loss,
            max_relative = 1e-12
        );

        assert!(alignment_loss(&a, &vec![vec![0.1; 3]]).is_err());
    }
}
