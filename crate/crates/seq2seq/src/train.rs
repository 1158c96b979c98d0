//! Deterministic single-threaded training loop. Token inputs are always
//! teacher-forced; the copy gate is additionally hard-substituted with its
//! label with probability tau(epoch), annealed linearly from 1.0 to 0.1 over
//! the first half of training.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adam::Adam;
use crate::config::{teacher_forcing_tau, ModelConfig, TrainingConfig};
use crate::error::{EngineError, Result};
use crate::loss::{
    build_losses, lm_loss_node, rdrop_kl_node, LossBreakdown, LossNodes, LossWeights,
};
use crate::model::{build_forward, insert_params, ForwardOptions};
use crate::params::{init_parameters, Parameters};
use crate::tape::Tape;
use crate::tensor::Tensor;

/// One training pair, already tokenized to ids. `sam` is the binary
/// alignment over (target step, source position) before the EOS row is
/// appended; `copy_y` are its per-row labels (1 = generate).
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub src_ids: Vec<usize>,
    pub tgt_ids: Vec<usize>,
    pub sam: Vec<f64>,
    pub copy_y: Vec<u8>,
}

impl TrainExample {
    pub fn validate(&self, sos: usize, eos: usize, config: &ModelConfig) -> Result<()> {
        let _ = (sos, eos);
        if self.sam.len() != self.tgt_ids.len() * self.src_ids.len() {
            return Err(EngineError::ShapeMismatch(format!(
                "sam has {} cells for {}x{}",
                self.sam.len(),
                self.tgt_ids.len(),
                self.src_ids.len()
            )));
        }
        if self.copy_y.len() != self.tgt_ids.len() {
            return Err(EngineError::LengthMismatch {
                left: self.copy_y.len(),
                right: self.tgt_ids.len(),
            });
        }
        crate::model::check_ids(config, &self.src_ids)?;
        crate::model::check_ids(config, &self.tgt_ids)?;
        Ok(())
    }
}

/// Supplies the example list for each epoch (fresh augmentation per epoch
/// happens behind this trait; a plain Vec returns itself unchanged).
pub trait EpochSource {
    fn examples(&mut self, epoch: usize) -> Vec<TrainExample>;
}

impl EpochSource for Vec<TrainExample> {
    fn examples(&mut self, _epoch: usize) -> Vec<TrainExample> {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lm: f64,
    pub sa: f64,
    pub ci: f64,
    pub total: f64,
    pub tf_tau: f64,
    pub token_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: Parameters,
    pub metrics: Vec<EpochMetrics>,
}

/// Ids the engine needs from the vocabulary.
#[derive(Debug, Clone, Copy)]
pub struct SpecialIds {
    pub sos: usize,
    pub eos: usize,
}

/// Extend the per-example supervision with the EOS step: decoder input is
/// SOS + target, output is target + EOS, the alignment gets an all-zero EOS
/// row (generated, never copied).
pub struct PreparedExample {
    pub src_ids: Vec<usize>,
    pub dec_in: Vec<usize>,
    pub dec_out: Vec<usize>,
    pub smoothed_sam: Tensor,
    pub copy_y: Vec<u8>,
}

pub fn prepare_example(ex: &TrainExample, ids: SpecialIds, epsilon_smooth: f64) -> PreparedExample {
    let s_len = ex.src_ids.len();
    let t_len = ex.tgt_ids.len() + 1;
    let mut dec_in = Vec::with_capacity(t_len);
    dec_in.push(ids.sos);
    dec_in.extend_from_slice(&ex.tgt_ids);
    let mut dec_out = ex.tgt_ids.clone();
    dec_out.push(ids.eos);

    let uniform = if s_len > 0 { 1.0 / s_len as f64 } else { 0.0 };
    let mut smoothed = Tensor::zeros(t_len, s_len);
    for r in 0..t_len {
        for c in 0..s_len {
            let cell = if r < ex.tgt_ids.len() {
                ex.sam[r * s_len + c]
            } else {
                0.0
            };
            smoothed.set(r, c, (1.0 - epsilon_smooth) * cell + epsilon_smooth * uniform);
        }
    }
    let mut copy_y = ex.copy_y.clone();
    copy_y.push(1);

    PreparedExample {
        src_ids: ex.src_ids.clone(),
        dec_in,
        dec_out,
        smoothed_sam: smoothed,
        copy_y,
    }
}

fn loss_weights(tc: &TrainingConfig) -> LossWeights {
    LossWeights {
        lambda_sa: tc.lambda_sa,
        lambda_ci: tc.lambda_ci,
        enable_sa: tc.enable_sa,
        enable_ci: tc.enable_ci,
    }
}

/// Clean (no dropout, no gate substitution) loss evaluation of one example.
pub fn evaluate_losses(
    params: &Parameters,
    config: &ModelConfig,
    tc: &TrainingConfig,
    ids: SpecialIds,
    ex: &TrainExample,
) -> Result<(LossBreakdown, usize, usize)> {
    let prep = prepare_example(ex, ids, tc.epsilon_smooth);
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let fp = build_forward(
        &mut tape,
        &nodes,
        config,
        &prep.src_ids,
        &prep.dec_in,
        ForwardOptions {
            enable_copy: tc.enable_copy,
            ..ForwardOptions::default()
        },
    )?;
    let losses = build_losses(
        &mut tape,
        &fp,
        &prep.dec_out,
        prep.smoothed_sam.clone(),
        &prep.copy_y,
        loss_weights(tc),
    );
    let breakdown = LossBreakdown {
        lm: tape.value(losses.lm).item(),
        sa: losses.sa.map(|n| tape.value(n).item()).unwrap_or(0.0),
        ci: losses.ci.map(|n| tape.value(n).item()).unwrap_or(0.0),
        total: tape.value(losses.total).item(),
    };
    let mixed = tape.value(fp.mixed);
    let mut correct = 0;
    for (r, &gold) in prep.dec_out.iter().enumerate() {
        let row = mixed.row(r);
        let argmax = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probs"))
            .map(|(i, _)| i)
            .expect("non-empty row");
        if argmax == gold {
            correct += 1;
        }
    }
    Ok((breakdown, correct, prep.dec_out.len()))
}

/// Mean gate value over the non-EOS steps of one example, teacher-forced.
pub fn gate_values(
    params: &Parameters,
    config: &ModelConfig,
    enable_copy: bool,
    ids: SpecialIds,
    ex: &TrainExample,
) -> Result<Vec<f64>> {
    let prep = prepare_example(ex, ids, 0.0);
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let fp = build_forward(
        &mut tape,
        &nodes,
        config,
        &prep.src_ids,
        &prep.dec_in,
        ForwardOptions {
            enable_copy,
            ..ForwardOptions::default()
        },
    )?;
    let pg = tape.value(fp.p_gen);
    Ok((0..ex.tgt_ids.len()).map(|r| pg.get(r, 0)).collect())
}

/// Teacher-forced attention rows of the supervised head (T×|P|), EOS row
/// included.
pub fn alignment_attention(
    params: &Parameters,
    config: &ModelConfig,
    ids: SpecialIds,
    ex: &TrainExample,
) -> Result<Vec<Vec<f64>>> {
    let prep = prepare_example(ex, ids, 0.0);
    let mut tape = Tape::new();
    let nodes = insert_params(&mut tape, params);
    let fp = build_forward(
        &mut tape,
        &nodes,
        config,
        &prep.src_ids,
        &prep.dec_in,
        ForwardOptions::default(),
    )?;
    let attn = tape.value(fp.align_attn);
    Ok((0..attn.rows).map(|r| attn.row(r).to_vec()).collect())
}

fn backward_into(
    tape: &Tape,
    nodes: &crate::model::ParamNodes,
    total: crate::tape::NodeId,
    scale: f64,
    acc: &mut BTreeMap<String, Tensor>,
) {
    let grads = tape.backward(total);
    for (name, &node) in &nodes.map {
        if let Some(g) = &grads[node] {
            let entry = acc
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(g.rows, g.cols));
            for (a, b) in entry.data.iter_mut().zip(&g.data) {
                *a += b * scale;
            }
        }
    }
}

fn build_training_pass(
    tape: &mut Tape,
    nodes: &crate::model::ParamNodes,
    config: &ModelConfig,
    tc: &TrainingConfig,
    prep: &PreparedExample,
    tau: f64,
    rng: &mut ChaCha8Rng,
) -> Result<LossNodes> {
    // Per-step Bernoulli(tau) hard gate substitution.
    let overrides: Vec<Option<f64>> = prep
        .copy_y
        .iter()
        .map(|&y| {
            if rng.gen_bool(tau.clamp(0.0, 1.0)) {
                Some(f64::from(y))
            } else {
                None
            }
        })
        .collect();

    let use_dropout = config.dropout > 0.0;
    let fp = {
        let opts = ForwardOptions {
            dropout_rng: if use_dropout {
                Some(rng as &mut dyn rand::RngCore)
            } else {
                None
            },
            gate_override: Some(&overrides),
            enable_copy: tc.enable_copy,
        };
        build_forward(tape, nodes, config, &prep.src_ids, &prep.dec_in, opts)?
    };

    let mut losses = build_losses(
        tape,
        &fp,
        &prep.dec_out,
        prep.smoothed_sam.clone(),
        &prep.copy_y,
        loss_weights(tc),
    );

    if tc.rdrop_enabled {
        // Second stochastic pass sharing the same parameter leaves; the LM
        // term becomes the average CE plus the symmetric KL.
        let fp2 = {
            let opts = ForwardOptions {
                dropout_rng: if use_dropout {
                    Some(rng as &mut dyn rand::RngCore)
                } else {
                    None
                },
                gate_override: Some(&overrides),
                enable_copy: tc.enable_copy,
            };
            build_forward(tape, nodes, config, &prep.src_ids, &prep.dec_in, opts)?
        };
        let lm2 = lm_loss_node(tape, fp2.mixed, &prep.dec_out);
        let ce_sum = tape.add(losses.lm, lm2);
        let ce_avg = tape.affine(ce_sum, 0.5, 0.0);
        let kl = rdrop_kl_node(tape, fp.mixed, fp2.mixed, prep.dec_out.len());
        let kl_w = tape.affine(kl, tc.rdrop_alpha, 0.0);
        let lm_rdrop = tape.add(ce_avg, kl_w);

        let mut total = lm_rdrop;
        if let Some(sa) = losses.sa {
            let w = tape.affine(sa, tc.lambda_sa, 0.0);
            total = tape.add(total, w);
        }
        if let Some(ci) = losses.ci {
            let w = tape.affine(ci, tc.lambda_ci, 0.0);
            total = tape.add(total, w);
        }
        losses = LossNodes {
            lm: lm_rdrop,
            sa: losses.sa,
            ci: losses.ci,
            total,
        };
    }

    Ok(losses)
}

/// Train from scratch. Deterministic for a fixed seed: parameter init, the
/// example shuffle, gate substitution, and dropout all draw from one seeded
/// stream.
pub fn train(
    source: &mut dyn EpochSource,
    config: &ModelConfig,
    tc: &TrainingConfig,
    ids: SpecialIds,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut params = init_parameters(config, &mut rng);
    let mut adam = Adam::new(tc.learning_rate, tc.beta1, tc.beta2, tc.adam_eps);
    let mut metrics = Vec::with_capacity(tc.epochs);

    for epoch in 0..tc.epochs {
        let examples = source.examples(epoch);
        if examples.is_empty() {
            return Err(EngineError::EmptyDataset);
        }
        for ex in &examples {
            ex.validate(ids.sos, ids.eos, config)?;
        }
        let tau = teacher_forcing_tau(epoch, tc.epochs);

        let mut order: Vec<usize> = (0..examples.len()).collect();
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }

        for batch in order.chunks(tc.batch_size.max(1)) {
            let mut grad_acc: BTreeMap<String, Tensor> = BTreeMap::new();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_total = 0.0;
            for &idx in batch {
                let prep = prepare_example(&examples[idx], ids, tc.epsilon_smooth);
                let mut tape = Tape::new();
                let nodes = insert_params(&mut tape, &params);
                let losses =
                    build_training_pass(&mut tape, &nodes, config, tc, &prep, tau, &mut rng)?;
                batch_total += tape.value(losses.total).item();
                backward_into(&tape, &nodes, losses.total, scale, &mut grad_acc);
            }
            if !batch_total.is_finite() {
                return Err(EngineError::DivergedLoss { epoch });
            }
            adam.step(&mut params, &grad_acc);
        }
        if params.has_nan() {
            return Err(EngineError::DivergedLoss { epoch });
        }

        // Clean evaluation pass for the metrics row.
        let mut sums = LossBreakdown::default();
        let mut correct = 0usize;
        let mut tokens = 0usize;
        for ex in &examples {
            let (b, c, t) = evaluate_losses(&params, config, tc, ids, ex)?;
            sums.lm += b.lm;
            sums.sa += b.sa;
            sums.ci += b.ci;
            sums.total += b.total;
            correct += c;
            tokens += t;
        }
        let n = examples.len() as f64;
        metrics.push(EpochMetrics {
            epoch,
            lm: sums.lm / n,
            sa: sums.sa / n,
            ci: sums.ci / n,
            total: sums.total / n,
            tf_tau: tau,
            token_acc: correct as f64 / tokens.max(1) as f64,
        });
    }

    Ok(TrainOutcome { params, metrics })
}
