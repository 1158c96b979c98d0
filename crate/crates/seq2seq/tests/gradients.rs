//! Finite-difference verification of every parameter gradient on a tiny
//! model, per loss term and combined.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seq2seq::gradcheck::{grad_check, LossTerm};
use seq2seq::{init_parameters, ModelConfig, SpecialIds, TrainExample, TrainingConfig};

fn tiny_setup() -> (ModelConfig, TrainingConfig, TrainExample, SpecialIds) {
    let config = ModelConfig {
        num_layers: 1,
        num_heads: 2,
        d_model: 8,
        d_ff: 12,
        dropout: 0.0,
        vocab_size: 10,
        max_len: 16,
        alignment_head: (0, 1),
    };
    let tc = TrainingConfig {
        lambda_sa: 0.1,
        lambda_ci: 0.1,
        ..TrainingConfig::default()
    };
    // src: 4 tokens, tgt: 3 tokens; one aligned row, two generated.
    let mut sam = vec![0.0; 3 * 4];
    sam[2] = 1.0; // tgt step 0 copies src position 2
    let ex = TrainExample {
        src_ids: vec![4, 5, 6, 7],
        tgt_ids: vec![6, 8, 9],
        sam,
        copy_y: vec![0, 1, 1],
    };
    (config, tc, ex, SpecialIds { sos: 2, eos: 3 })
}

#[test]
fn each_loss_term_matches_finite_differences() {
    let (config, tc, ex, ids) = tiny_setup();
    let params = init_parameters(&config, &mut ChaCha8Rng::seed_from_u64(77));
    for term in [LossTerm::Lm, LossTerm::Sa, LossTerm::Ci, LossTerm::Total] {
        let report = grad_check(&params, &config, &tc, ids, &ex, term, None, 1e-4, 1e-3)
            .unwrap_or_else(|e| panic!("{term:?}: {e}"));
        assert!(
            report.worst() < 1e-3,
            "{term:?} worst relative error {}",
            report.worst()
        );
    }
}

#[test]
fn copy_head_bias_gradient_closed_form() {
    // With the gate at p and label y, dL_CI/db accumulates (p - y) per step.
    let (config, tc, ex, ids) = tiny_setup();
    let params = init_parameters(&config, &mut ChaCha8Rng::seed_from_u64(3));

    let gates = seq2seq::gate_values(&params, &config, true, ids, &ex).unwrap();
    let report = grad_check(
        &params,
        &config,
        &tc,
        ids,
        &ex,
        LossTerm::Ci,
        Some(&["copy.b"]),
        1e-4,
        1e-3,
    )
    .unwrap();
    assert_eq!(report.entries.len(), 1);
    assert!(report.worst() < 1e-3);
    // The sigmoid keeps every gate strictly inside (0, 1).
    for g in gates {
        assert!(g > 0.0 && g < 1.0);
    }
}

#[test]
fn copy_disabled_still_differentiates() {
    let (config, mut tc, ex, ids) = tiny_setup();
    tc.enable_copy = false;
    let params = init_parameters(&config, &mut ChaCha8Rng::seed_from_u64(11));
    let report = grad_check(
        &params,
        &config,
        &tc,
        ids,
        &ex,
        LossTerm::Total,
        Some(&["embed.tok", "out.w", "copy.b"]),
        1e-4,
        1e-3,
    )
    .unwrap();
    assert!(report.worst() < 1e-3);
}
