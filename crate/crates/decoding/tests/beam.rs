//! Beam-search contracts on a small randomly initialized model: degeneracy
//! to greedy, score ordering, dedup, and beam monotonicity.

use csmiles::build_vocab;
use decoding::{beam_search, greedy_decode, BeamConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seq2seq::{init_parameters, ModelConfig};

fn setup() -> (seq2seq::Parameters, ModelConfig, csmiles::Vocabulary) {
    let corpus: Vec<Vec<String>> = vec![
        ["C", "C", "O", "(", ")", "=", "N", "&", "1"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    ];
    let vocab = build_vocab(corpus).unwrap();
    let config = ModelConfig {
        num_layers: 1,
        num_heads: 2,
        d_model: 16,
        d_ff: 24,
        dropout: 0.0,
        vocab_size: vocab.len(),
        max_len: 24,
        alignment_head: (0, 0),
    };
    let params = init_parameters(&config, &mut ChaCha8Rng::seed_from_u64(2024));
    (params, config, vocab)
}

#[test]
fn beam_one_equals_greedy() {
    let (params, config, vocab) = setup();
    let src = vocab.encode_texts(&["C", "C", "O"]);
    let beam = BeamConfig {
        beam_size: 1,
        max_len: 12,
        ..BeamConfig::default()
    };
    let greedy = greedy_decode(&params, &config, &vocab, &src, &beam)
        .unwrap()
        .expect("one candidate");
    let set = beam_search(&params, &config, &vocab, &src, &beam).unwrap();
    assert_eq!(set.candidates.len(), 1);
    assert_eq!(set.candidates[0].ids, greedy.ids);
    assert_eq!(set.candidates[0].score, greedy.score);
}

#[test]
fn scores_are_non_increasing_and_capped() {
    let (params, config, vocab) = setup();
    let src = vocab.encode_texts(&["C", "O", "N"]);
    let beam = BeamConfig {
        beam_size: 10,
        max_len: 12,
        ..BeamConfig::default()
    };
    let set = beam_search(&params, &config, &vocab, &src, &beam).unwrap();
    assert!(!set.candidates.is_empty());
    assert!(set.candidates.len() <= 10);
    for w in set.candidates.windows(2) {
        assert!(w[0].score >= w[1].score);
    }
}

#[test]
fn no_two_candidates_share_a_canonical_form() {
    let (params, config, vocab) = setup();
    let src = vocab.encode_texts(&["C", "C", "N"]);
    let beam = BeamConfig {
        beam_size: 10,
        max_len: 10,
        ..BeamConfig::default()
    };
    let set = beam_search(&params, &config, &vocab, &src, &beam).unwrap();
    let keys: Vec<&str> = set.candidates.iter().map(|c| c.key()).collect();
    let mut deduped = keys.clone();
    deduped.sort_unstable();
    deduped.dedup();
    assert_eq!(deduped.len(), keys.len(), "duplicate canonical forms: {keys:?}");
}

#[test]
fn larger_beams_never_lose_the_best_score() {
    let (params, config, vocab) = setup();
    let src = vocab.encode_texts(&["O", "C", "C"]);
    let mut best_scores = Vec::new();
    for beam_size in [1usize, 2, 4, 8] {
        let beam = BeamConfig {
            beam_size,
            max_len: 10,
            ..BeamConfig::default()
        };
        let set = beam_search(&params, &config, &vocab, &src, &beam).unwrap();
        best_scores.push(set.best().expect("candidates").score);
    }
    for w in best_scores.windows(2) {
        assert!(
            w[1] >= w[0] - 1e-12,
            "best score dropped when widening the beam: {best_scores:?}"
        );
    }
}

#[test]
fn copy_threshold_bounds() {
    let (params, config, vocab) = setup();
    let src = vocab.encode_texts(&["C", "C"]);
    for (threshold, expect_all) in [(1.0, false), (-0.1, true)] {
        let beam = BeamConfig {
            beam_size: 2,
            max_len: 8,
            copy_threshold: threshold,
            ..BeamConfig::default()
        };
        let set = beam_search(&params, &config, &vocab, &src, &beam).unwrap();
        for cand in &set.candidates {
            if expect_all {
                assert!((cand.copied_fraction - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(cand.copied_fraction, 0.0);
            }
        }
    }
}
