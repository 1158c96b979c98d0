//! Length-synchronous beam search over the mixed distribution, with
//! per-step gate traces for copy reporting.

use csmiles::{tokens_from_line, Vocabulary, EOS, PAD, SOS};
use seq2seq::{decode_step, ModelConfig, Parameters};
use smiles_core::{check_valence, parse_smiles, strip_atom_maps};

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct BeamConfig {
    pub beam_size: usize,
    pub max_len: usize,
    /// Score = log_prob / len^exponent; 0 keeps the pure sum.
    pub length_exponent: f64,
    /// A step counts as copied when (1 - p_gen) exceeds this.
    pub copy_threshold: f64,
    pub enable_copy: bool,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            beam_size: 10,
            max_len: 128,
            length_exponent: 0.0,
            copy_threshold: 0.7,
            enable_copy: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Hypothesis {
    /// Generated ids, EOS included once finished.
    pub ids: Vec<usize>,
    pub log_prob: f64,
    pub p_gen_trace: Vec<f64>,
    /// Argmax source position of the copy head at each step.
    pub argmax_source: Vec<usize>,
    pub finished: bool,
}

impl Hypothesis {
    fn score(&self, exponent: f64) -> f64 {
        if exponent == 0.0 {
            self.log_prob
        } else {
            self.log_prob / (self.ids.len().max(1) as f64).powf(exponent)
        }
    }
}

/// One ranked, deduplicated prediction.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub ids: Vec<usize>,
    pub score: f64,
    pub smiles: String,
    pub valid: bool,
    /// Canonical form (maps stripped) when the string parses.
    pub canonical: Option<String>,
    pub p_gen_trace: Vec<f64>,
    pub copied_fraction: f64,
    pub finished: bool,
}

impl Candidate {
    /// Rebuild a candidate from an already-decoded SMILES string (used when
    /// re-reading prediction files).
    pub fn from_smiles(smiles: &str, score: f64) -> Candidate {
        let (valid, canonical) = classify_smiles(smiles);
        Candidate {
            ids: Vec::new(),
            score,
            smiles: smiles.to_string(),
            valid,
            canonical,
            p_gen_trace: Vec::new(),
            copied_fraction: 0.0,
            finished: true,
        }
    }

    /// Dedup / exact-match key: canonical form when available, otherwise the
    /// raw string.
    pub fn key(&self) -> &str {
        self.canonical.as_deref().unwrap_or(&self.smiles)
    }
}

fn classify_smiles(smiles: &str) -> (bool, Option<String>) {
    match parse_smiles(smiles) {
        Ok(graph) => {
            let stripped = strip_atom_maps(&graph);
            let valid = check_valence(&stripped).is_empty();
            let canonical =
                smiles_core::canonicalize(&smiles_core::fill_implicit_hydrogens(&stripped));
            (valid, Some(canonical))
        }
        Err(_) => (false, None),
    }
}

/// Ranked candidates, strictly ordered by score, no two sharing a canonical
/// form.
#[derive(Debug, Clone, Default)]
pub struct PredictionSet {
    pub candidates: Vec<Candidate>,
}

impl PredictionSet {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

fn candidate_from_hypothesis(
    hyp: &Hypothesis,
    vocab: &Vocabulary,
    copy_threshold: f64,
) -> Candidate {
    let content: Vec<usize> = hyp
        .ids
        .iter()
        .copied()
        .filter(|&id| id != EOS)
        .collect();
    let texts = vocab.decode_ids(&content);
    let line = texts.join(" ");
    let decoded = tokens_from_line(&line).and_then(|toks| csmiles::decode(&toks));
    let (smiles, valid, canonical) = match decoded {
        Ok(s) => {
            let (valid, canonical) = classify_smiles(&s);
            (s, valid, canonical)
        }
        Err(_) => (texts.join(""), false, None),
    };
    let steps = content.len().max(1);
    let copied = hyp
        .p_gen_trace
        .iter()
        .take(content.len())
        .filter(|&&p| 1.0 - p > copy_threshold)
        .count();
    Candidate {
        ids: content,
        score: hyp.score(0.0),
        smiles,
        valid,
        canonical,
        p_gen_trace: hyp.p_gen_trace.clone(),
        copied_fraction: copied as f64 / steps as f64,
        finished: hyp.finished,
    }
}

/// Standard length-synchronous beam search. Finished hypotheses retire from
/// the beam; candidates are ranked by total log-probability (optionally
/// length-normalized), decoded, and deduplicated by canonical form. Invalid
/// decodes are kept and flagged.
pub fn beam_search(
    params: &Parameters,
    config: &ModelConfig,
    vocab: &Vocabulary,
    src_ids: &[usize],
    beam: &BeamConfig,
) -> Result<PredictionSet> {
    assert!(beam.beam_size >= 1, "beam size must be at least 1");
    let mut live = vec![Hypothesis {
        ids: Vec::new(),
        log_prob: 0.0,
        p_gen_trace: Vec::new(),
        argmax_source: Vec::new(),
        finished: false,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();

    for _ in 0..beam.max_len {
        if live.is_empty() {
            break;
        }
        // (new log prob, live index, token, p_gen, argmax source)
        let mut expansions: Vec<(f64, usize, usize, f64, usize)> = Vec::new();
        for (h_idx, hyp) in live.iter().enumerate() {
            let mut prefix = Vec::with_capacity(hyp.ids.len() + 1);
            prefix.push(SOS);
            prefix.extend_from_slice(&hyp.ids);
            let step = decode_step(params, config, src_ids, &prefix, beam.enable_copy)?;
            let head = &step.attention_heads[config.alignment_head.1];
            let argmax_src = head
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite attention"))
                .map(|(i, _)| i)
                .unwrap_or(0);
            for (w, &p) in step.mixed_probs.iter().enumerate() {
                if w == PAD || w == SOS {
                    continue;
                }
                let lp = hyp.log_prob + p.max(seq2seq::loss::PROB_CLIP).ln();
                expansions.push((lp, h_idx, w, step.p_gen, argmax_src));
            }
        }
        expansions.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite log probs"));
        expansions.truncate(beam.beam_size);

        let mut next_live = Vec::with_capacity(beam.beam_size);
        for (lp, h_idx, w, p_gen, argmax_src) in expansions {
            let base = &live[h_idx];
            let mut hyp = Hypothesis {
                ids: base.ids.clone(),
                log_prob: lp,
                p_gen_trace: base.p_gen_trace.clone(),
                argmax_source: base.argmax_source.clone(),
                finished: false,
            };
            hyp.ids.push(w);
            hyp.p_gen_trace.push(p_gen);
            hyp.argmax_source.push(argmax_src);
            if w == EOS {
                hyp.finished = true;
                finished.push(hyp);
            } else {
                next_live.push(hyp);
            }
        }
        live = next_live;

        // Log-probs only fall as steps accumulate, so once the finished pool
        // outscores every live prefix nothing better can arrive.
        if finished.len() >= beam.beam_size && beam.length_exponent == 0.0 {
            finished.sort_by(|a, b| {
                b.score(0.0).partial_cmp(&a.score(0.0)).expect("finite")
            });
            finished.truncate(beam.beam_size);
            let worst_kept = finished.last().map(|h| h.log_prob).unwrap_or(f64::MIN);
            if live.iter().all(|h| h.log_prob <= worst_kept) {
                live.clear();
            }
        }
    }

    // Unterminated prefixes only count when nothing finished.
    let mut pool = finished;
    if pool.is_empty() {
        pool = live;
    }
    pool.sort_by(|a, b| {
        b.score(beam.length_exponent)
            .partial_cmp(&a.score(beam.length_exponent))
            .expect("finite scores")
    });
    pool.truncate(beam.beam_size);

    let mut out = PredictionSet::default();
    let mut seen: Vec<String> = Vec::new();
    for hyp in &pool {
        let cand = candidate_from_hypothesis(hyp, vocab, beam.copy_threshold);
        let key = cand.key().to_string();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        out.candidates.push(cand);
    }
    Ok(out)
}

/// Argmax decoding; identical to beam_search with beam size 1.
pub fn greedy_decode(
    params: &Parameters,
    config: &ModelConfig,
    vocab: &Vocabulary,
    src_ids: &[usize],
    beam: &BeamConfig,
) -> Result<Option<Candidate>> {
    let narrow = BeamConfig {
        beam_size: 1,
        ..beam.clone()
    };
    Ok(beam_search(params, config, vocab, src_ids, &narrow)?
        .candidates
        .into_iter()
        .next())
}
