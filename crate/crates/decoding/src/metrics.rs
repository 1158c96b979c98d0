//! Top-k exact-match accuracy and validity tables.

use smiles_core::canonical_key;

use crate::beam::PredictionSet;
use crate::error::{DecodingError, Result};

/// Canonical comparison key of a gold reactant string: maps stripped,
/// components sorted inside the canonical form.
pub fn gold_key(gold_reactants: &str) -> Result<String> {
    canonical_key(gold_reactants).map_err(DecodingError::GoldParse)
}

/// A hit at k means some candidate among the first k shares the gold's
/// canonical multiset of reactant molecules.
pub fn topk_accuracy(
    predictions: &[PredictionSet],
    golds: &[String],
    ks: &[usize],
) -> Result<Vec<(usize, f64)>> {
    assert_eq!(predictions.len(), golds.len(), "one gold per prediction set");
    let keys: Vec<String> = golds
        .iter()
        .map(|g| gold_key(g))
        .collect::<Result<_>>()?;
    let n = predictions.len().max(1) as f64;
    Ok(ks
        .iter()
        .map(|&k| {
            let hits = predictions
                .iter()
                .zip(&keys)
                .filter(|(set, gold)| {
                    set.candidates
                        .iter()
                        .take(k)
                        .any(|c| c.canonical.as_deref() == Some(gold.as_str()))
                })
                .count();
            (k, hits as f64 / n)
        })
        .collect())
}

/// Mean fraction of valid candidates among the first k of each set. Sets
/// with fewer than k candidates are judged on what they returned.
pub fn validity(predictions: &[PredictionSet], ks: &[usize]) -> Vec<(usize, f64)> {
    let n = predictions.len().max(1) as f64;
    ks.iter()
        .map(|&k| {
            let total: f64 = predictions
                .iter()
                .map(|set| {
                    let considered = set.candidates.iter().take(k).collect::<Vec<_>>();
                    if considered.is_empty() {
                        return 0.0;
                    }
                    let valid = considered.iter().filter(|c| c.valid).count();
                    valid as f64 / considered.len() as f64
                })
                .sum();
            (k, total / n)
        })
        .collect()
}
