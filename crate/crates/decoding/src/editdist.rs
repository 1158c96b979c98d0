//! Token-level Levenshtein distances between the two sides of a reaction,
//! under both token representations.

use csmiles::vocab::raw_token_text_unmapped;
use csmiles::encode;
use smiles_core::tokenize;

use crate::error::Result;

/// Two-row dynamic-programming edit distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.len() > b.len() {
        return levenshtein(b, a);
    }
    let mut prev: Vec<usize> = (0..=a.len()).collect();
    for (j, bj) in b.iter().enumerate() {
        let mut diag = prev[0];
        prev[0] = j + 1;
        for (i, ai) in a.iter().enumerate() {
            let up = prev[i + 1];
            prev[i + 1] = if ai == bj {
                diag
            } else {
                1 + diag.min(up).min(prev[i])
            };
            diag = up;
        }
    }
    prev[a.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditDistanceReport {
    pub reactions: usize,
    pub raw_mean: f64,
    pub raw_median: f64,
    pub csmiles_mean: f64,
    pub csmiles_median: f64,
    /// csmiles_mean - raw_mean.
    pub mean_delta: f64,
    pub fraction_csmiles_le_raw: f64,
}

fn median(sorted: &mut [usize]) -> f64 {
    sorted.sort_unstable();
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Per-reaction distances between the product and the full reactant string,
/// with atom maps removed from both token streams.
pub fn edit_distance_report(reactions: &[(String, String)]) -> Result<EditDistanceReport> {
    let mut raw = Vec::with_capacity(reactions.len());
    let mut dec = Vec::with_capacity(reactions.len());
    for (product, reactants) in reactions {
        let p_raw: Vec<String> = tokenize(product)
            .map_err(csmiles::CsmilesError::from)?
            .iter()
            .map(raw_token_text_unmapped)
            .collect();
        let r_raw: Vec<String> = tokenize(reactants)
            .map_err(csmiles::CsmilesError::from)?
            .iter()
            .map(raw_token_text_unmapped)
            .collect();
        raw.push(levenshtein(&p_raw, &r_raw));

        let p_dec: Vec<String> = encode(product)?.texts().iter().map(|s| s.to_string()).collect();
        let r_dec: Vec<String> = encode(reactants)?.texts().iter().map(|s| s.to_string()).collect();
        dec.push(levenshtein(&p_dec, &r_dec));
    }

    let n = reactions.len().max(1) as f64;
    let raw_mean = raw.iter().sum::<usize>() as f64 / n;
    let csmiles_mean = dec.iter().sum::<usize>() as f64 / n;
    let le = raw
        .iter()
        .zip(&dec)
        .filter(|(r, d)| d <= r)
        .count() as f64
        / n;
    Ok(EditDistanceReport {
        reactions: reactions.len(),
        raw_mean,
        raw_median: median(&mut raw.clone()),
        csmiles_mean,
        csmiles_median: median(&mut dec.clone()),
        mean_delta: csmiles_mean - raw_mean,
        fraction_csmiles_le_raw: le,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook recursion, memoized; the independent oracle.
    fn oracle(a: &[u8], b: &[u8], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if i == 0 {
            return j;
        }
        if j == 0 {
            return i;
        }
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if a[i - 1] == b[j - 1] {
            oracle(a, b, i - 1, j - 1, memo)
        } else {
            1 + oracle(a, b, i - 1, j - 1, memo)
                .min(oracle(a, b, i - 1, j, memo))
                .min(oracle(a, b, i, j - 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }

    fn all_sequences(max_len: usize, alphabet: &[u8]) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for seq in &frontier {
                for &c in alphabet {
                    let mut s = seq.clone();
                    s.push(c);
                    next.push(s);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn matches_recursive_oracle_exhaustively() {
        // Every pair of sequences of length <= 4 over a 3-token alphabet,
        // plus a sampled sweep at lengths 5-6.
        let short = all_sequences(4, &[0, 1, 2]);
        for a in &short {
            for b in &short {
                let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
                assert_eq!(
                    levenshtein(a, b),
                    oracle(a, b, a.len(), b.len(), &mut memo),
                    "{a:?} vs {b:?}"
                );
            }
        }
        let long = all_sequences(6, &[0, 1, 2]);
        for (k, a) in long.iter().enumerate().step_by(7) {
            for b in long.iter().skip(k % 13).step_by(13) {
                let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
                assert_eq!(
                    levenshtein(a, b),
                    oracle(a, b, a.len(), b.len(), &mut memo)
                );
            }
        }
    }

    #[test]
    fn bond_insertion_is_distance_one() {
        let a = ["C", "C", "O"];
        let b = ["C", "C", "=", "O"];
        assert_eq!(levenshtein(&a, &b), 1);
    }

    #[test]
    fn identical_sides_are_distance_zero() {
        let report =
            edit_distance_report(&[("CCO".to_string(), "CCO".to_string())]).unwrap();
        assert_eq!(report.raw_mean, 0.0);
        assert_eq!(report.csmiles_mean, 0.0);
        assert_eq!(report.fraction_csmiles_le_raw, 1.0);
    }

    #[test]
    fn aromatic_cation_swap() {
        // Raw: composite token substitution, distance 1.
        // Decomposed: S & + vs S +, a single '&' deletion, also 1.
        let report =
            edit_distance_report(&[("[s+]".to_string(), "[S+]".to_string())]).unwrap();
        assert_eq!(report.raw_mean, 1.0);
        assert_eq!(report.csmiles_mean, 1.0);
    }

    #[test]
    fn reduction_pair_is_cheaper_decomposed() {
        // Aldehyde to alcohol: raw needs a bracket-atom substitution plus a
        // bond deletion; decomposed re-aligns across the token boundary.
        let report = edit_distance_report(&[(
            "[CH:1]=[O:2]".to_string(),
            "[CH2:1][OH:2]".to_string(),
        )])
        .unwrap();
        assert_eq!(report.raw_mean, 3.0);
        assert_eq!(report.csmiles_mean, 2.0);

        let report = edit_distance_report(&[(
            "[CH:1]=O".to_string(),
            "[CH2:1]O".to_string(),
        )])
        .unwrap();
        assert_eq!(report.raw_mean, 2.0);
        assert_eq!(report.csmiles_mean, 1.0);
    }

    #[test]
    fn maps_are_stripped_before_comparison() {
        let report = edit_distance_report(&[(
            "[CH3:1][OH:2]".to_string(),
            "[CH3:5][OH:9]".to_string(),
        )])
        .unwrap();
        assert_eq!(report.raw_mean, 0.0);
        assert_eq!(report.csmiles_mean, 0.0);
    }
}
