//! Token alignment between the two sides of an atom-mapped reaction.
//!
//! Alignment is found on the raw token sequences: each atom-mapped reactant
//! token anchors at the product token with the same map number, the match is
//! extended forward while tokens are textually identical or share a map, and
//! aligned atom pairs spread to adjacent textually-identical non-atom tokens
//! in both directions. Cells are then projected to decomposed-token
//! positions wherever the two raw tokens decompose identically.

use std::collections::HashMap;

use smiles_core::{tokenize, Token, TokenSequence};

use crate::codec::{encode, encode_atom};
use crate::error::{CsmilesError, Result};

/// Binary reactant-by-product alignment over decomposed token positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentMap {
    pub rows: usize,
    pub cols: usize,
    cells: Vec<u8>,
}

impl AlignmentMap {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        AlignmentMap {
            rows,
            cols,
            cells: vec![0; rows * cols],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col] != 0
    }

    pub fn set(&mut self, row: usize, col: usize) {
        self.cells[row * self.cols + col] = 1;
    }

    pub fn row_has_alignment(&self, row: usize) -> bool {
        self.cells[row * self.cols..(row + 1) * self.cols]
            .iter()
            .any(|&c| c != 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows)
            .flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
            .filter(move |&(r, c)| self.get(r, c))
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    /// Row-major f64 copy, the shape the training engine consumes.
    pub fn to_dense(&self) -> Vec<f64> {
        self.cells.iter().map(|&c| f64::from(c)).collect()
    }
}

/// Label-smoothed alignment: (1-eps)*SAM + eps/|P| per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedAlignment {
    pub rows: usize,
    pub cols: usize,
    pub epsilon: f64,
    pub values: Vec<f64>,
}

impl SmoothedAlignment {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}

/// Per-target-step labels: 1 = generate (row has no alignment), 0 = copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyLabelVector {
    pub y: Vec<u8>,
}

pub fn smooth(sam: &AlignmentMap, epsilon: f64) -> SmoothedAlignment {
    assert!((0.0..1.0).contains(&epsilon), "epsilon must be in [0, 1)");
    let uniform = if sam.cols > 0 {
        1.0 / sam.cols as f64
    } else {
        0.0
    };
    let values = (0..sam.rows)
        .flat_map(|r| (0..sam.cols).map(move |c| (r, c)))
        .map(|(r, c)| (1.0 - epsilon) * f64::from(u8::from(sam.get(r, c))) + epsilon * uniform)
        .collect();
    SmoothedAlignment {
        rows: sam.rows,
        cols: sam.cols,
        epsilon,
        values,
    }
}

pub fn copy_labels(sam: &AlignmentMap) -> CopyLabelVector {
    let y = (0..sam.rows)
        .map(|r| u8::from(!sam.row_has_alignment(r)))
        .collect();
    CopyLabelVector { y }
}

/// Build the alignment map for one atom-mapped reaction. Rows index the
/// reactant decomposition, columns the product decomposition. Reactant
/// atoms with no product counterpart simply stay unaligned.
pub fn build_sam(mapped_product: &str, mapped_reactants: &str) -> Result<AlignmentMap> {
    let product_toks = tokenize(mapped_product)?;
    let reactant_toks = tokenize(mapped_reactants)?;
    let raw = raw_sam(&reactant_toks, &product_toks)?;
    project(&raw, &reactant_toks, &product_toks, mapped_reactants, mapped_product)
}

/// Raw-token-level alignment (reactant rows, product columns).
pub(crate) fn raw_sam(
    reactant_toks: &TokenSequence,
    product_toks: &TokenSequence,
) -> Result<Vec<Vec<bool>>> {
    let product_by_map = map_index(product_toks)?;
    map_index(reactant_toks)?; // uniqueness check on the reactant side

    let rn = reactant_toks.len();
    let pn = product_toks.len();
    let mut cells = vec![vec![false; pn]; rn];

    for (i, r_tok) in reactant_toks.iter().enumerate() {
        let Some(map) = r_tok.atom_map() else {
            continue;
        };
        let Some(&j) = product_by_map.get(&map) else {
            continue;
        };
        let (mut ii, mut jj) = (i, j);
        while ii < rn && jj < pn && matches(&reactant_toks[ii], &product_toks[jj]) {
            cells[ii][jj] = true;
            ii += 1;
            jj += 1;
        }
    }

    // Spread each aligned atom pair over adjacent identical non-atom tokens.
    let aligned: Vec<(usize, usize)> = (0..rn)
        .flat_map(|i| (0..pn).map(move |j| (i, j)))
        .filter(|&(i, j)| cells[i][j] && reactant_toks[i].is_atom())
        .collect();
    for (i, j) in aligned {
        let mut k = 1;
        while i + k < rn
            && j + k < pn
            && !reactant_toks[i + k].is_atom()
            && !product_toks[j + k].is_atom()
            && reactant_toks[i + k].text == product_toks[j + k].text
        {
            cells[i + k][j + k] = true;
            k += 1;
        }
        let mut k = 1;
        while i >= k
            && j >= k
            && !reactant_toks[i - k].is_atom()
            && !product_toks[j - k].is_atom()
            && reactant_toks[i - k].text == product_toks[j - k].text
        {
            cells[i - k][j - k] = true;
            k += 1;
        }
    }
    Ok(cells)
}

fn matches(a: &Token, b: &Token) -> bool {
    if a.text == b.text {
        return true;
    }
    match (a.atom_map(), b.atom_map()) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

fn map_index(tokens: &TokenSequence) -> Result<HashMap<u32, usize>> {
    let mut index = HashMap::new();
    for (i, tok) in tokens.iter().enumerate() {
        if let Some(map) = tok.atom_map() {
            if index.insert(map, i).is_some() {
                return Err(CsmilesError::DuplicateAtomMap { map });
            }
        }
    }
    Ok(index)
}

/// Project raw-level cells onto decomposed positions. A raw pair carries
/// over only when both tokens decompose to identical token lists; the lists
/// are then aligned elementwise.
fn project(
    raw: &[Vec<bool>],
    reactant_toks: &TokenSequence,
    product_toks: &TokenSequence,
    mapped_reactants: &str,
    mapped_product: &str,
) -> Result<AlignmentMap> {
    let r_seq = encode(mapped_reactants)?;
    let p_seq = encode(mapped_product)?;
    let r_spans = spans(reactant_toks.len(), &r_seq.source_span);
    let p_spans = spans(product_toks.len(), &p_seq.source_span);

    let mut sam = AlignmentMap::zeros(r_seq.len(), p_seq.len());
    for (i, row) in raw.iter().enumerate() {
        for (j, &set) in row.iter().enumerate() {
            if !set {
                continue;
            }
            let ri = &r_spans[i];
            let pj = &p_spans[j];
            if ri.len() != pj.len() {
                continue;
            }
            let same = ri
                .iter()
                .zip(pj)
                .all(|(&a, &b)| r_seq.tokens[a].text == p_seq.tokens[b].text);
            if same {
                for (&a, &b) in ri.iter().zip(pj) {
                    sam.set(a, b);
                }
            }
        }
    }
    Ok(sam)
}

fn spans(raw_len: usize, source_span: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); raw_len];
    for (pos, &raw_idx) in source_span.iter().enumerate() {
        out[raw_idx].push(pos);
    }
    out
}

/// Decomposition of one raw token, for tests and diagnostics.
pub fn decomposed_texts(tok: &Token) -> Vec<String> {
    match &tok.atom {
        Some(atom) => encode_atom(atom).into_iter().map(|t| t.text).collect(),
        None => vec![tok.text.clone()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells_of(sam: &AlignmentMap) -> Vec<(usize, usize)> {
        sam.ones().collect()
    }

    #[test]
    fn identical_sides_give_identity() {
        let sam = build_sam("[CH3:1][OH:2]", "[CH3:1][OH:2]").unwrap();
        assert_eq!(sam.rows, 6);
        assert_eq!(sam.cols, 6);
        assert_eq!(cells_of(&sam), (0..6).map(|k| (k, k)).collect::<Vec<_>>());
    }

    #[test]
    fn leaving_group_stays_unaligned() {
        // Reactant side C H H H Br; product side C H H H O H.
        let sam = build_sam("[CH3:1][OH:2]", "[CH3:1]Br").unwrap();
        assert_eq!(sam.rows, 5);
        assert_eq!(sam.cols, 6);
        assert_eq!(cells_of(&sam), vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert!(!sam.row_has_alignment(4));
    }

    #[test]
    fn bond_change_leaves_bond_column_empty() {
        let sam = build_sam("[C:1]=[O:2]", "[C:1][O:2]").unwrap();
        assert_eq!(sam.rows, 2);
        assert_eq!(sam.cols, 3);
        assert_eq!(cells_of(&sam), vec![(0, 0), (1, 2)]);
        let labels = copy_labels(&sam);
        assert_eq!(labels.y, vec![0, 0]);
    }

    #[test]
    fn smoothing_arithmetic() {
        let mut sam = AlignmentMap::zeros(1, 10);
        sam.set(0, 3);
        let sm = smooth(&sam, 0.1);
        assert!((sm.get(0, 3) - 0.91).abs() < 1e-12);
        assert!((sm.get(0, 0) - 0.01).abs() < 1e-12);
        let exact = smooth(&sam, 0.0);
        for c in 0..10 {
            assert_eq!(exact.get(0, c), f64::from(u8::from(c == 3)));
        }
    }

    #[test]
    fn label_complement() {
        let mut sam = AlignmentMap::zeros(3, 2);
        sam.set(0, 1);
        sam.set(2, 0);
        let labels = copy_labels(&sam);
        assert_eq!(labels.y, vec![0, 1, 0]);
        for (t, &y) in labels.y.iter().enumerate() {
            assert_eq!(y == 0, sam.row_has_alignment(t));
        }
    }

    #[test]
    fn duplicate_map_rejected() {
        assert!(matches!(
            build_sam("[CH3:1][CH3:1]", "[CH3:1]"),
            Err(CsmilesError::DuplicateAtomMap { map: 1 })
        ));
    }

    #[test]
    fn changed_decomposition_is_not_projected() {
        // Map 1 matches but [CH2:1] and [CH3:1] decompose differently, so
        // nothing projects for that atom; the map-2 oxygen still aligns.
        let sam = build_sam("[CH2:1]=[O:2]", "[CH3:1][O:2]").unwrap();
        // Reactants decompose to C H H H O; product to C H H = O.
        assert_eq!(sam.rows, 5);
        assert_eq!(sam.cols, 5);
        assert_eq!(cells_of(&sam), vec![(4, 4)]);
    }

    #[test]
    fn structural_tokens_extend_from_atoms() {
        let sam = build_sam("[CH2:1]1CC1", "[CH2:1]1CC1").unwrap();
        // Full self-identity: every decomposed position aligned.
        assert_eq!(sam.count_ones(), sam.rows);
        for k in 0..sam.rows {
            assert!(sam.get(k, k));
        }
    }
}
