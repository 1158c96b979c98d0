use std::collections::HashMap;

use crate::atom::AtomDescriptor;
use crate::error::{Result, SmilesError};
use crate::token::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's bond-order sum. Aromatic counts as 1; each
    /// aromatic atom separately gets one slack unit in the valence check.
    pub fn valence_units(&self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub order: BondOrder,
}

/// A molecular graph: atom labels plus undirected bonds. May hold several
/// connected components (dot-disconnected SMILES).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MolGraph {
    pub atoms: Vec<AtomDescriptor>,
    pub bonds: Vec<Bond>,
}

impl MolGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Neighbor lists in bond storage order: (neighbor index, bond order).
    pub fn adjacency(&self) -> Vec<Vec<(usize, BondOrder)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for b in &self.bonds {
            adj[b.i].push((b.j, b.order));
            adj[b.j].push((b.i, b.order));
        }
        adj
    }

    pub fn has_bond(&self, i: usize, j: usize) -> bool {
        self.bonds
            .iter()
            .any(|b| (b.i == i && b.j == j) || (b.i == j && b.j == i))
    }

    /// Connected components as sorted atom-index lists, ordered by their
    /// smallest atom index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut comps = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

/// Clear every atom-map label. Idempotent.
pub fn strip_atom_maps(graph: &MolGraph) -> MolGraph {
    let mut out = graph.clone();
    for atom in &mut out.atoms {
        atom.atom_map = None;
    }
    out
}

/// Build the molecular graph from a token sequence. Default bond between two
/// aromatic atoms is aromatic, otherwise single.
pub fn parse(tokens: &[Token]) -> Result<MolGraph> {
    let mut graph = MolGraph::default();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondOrder, usize)> = None; // (order, token position)
    let mut branch_stack: Vec<Option<usize>> = Vec::new();
    let mut open_rings: HashMap<u16, (usize, Option<BondOrder>)> = HashMap::new();

    for tok in tokens {
        match tok.kind {
            TokenKind::Atom => {
                let idx = graph.atoms.len();
                let atom = tok.atom.clone().expect("atom token carries descriptor");
                graph.atoms.push(atom);
                if let Some(p) = prev {
                    let order = match pending.take() {
                        Some((o, _)) => o,
                        None => default_order(&graph, p, idx),
                    };
                    graph.bonds.push(Bond { i: p, j: idx, order });
                }
                prev = Some(idx);
            }
            TokenKind::Bond => {
                if pending.is_some() || prev.is_none() {
                    return Err(SmilesError::DanglingBond(tok.position));
                }
                let order = match tok.text.as_str() {
                    "-" | "/" | "\\" => BondOrder::Single,
                    "=" => BondOrder::Double,
                    "#" => BondOrder::Triple,
                    ":" => BondOrder::Aromatic,
                    _ => unreachable!("tokenizer emits only known bond symbols"),
                };
                pending = Some((order, tok.position));
            }
            TokenKind::RingClosure => {
                let num = tok.ring_number().expect("ring token has a number");
                let here = match prev {
                    Some(p) => p,
                    None => return Err(SmilesError::UnmatchedRingClosure(num)),
                };
                let explicit = pending.take().map(|(o, _)| o);
                match open_rings.remove(&num) {
                    Some((other, opened_order)) => {
                        if other == here {
                            return Err(SmilesError::InvalidRingBond(num, "closes onto itself"));
                        }
                        if graph.has_bond(other, here) {
                            return Err(SmilesError::InvalidRingBond(num, "duplicate bond"));
                        }
                        let order = match (opened_order, explicit) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::InvalidRingBond(
                                    num,
                                    "conflicting bond orders",
                                ))
                            }
                            (Some(a), _) => a,
                            (None, Some(b)) => b,
                            (None, None) => default_order(&graph, other, here),
                        };
                        graph.bonds.push(Bond { i: other, j: here, order });
                    }
                    None => {
                        open_rings.insert(num, (here, explicit));
                    }
                }
            }
            TokenKind::BranchOpen => {
                if pending.is_some() {
                    return Err(SmilesError::DanglingBond(tok.position));
                }
                branch_stack.push(prev);
            }
            TokenKind::BranchClose => {
                if let Some((_, pos)) = pending {
                    return Err(SmilesError::DanglingBond(pos));
                }
                prev = branch_stack.pop().ok_or(SmilesError::UnbalancedBranch)?;
            }
            TokenKind::Dot => {
                if let Some((_, pos)) = pending {
                    return Err(SmilesError::DanglingBond(pos));
                }
                prev = None;
            }
        }
    }

    if let Some((_, pos)) = pending {
        return Err(SmilesError::DanglingBond(pos));
    }
    if !branch_stack.is_empty() {
        return Err(SmilesError::UnbalancedBranch);
    }
    if let Some(&num) = open_rings.keys().next() {
        return Err(SmilesError::UnmatchedRingClosure(num));
    }
    Ok(graph)
}

fn default_order(graph: &MolGraph, a: usize, b: usize) -> BondOrder {
    if graph.atoms[a].aromatic && graph.atoms[b].aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::tokenize;

    fn parse_str(s: &str) -> Result<MolGraph> {
        parse(&tokenize(s)?)
    }

    #[test]
    fn branch() {
        let g = parse_str("C(C)O").unwrap();
        assert_eq!(g.atoms.len(), 3);
        let mut pairs: Vec<_> = g.bonds.iter().map(|b| (b.i, b.j, b.order)).collect();
        pairs.sort();
        assert_eq!(
            pairs,
            vec![(0, 1, BondOrder::Single), (0, 2, BondOrder::Single)]
        );
    }

    #[test]
    fn ring_closure_pairs() {
        let g = parse_str("C1CC1").unwrap();
        assert_eq!(g.atoms.len(), 3);
        let mut pairs: Vec<_> = g.bonds.iter().map(|b| (b.i.min(b.j), b.i.max(b.j))).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Single));
    }

    #[test]
    fn unbalanced_branch() {
        assert_eq!(parse_str("C(C"), Err(SmilesError::UnbalancedBranch));
        assert_eq!(parse_str("CC)C"), Err(SmilesError::UnbalancedBranch));
    }

    #[test]
    fn unmatched_ring() {
        assert_eq!(parse_str("C1CC"), Err(SmilesError::UnmatchedRingClosure(1)));
    }

    #[test]
    fn dangling_bond() {
        assert!(matches!(parse_str("C="), Err(SmilesError::DanglingBond(_))));
        assert!(matches!(parse_str("C=.C"), Err(SmilesError::DanglingBond(_))));
        assert!(matches!(parse_str("C=(C)"), Err(SmilesError::DanglingBond(_))));
        assert!(matches!(parse_str("=C"), Err(SmilesError::DanglingBond(_))));
    }

    #[test]
    fn aromatic_default_bond() {
        let g = parse_str("cc").unwrap();
        assert_eq!(g.bonds[0].order, BondOrder::Aromatic);
        let g = parse_str("cC").unwrap();
        assert_eq!(g.bonds[0].order, BondOrder::Single);
    }

    #[test]
    fn explicit_ring_bond_order() {
        let g = parse_str("C=1CCCCC=1").unwrap();
        assert!(g
            .bonds
            .iter()
            .any(|b| b.i == 0 && b.j == 5 && b.order == BondOrder::Double));
        assert!(parse_str("C=1CCCCC#1").is_err());
    }

    #[test]
    fn dot_separates_components() {
        let g = parse_str("[Na+].[Cl-]").unwrap();
        assert_eq!(g.atoms.len(), 2);
        assert!(g.bonds.is_empty());
        assert_eq!(g.components().len(), 2);
    }

    #[test]
    fn self_ring_is_rejected() {
        assert!(matches!(
            parse_str("C11"),
            Err(SmilesError::InvalidRingBond(1, _))
        ));
    }

    #[test]
    fn strip_maps_idempotent() {
        let g = parse_str("[CH3:1][OH:2]").unwrap();
        let bare = parse_str("[CH3][OH]").unwrap();
        let once = strip_atom_maps(&g);
        assert_eq!(once, bare);
        assert_eq!(strip_atom_maps(&once), once);
    }

    #[test]
    fn ring_digit_zero_and_reuse() {
        let g = parse_str("C0CC0C1CC1").unwrap();
        assert_eq!(g.bonds.len(), 7);
    }
}
