use crate::atom::AtomDescriptor;
use crate::graph::{Bond, BondOrder, MolGraph};
use crate::writer::{write_smiles, NeighborOrder};

/// Produce a string unique to the labeled graph, invariant under any
/// permutation of atom and bond storage order.
///
/// Atom maps, when present, participate in the labels; strip them first
/// (`strip_atom_maps`) for a map-independent form. The partition is refined
/// from (element, charge, H, aromaticity, degree, ...) neighborhoods; ties
/// are broken by trying every member of the first tied cell and keeping the
/// lexicographically smallest written string.
pub fn canonicalize(graph: &MolGraph) -> String {
    let mut parts: Vec<String> = graph
        .components()
        .iter()
        .map(|comp| canon_component(graph, comp))
        .collect();
    parts.sort();
    parts.join(".")
}

fn canon_component(graph: &MolGraph, comp: &[usize]) -> String {
    let sub = subgraph(graph, comp);
    let adj = sub.adjacency();
    let ranks = refine(&sub, &adj, initial_ranks(&sub));
    best_string(&sub, &adj, ranks)
}

fn subgraph(graph: &MolGraph, comp: &[usize]) -> MolGraph {
    let mut index_of = vec![usize::MAX; graph.atoms.len()];
    for (new, &old) in comp.iter().enumerate() {
        index_of[old] = new;
    }
    let atoms = comp.iter().map(|&i| graph.atoms[i].clone()).collect();
    let bonds = graph
        .bonds
        .iter()
        .filter(|b| index_of[b.i] != usize::MAX && index_of[b.j] != usize::MAX)
        .map(|b| Bond {
            i: index_of[b.i],
            j: index_of[b.j],
            order: b.order,
        })
        .collect();
    MolGraph { atoms, bonds }
}

fn best_string(sub: &MolGraph, adj: &[Vec<(usize, BondOrder)>], ranks: Vec<usize>) -> String {
    match first_tied_cell(&ranks) {
        None => {
            let root = ranks.iter().position(|&r| r == 0).expect("rank 0 exists");
            write_smiles(sub, root, NeighborOrder::Ranked(&ranks))
                .expect("canonical write cannot fail on a valid component")
        }
        Some(cell) => {
            let mut best: Option<String> = None;
            for &candidate in &cell {
                let split = individualize(&ranks, candidate);
                let refined = refine(sub, adj, split);
                let s = best_string(sub, adj, refined);
                if best.as_ref().is_none_or(|b| s < *b) {
                    best = Some(s);
                }
            }
            best.expect("tied cell is non-empty")
        }
    }
}

/// Members of the lowest-ranked cell with more than one atom, if any.
fn first_tied_cell(ranks: &[usize]) -> Option<Vec<usize>> {
    let mut by_rank: Vec<Vec<usize>> = vec![Vec::new(); ranks.len()];
    for (atom, &r) in ranks.iter().enumerate() {
        by_rank[r].push(atom);
    }
    by_rank.into_iter().find(|cell| cell.len() > 1)
}

fn individualize(ranks: &[usize], chosen: usize) -> Vec<usize> {
    let keys: Vec<usize> = ranks
        .iter()
        .enumerate()
        .map(|(atom, &r)| r * 2 + usize::from(atom != chosen))
        .collect();
    dense_ranks(&keys)
}

fn initial_ranks(sub: &MolGraph) -> Vec<usize> {
    let degrees = {
        let adj = sub.adjacency();
        adj.iter().map(|l| l.len()).collect::<Vec<_>>()
    };
    let keys: Vec<String> = sub
        .atoms
        .iter()
        .zip(&degrees)
        .map(|(a, d)| atom_key(a, *d))
        .collect();
    let mut sorted: Vec<&String> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key present"))
        .collect()
}

fn atom_key(a: &AtomDescriptor, degree: usize) -> String {
    format!(
        "{}|{}|{}|{}|{}|{}|{}|{}",
        a.element,
        u8::from(a.aromatic),
        a.charge,
        a.explicit_h,
        a.isotope.unwrap_or(0),
        a.chirality.as_str(),
        a.atom_map.unwrap_or(0),
        degree
    )
}

fn refine(sub: &MolGraph, adj: &[Vec<(usize, BondOrder)>], mut ranks: Vec<usize>) -> Vec<usize> {
    let n = sub.atoms.len();
    loop {
        let mut keys: Vec<(usize, Vec<(u8, usize)>)> = Vec::with_capacity(n);
        for atom in 0..n {
            let mut env: Vec<(u8, usize)> = adj[atom]
                .iter()
                .map(|&(w, order)| (bond_code(order), ranks[w]))
                .collect();
            env.sort_unstable();
            keys.push((ranks[atom], env));
        }
        let new_ranks = dense_ranks(&keys);
        let old_cells = count_distinct(&ranks);
        let new_cells = count_distinct(&new_ranks);
        ranks = new_ranks;
        if new_cells == old_cells {
            return ranks;
        }
    }
}

fn bond_code(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 0,
        BondOrder::Double => 1,
        BondOrder::Triple => 2,
        BondOrder::Aromatic => 3,
    }
}

fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key present"))
        .collect()
}

fn count_distinct(ranks: &[usize]) -> usize {
    let mut seen = vec![false; ranks.len()];
    let mut count = 0;
    for &r in ranks {
        if !seen[r] {
            seen[r] = true;
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse;
    use crate::token::tokenize;

    fn graph(s: &str) -> MolGraph {
        parse(&tokenize(s).unwrap()).unwrap()
    }

    /// Reorder atoms by `perm` (new index of each old atom), shuffling bond
    /// storage as well.
    fn permute(g: &MolGraph, perm: &[usize]) -> MolGraph {
        let mut atoms = vec![AtomDescriptor::bare("C"); g.atoms.len()];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = g.atoms[old].clone();
        }
        let mut bonds: Vec<Bond> = g
            .bonds
            .iter()
            .map(|b| Bond {
                i: perm[b.i],
                j: perm[b.j],
                order: b.order,
            })
            .collect();
        bonds.reverse();
        MolGraph { atoms, bonds }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for slot in 0..n {
                let mut q: Vec<usize> = p.iter().map(|&x| x + usize::from(x >= slot)).collect();
                q.push(slot);
                let mut full = vec![0; n];
                for (old, &new) in q.iter().enumerate() {
                    full[old] = new;
                }
                out.push(full);
            }
        }
        out
    }

    #[test]
    fn all_orderings_of_ethanol_agree() {
        let g = graph("CCO");
        let reference = canonicalize(&g);
        for perm in permutations(3) {
            assert_eq!(canonicalize(&permute(&g, &perm)), reference);
        }
    }

    #[test]
    fn permuted_benzene_agrees() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let g = graph("c1ccccc1");
        let reference = canonicalize(&g);
        for _ in 0..50 {
            let mut perm: Vec<usize> = (0..6).collect();
            perm.shuffle(&mut rng);
            assert_eq!(canonicalize(&permute(&g, &perm)), reference);
        }
    }

    #[test]
    fn single_atom() {
        assert_eq!(canonicalize(&graph("C")), "C");
    }

    #[test]
    fn canonical_reparses_to_same_form() {
        for s in ["CC(C)CC", "c1ccc2ccccc2c1", "CC(=O)Oc1ccccc1C(=O)O", "[NH4+].[Cl-]"] {
            let c1 = canonicalize(&graph(s));
            let c2 = canonicalize(&graph(&c1));
            assert_eq!(c1, c2, "idempotence failed for {s}");
        }
    }

    #[test]
    fn distinguishes_constitutional_isomers() {
        assert_ne!(canonicalize(&graph("CCO")), canonicalize(&graph("COC")));
    }

    #[test]
    fn component_order_is_sorted() {
        assert_eq!(
            canonicalize(&graph("[Cl-].[Na+]")),
            canonicalize(&graph("[Na+].[Cl-]"))
        );
    }
}
