use crate::atom::AtomDescriptor;
use crate::error::{Result, SmilesError};
use crate::graph::{BondOrder, MolGraph};

/// How a DFS step orders the neighbors of an atom.
#[derive(Debug, Clone, Copy)]
pub enum NeighborOrder<'a> {
    /// Bond storage order.
    Input,
    /// Ascending by the given per-atom keys (used by the canonicalizer).
    Ranked(&'a [usize]),
}

/// Render one atom, bracketed only when it carries decorations or falls
/// outside the organic subset.
pub fn render_atom(atom: &AtomDescriptor) -> String {
    let symbol = if atom.aromatic {
        atom.element.to_ascii_lowercase()
    } else {
        atom.element.clone()
    };
    if atom.is_plain() {
        return symbol;
    }
    let mut out = String::from("[");
    if let Some(iso) = atom.isotope {
        out.push_str(&iso.to_string());
    }
    out.push_str(&symbol);
    out.push_str(atom.chirality.as_str());
    if atom.explicit_h == 1 {
        out.push('H');
    } else if atom.explicit_h > 1 {
        out.push('H');
        out.push_str(&atom.explicit_h.to_string());
    }
    if atom.charge == 1 {
        out.push('+');
    } else if atom.charge == -1 {
        out.push('-');
    } else if atom.charge > 1 {
        out.push('+');
        out.push_str(&atom.charge.to_string());
    } else if atom.charge < -1 {
        out.push('-');
        out.push_str(&atom.charge.abs().to_string());
    }
    if let Some(map) = atom.atom_map {
        out.push(':');
        out.push_str(&map.to_string());
    }
    out.push(']');
    out
}

/// Write the graph as SMILES by DFS. The component containing `root` starts
/// there; other components start at their smallest atom index; components are
/// joined with '.' in storage order. Ring-closure digits are numbered by
/// first appearance in the output.
pub fn write_smiles(graph: &MolGraph, root: usize, order: NeighborOrder) -> Result<String> {
    if graph.atoms.is_empty() {
        return Err(SmilesError::InvalidRoot(root, 0));
    }
    if root >= graph.atoms.len() {
        return Err(SmilesError::InvalidRoot(root, graph.atoms.len()));
    }

    let mut parts = Vec::new();
    for comp in graph.components() {
        let start = if comp.contains(&root) { root } else { comp[0] };
        parts.push(write_component(graph, start, order)?);
    }
    Ok(parts.join("."))
}

/// Convenience: DFS from atom 0 in storage order.
pub fn to_smiles(graph: &MolGraph) -> Result<String> {
    write_smiles(graph, 0, NeighborOrder::Input)
}

struct DfsPlan {
    /// Children per atom, in visit order.
    children: Vec<Vec<usize>>,
    /// Ring events per atom: (partner atom, provisional id, opens_here).
    rings: Vec<Vec<(usize, usize, bool)>>,
    preorder: Vec<usize>,
}

fn write_component(graph: &MolGraph, start: usize, order: NeighborOrder) -> Result<String> {
    let n = graph.atoms.len();
    let mut neighbors = graph.adjacency();
    if let NeighborOrder::Ranked(ranks) = order {
        for list in &mut neighbors {
            list.sort_by_key(|&(w, _)| ranks[w]);
        }
    }

    let mut plan = DfsPlan {
        children: vec![Vec::new(); n],
        rings: vec![Vec::new(); n],
        preorder: Vec::new(),
    };
    let mut visited = vec![false; n];
    let mut parent = vec![usize::MAX; n];
    let mut ring_seen: Vec<(usize, usize)> = Vec::new();
    let mut next_ring = 0usize;

    // Iterative DFS so deep chains cannot overflow the stack.
    let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
    visited[start] = true;
    plan.preorder.push(start);
    while let Some(&mut (node, ref mut cursor)) = stack.last_mut() {
        if *cursor >= neighbors[node].len() {
            stack.pop();
            continue;
        }
        let (next, _) = neighbors[node][*cursor];
        *cursor += 1;
        if !visited[next] {
            visited[next] = true;
            parent[next] = node;
            plan.children[node].push(next);
            plan.preorder.push(next);
            stack.push((next, 0));
        } else if parent[node] != next {
            let key = (node.min(next), node.max(next));
            if !ring_seen.contains(&key) {
                ring_seen.push(key);
                let id = next_ring;
                next_ring += 1;
                // `next` was visited earlier, so the ring opens there.
                plan.rings[next].push((node, id, true));
                plan.rings[node].push((next, id, false));
            }
        }
    }

    // Renumber rings by first appearance in emission order.
    let mut digit_of = vec![usize::MAX; next_ring];
    let mut next_digit = 1usize;
    for &atom in &plan.preorder {
        for &(_, id, _) in &plan.rings[atom] {
            if digit_of[id] == usize::MAX {
                digit_of[id] = next_digit;
                next_digit += 1;
            }
        }
    }
    if next_digit > 100 {
        return Err(SmilesError::TooManyRings);
    }

    let mut out = String::new();
    emit(graph, &plan, &digit_of, start, usize::MAX, &mut out);
    Ok(out)
}

fn emit(
    graph: &MolGraph,
    plan: &DfsPlan,
    digit_of: &[usize],
    node: usize,
    from: usize,
    out: &mut String,
) {
    if from != usize::MAX {
        push_bond_symbol(graph, from, node, out);
    }
    out.push_str(&render_atom(&graph.atoms[node]));
    for &(partner, id, opens_here) in &plan.rings[node] {
        if opens_here {
            push_bond_symbol(graph, node, partner, out);
        }
        push_ring_digit(digit_of[id], out);
    }
    let kids = &plan.children[node];
    for (k, &child) in kids.iter().enumerate() {
        let branch = k + 1 < kids.len();
        if branch {
            out.push('(');
        }
        emit(graph, plan, digit_of, child, node, out);
        if branch {
            out.push(')');
        }
    }
}

fn push_bond_symbol(graph: &MolGraph, a: usize, b: usize, out: &mut String) {
    let order = graph
        .bonds
        .iter()
        .find(|bd| (bd.i == a && bd.j == b) || (bd.i == b && bd.j == a))
        .map(|bd| bd.order)
        .expect("bond exists between DFS neighbors");
    let both_aromatic = graph.atoms[a].aromatic && graph.atoms[b].aromatic;
    match order {
        BondOrder::Single => {
            if both_aromatic {
                out.push('-');
            }
        }
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic => {
            if !both_aromatic {
                out.push(':');
            }
        }
    }
}

fn push_ring_digit(digit: usize, out: &mut String) {
    if digit < 10 {
        out.push(char::from(b'0' + digit as u8));
    } else {
        out.push('%');
        out.push(char::from(b'0' + (digit / 10) as u8));
        out.push(char::from(b'0' + (digit % 10) as u8));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse;
    use crate::token::tokenize;

    fn graph(s: &str) -> MolGraph {
        parse(&tokenize(s).unwrap()).unwrap()
    }

    #[test]
    fn linear_chain_roots() {
        let g = graph("CCO");
        assert_eq!(write_smiles(&g, 0, NeighborOrder::Input).unwrap(), "CCO");
        assert_eq!(write_smiles(&g, 2, NeighborOrder::Input).unwrap(), "OCC");
    }

    #[test]
    fn single_bracket_atom() {
        let g = graph("[NH4+]");
        assert_eq!(to_smiles(&g).unwrap(), "[NH4+]");
    }

    #[test]
    fn ring_reparses_to_cycle() {
        let g = graph("C1CC1");
        for root in 0..3 {
            let s = write_smiles(&g, root, NeighborOrder::Input).unwrap();
            let g2 = graph(&s);
            assert_eq!(g2.atoms.len(), 3);
            assert_eq!(g2.bonds.len(), 3);
        }
    }

    #[test]
    fn aromatic_single_bond_is_explicit() {
        let g = graph("c1ccccc1-c1ccccc1");
        let s = to_smiles(&g).unwrap();
        assert!(s.contains('-'), "biphenyl bond must stay single: {s}");
        let g2 = graph(&s);
        assert_eq!(g2.bonds.iter().filter(|b| b.order == BondOrder::Single).count(), 1);
    }

    #[test]
    fn invalid_root() {
        let g = graph("CC");
        assert!(matches!(
            write_smiles(&g, 5, NeighborOrder::Input),
            Err(SmilesError::InvalidRoot(5, 2))
        ));
    }

    #[test]
    fn components_keep_storage_order() {
        let g = graph("CCO.[Na+]");
        assert_eq!(write_smiles(&g, 2, NeighborOrder::Input).unwrap(), "OCC.[Na+]");
    }

    #[test]
    fn map_and_charge_rendering() {
        let g = graph("[CH3:7][O-]");
        assert_eq!(to_smiles(&g).unwrap(), "[CH3:7][O-]");
        let g = graph("[Fe+2]");
        assert_eq!(to_smiles(&g).unwrap(), "[Fe+2]");
    }
}
