//! Seeded random molecule generator used by the property corpora and tests.
//! Graphs are valence-sane (never exceed `check_valence` limits) and never
//! carry isotopes, so every generated molecule round-trips through the
//! writer, the parser, and the element-token codec.

use rand::Rng;

use crate::atom::{AtomDescriptor, Chirality};
use crate::graph::{Bond, BondOrder, MolGraph};

struct Budget {
    capacity: Vec<u32>,
    used: Vec<u32>,
}

impl Budget {
    fn free(&self, atom: usize) -> u32 {
        self.capacity[atom].saturating_sub(self.used[atom])
    }
}

fn element_cap(element: &str, aromatic: bool, charge: i32) -> u32 {
    let base: i64 = match element {
        "C" => 4,
        "N" => 3,
        "O" => 2,
        "S" => 2,
        "P" => 3,
        "B" => 3,
        "F" | "Cl" | "Br" | "I" => 1,
        _ => 2,
    };
    let shift: i64 = if charge > 0 {
        if matches!(element, "N" | "O" | "S") {
            i64::from(charge)
        } else {
            0
        }
    } else {
        i64::from(charge)
    };
    let slack = i64::from(aromatic);
    (base + shift + slack).max(0) as u32
}

fn pick_element(rng: &mut impl Rng) -> &'static str {
    let roll = rng.gen_range(0..100);
    match roll {
        0..=54 => "C",
        55..=69 => "O",
        70..=81 => "N",
        82..=86 => "S",
        87..=90 => "F",
        91..=94 => "Cl",
        95..=96 => "Br",
        97 => "P",
        98 => "I",
        _ => "B",
    }
}

/// Build one connected random molecule with at most `max_atoms` heavy atoms.
pub fn random_molecule(rng: &mut impl Rng, max_atoms: usize) -> MolGraph {
    let max_atoms = max_atoms.max(1);
    let target = rng.gen_range(1..=max_atoms);
    let mut graph = MolGraph::default();
    let mut budget = Budget {
        capacity: Vec::new(),
        used: Vec::new(),
    };

    if target >= 6 && rng.gen_bool(0.35) {
        add_aromatic_ring(rng, &mut graph, &mut budget, None);
    } else {
        let element = pick_element(rng);
        add_atom(rng, &mut graph, &mut budget, element);
    }

    while graph.atoms.len() < target {
        let attach_points: Vec<usize> = (0..graph.atoms.len())
            .filter(|&a| budget.free(a) >= 1)
            .collect();
        let Some(&parent) = attach_points.get(rng.gen_range(0..attach_points.len().max(1)))
        else {
            break;
        };
        if graph.atoms.len() + 6 <= target && rng.gen_bool(0.15) {
            add_aromatic_ring(rng, &mut graph, &mut budget, Some(parent));
            continue;
        }
        let element = pick_element(rng);
        let child = add_atom(rng, &mut graph, &mut budget, element);
        let max_order = budget.free(parent).min(budget.free(child)).min(3);
        let order = match rng.gen_range(0..100) {
            0..=74 => 1,
            75..=94 => 2.min(max_order),
            _ => 3.min(max_order),
        }
        .max(1)
        .min(max_order);
        bond(&mut graph, &mut budget, parent, child, order);
    }

    // Occasionally close an extra ring between distant atoms.
    if graph.atoms.len() >= 4 && rng.gen_bool(0.3) {
        let candidates: Vec<usize> = (0..graph.atoms.len())
            .filter(|&a| budget.free(a) >= 1 && !graph.atoms[a].aromatic)
            .collect();
        if candidates.len() >= 2 {
            let a = candidates[rng.gen_range(0..candidates.len())];
            let b = candidates[rng.gen_range(0..candidates.len())];
            if a != b && !graph.has_bond(a, b) {
                bond(&mut graph, &mut budget, a, b, 1);
            }
        }
    }

    decorate(rng, &mut graph, &mut budget);
    graph
}

/// Convenience wrapper returning a written SMILES string.
pub fn random_smiles(rng: &mut impl Rng, max_atoms: usize) -> String {
    crate::writer::to_smiles(&random_molecule(rng, max_atoms))
        .expect("generated molecule is writable")
}

fn add_atom(rng: &mut impl Rng, graph: &mut MolGraph, budget: &mut Budget, element: &str) -> usize {
    let mut atom = AtomDescriptor::bare(element);
    if matches!(element, "N" | "O") && rng.gen_bool(0.04) {
        atom.charge = if element == "N" { 1 } else { -1 };
    }
    let cap = element_cap(&atom.element, false, atom.charge);
    graph.atoms.push(atom);
    budget.capacity.push(cap);
    budget.used.push(0);
    graph.atoms.len() - 1
}

fn add_aromatic_ring(
    rng: &mut impl Rng,
    graph: &mut MolGraph,
    budget: &mut Budget,
    attach_to: Option<usize>,
) {
    let first = graph.atoms.len();
    let n_pos = if rng.gen_bool(0.4) {
        Some(rng.gen_range(0..6))
    } else {
        None
    };
    for k in 0..6 {
        let element = if n_pos == Some(k) { "N" } else { "C" };
        let mut atom = AtomDescriptor::aromatic(element);
        if element == "N" && rng.gen_bool(0.3) {
            atom.explicit_h = 1;
        }
        let cap = element_cap(element, true, 0);
        graph.atoms.push(atom.clone());
        budget.capacity.push(cap);
        budget.used.push(atom.explicit_h);
    }
    for k in 0..6 {
        let a = first + k;
        let b = first + (k + 1) % 6;
        graph.bonds.push(Bond {
            i: a,
            j: b,
            order: BondOrder::Aromatic,
        });
        budget.used[a] += 1;
        budget.used[b] += 1;
    }
    if let Some(parent) = attach_to {
        let carbons: Vec<usize> = (first..first + 6)
            .filter(|&a| budget.free(a) >= 1)
            .collect();
        if budget.free(parent) >= 1 && !carbons.is_empty() {
            let site = carbons[rng.gen_range(0..carbons.len())];
            bond(graph, budget, parent, site, 1);
        }
    }
}

fn bond(graph: &mut MolGraph, budget: &mut Budget, a: usize, b: usize, order_units: u32) {
    let order = match order_units {
        1 => BondOrder::Single,
        2 => BondOrder::Double,
        _ => BondOrder::Triple,
    };
    graph.bonds.push(Bond { i: a, j: b, order });
    budget.used[a] += order_units;
    budget.used[b] += order_units;
}

fn decorate(rng: &mut impl Rng, graph: &mut MolGraph, budget: &mut Budget) {
    let adj = graph.adjacency();
    for (idx, atom) in graph.atoms.iter_mut().enumerate() {
        let free = budget.capacity[idx].saturating_sub(budget.used[idx]);
        if free > 0 && !atom.aromatic && rng.gen_bool(0.12) {
            atom.explicit_h = rng.gen_range(1..=free);
            budget.used[idx] += atom.explicit_h;
        }
        if atom.element == "C"
            && !atom.aromatic
            && atom.charge == 0
            && adj[idx].len() >= 3
            && rng.gen_bool(0.15)
        {
            atom.chirality = if rng.gen_bool(0.5) {
                Chirality::Clockwise
            } else {
                Chirality::Anticlockwise
            };
        }
    }
}
