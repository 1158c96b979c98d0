use crate::graph::MolGraph;

/// One atom exceeding its allowed valence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValenceViolation {
    pub atom: usize,
    pub element: String,
    pub total: u32,
    pub max_allowed: u32,
}

/// Allowed valences per element. Charge shifts the set by +charge for
/// cations on N/O/S and by -|charge| for anions. Elements not listed are
/// left unchecked. Under-valence is fine (implicit hydrogens fill it);
/// only exceeding the maximum is a violation, with one slack unit per
/// aromatic atom standing in for kekulization.
fn base_valences(element: &str) -> Option<&'static [u32]> {
    Some(match element {
        "B" => &[3],
        "C" => &[4],
        "N" => &[3, 5],
        "O" => &[2],
        "P" => &[3, 5],
        "S" => &[2, 4, 6],
        "F" | "Cl" | "Br" | "I" => &[1],
        "Se" => &[2, 4, 6],
        "Si" => &[4],
        _ => return None,
    })
}

/// Reader-semantics hydrogen filling: atoms with no stated H count get the
/// implicit count a bare SMILES atom would imply (smallest allowed valence
/// covering the bond sum, minus the bond sum; aromatic atoms give up one
/// unit to the ring). Atoms that already state hydrogens, and elements with
/// no valence entry, are left alone. Used to compare bracket-heavy
/// atom-mapped molecules against bare-form predictions.
pub fn fill_implicit_hydrogens(graph: &MolGraph) -> MolGraph {
    let mut sums = vec![0u32; graph.atoms.len()];
    for b in &graph.bonds {
        sums[b.i] += b.order.valence_units();
        sums[b.j] += b.order.valence_units();
    }
    let mut out = graph.clone();
    for (idx, atom) in out.atoms.iter_mut().enumerate() {
        if atom.explicit_h > 0 {
            continue;
        }
        let Some(base) = base_valences(&atom.element) else {
            continue;
        };
        let shift: i64 = if atom.charge > 0 {
            if matches!(atom.element.as_str(), "N" | "O" | "S") {
                i64::from(atom.charge)
            } else {
                0
            }
        } else {
            i64::from(atom.charge)
        };
        let bond_sum = i64::from(sums[idx]);
        let target = base
            .iter()
            .map(|&v| i64::from(v) + shift)
            .filter(|&v| v >= bond_sum)
            .min();
        let Some(target) = target else {
            continue;
        };
        let mut h = target - bond_sum;
        if atom.aromatic && h > 0 {
            h -= 1;
        }
        atom.explicit_h = h.max(0) as u32;
    }
    out
}

pub fn check_valence(graph: &MolGraph) -> Vec<ValenceViolation> {
    let mut sums = vec![0u32; graph.atoms.len()];
    for b in &graph.bonds {
        sums[b.i] += b.order.valence_units();
        sums[b.j] += b.order.valence_units();
    }

    let mut violations = Vec::new();
    for (idx, atom) in graph.atoms.iter().enumerate() {
        let Some(base) = base_valences(&atom.element) else {
            continue;
        };
        let shift: i64 = if atom.charge > 0 {
            if matches!(atom.element.as_str(), "N" | "O" | "S") {
                i64::from(atom.charge)
            } else {
                0
            }
        } else {
            i64::from(atom.charge)
        };
        let max_allowed = base
            .iter()
            .map(|&v| (i64::from(v) + shift).max(0) as u32)
            .max()
            .expect("valence set non-empty");
        let slack = u32::from(atom.aromatic);
        let total = sums[idx] + atom.explicit_h;
        if total > max_allowed + slack {
            violations.push(ValenceViolation {
                atom: idx,
                element: atom.element.clone(),
                total,
                max_allowed: max_allowed + slack,
            });
        }
    }
    violations
}
