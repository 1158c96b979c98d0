//! Root-aligned augmentation: re-root the product at a random atom and
//! re-root each reactant molecule containing that atom's map counterpart at
//! the counterpart, leaving the other reactant molecules on their original
//! roots.

use rand::Rng;
use smiles_core::{parse_smiles, write_smiles, NeighborOrder};

use crate::dataset::ReactionRecord;
use crate::error::Result;

/// The canonical pair plus `factor` re-rooted variants.
pub fn augment(
    record: &ReactionRecord,
    factor: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(String, String)>> {
    let mut out = Vec::with_capacity(factor + 1);
    out.push((record.product.clone(), record.reactants.clone()));
    if factor == 0 {
        return Ok(out);
    }

    let product_graph = parse_smiles(&record.product)?;
    let reactant_graph = parse_smiles(&record.reactants)?;

    for _ in 0..factor {
        let root = rng.gen_range(0..product_graph.atoms.len());
        let new_product = write_smiles(&product_graph, root, NeighborOrder::Input)?;

        let root_map = product_graph.atoms[root].atom_map;
        let new_reactants = match root_map.and_then(|m| {
            reactant_graph
                .atoms
                .iter()
                .position(|a| a.atom_map == Some(m))
        }) {
            Some(counterpart) => {
                write_smiles(&reactant_graph, counterpart, NeighborOrder::Input)?
            }
            None => record.reactants.clone(),
        };
        out.push((new_product, new_reactants));
    }
    Ok(out)
}
