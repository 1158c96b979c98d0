/// Tetrahedral chirality flag as written in a bracket atom. Preserved as a
/// label only; no stereo perception happens anywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Chirality {
    #[default]
    None,
    /// `@`
    Anticlockwise,
    /// `@@`
    Clockwise,
}

impl Chirality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Chirality::None => "",
            Chirality::Anticlockwise => "@",
            Chirality::Clockwise => "@@",
        }
    }
}

/// Everything a single atom token carries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomDescriptor {
    /// Periodic symbol, uppercase-first form ("C", "Cl", "Se").
    pub element: String,
    pub aromatic: bool,
    pub charge: i32,
    pub explicit_h: u32,
    pub chirality: Chirality,
    pub isotope: Option<u32>,
    pub atom_map: Option<u32>,
}

impl AtomDescriptor {
    pub fn bare(element: &str) -> Self {
        AtomDescriptor {
            element: element.to_string(),
            aromatic: false,
            charge: 0,
            explicit_h: 0,
            chirality: Chirality::None,
            isotope: None,
            atom_map: None,
        }
    }

    pub fn aromatic(element: &str) -> Self {
        AtomDescriptor {
            aromatic: true,
            ..AtomDescriptor::bare(element)
        }
    }

    /// True when the atom can be written without brackets: organic-subset
    /// element, no decorations, and (if aromatic) a lowercase-able symbol.
    pub fn is_plain(&self) -> bool {
        self.charge == 0
            && self.explicit_h == 0
            && self.chirality == Chirality::None
            && self.isotope.is_none()
            && self.atom_map.is_none()
            && is_organic_subset(&self.element)
            && (!self.aromatic || is_bare_aromatic(&self.element))
    }
}

/// All element symbols accepted inside brackets.
pub const ELEMENTS: &[&str] = &[
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu",
];

/// Elements writable without brackets when undecorated.
pub const ORGANIC_SUBSET: &[&str] = &["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"];

/// Elements that may carry the aromatic flag.
pub const AROMATIC_ELEMENTS: &[&str] = &["B", "C", "N", "O", "P", "S", "Se", "As"];

/// Aromatic elements writable as bare lowercase symbols (se/as need brackets).
pub const BARE_AROMATIC: &[&str] = &["B", "C", "N", "O", "P", "S"];

pub fn is_element(symbol: &str) -> bool {
    ELEMENTS.contains(&symbol)
}

pub fn is_organic_subset(symbol: &str) -> bool {
    ORGANIC_SUBSET.contains(&symbol)
}

pub fn can_be_aromatic(symbol: &str) -> bool {
    AROMATIC_ELEMENTS.contains(&symbol)
}

pub fn is_bare_aromatic(symbol: &str) -> bool {
    BARE_AROMATIC.contains(&symbol)
}
