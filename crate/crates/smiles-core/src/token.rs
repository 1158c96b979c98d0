use crate::atom::{is_element, AtomDescriptor, Chirality};
use crate::error::{Result, SmilesError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Atom,
    Bond,
    RingClosure,
    BranchOpen,
    BranchClose,
    Dot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source text; concatenating all token texts reproduces the input.
    pub text: String,
    /// Present iff kind == Atom.
    pub atom: Option<AtomDescriptor>,
    /// Index of this token in the sequence.
    pub position: usize,
}

impl Token {
    pub fn is_atom(&self) -> bool {
        self.kind == TokenKind::Atom
    }

    pub fn atom_map(&self) -> Option<u32> {
        self.atom.as_ref().and_then(|a| a.atom_map)
    }

    /// Ring closure number: '4' -> 4, "%12" -> 12. Bond prefix not included
    /// in the token; "=1" is two tokens.
    pub fn ring_number(&self) -> Option<u16> {
        if self.kind != TokenKind::RingClosure {
            return None;
        }
        let digits = self.text.strip_prefix('%').unwrap_or(&self.text);
        digits.parse().ok()
    }
}

pub type TokenSequence = Vec<Token>;

/// Split a SMILES string into tokens. Bracket atoms and two-letter organic
/// elements are single tokens; `%nn` ring closures are single tokens.
pub fn tokenize(smiles: &str) -> Result<TokenSequence> {
    if smiles.is_empty() {
        return Err(SmilesError::EmptyInput);
    }
    if !smiles.is_ascii() {
        let (pos, ch) = smiles
            .char_indices()
            .find(|(_, c)| !c.is_ascii())
            .expect("non-ascii char present");
        return Err(SmilesError::IllegalCharacter(pos, ch));
    }

    let bytes = smiles.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let b = bytes[i];
        let (kind, atom, len) = match b {
            b'[' => {
                let close = smiles[i..]
                    .find(']')
                    .map(|off| i + off)
                    .ok_or(SmilesError::UnterminatedBracket(i))?;
                let atom = parse_bracket(&smiles[i + 1..close], i + 1)?;
                (TokenKind::Atom, Some(atom), close + 1 - i)
            }
            b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => (TokenKind::Bond, None, 1),
            b'(' => (TokenKind::BranchOpen, None, 1),
            b')' => (TokenKind::BranchClose, None, 1),
            b'.' => (TokenKind::Dot, None, 1),
            b'0'..=b'9' => (TokenKind::RingClosure, None, 1),
            b'%' => {
                if i + 2 < bytes.len()
                    && bytes[i + 1].is_ascii_digit()
                    && bytes[i + 2].is_ascii_digit()
                {
                    (TokenKind::RingClosure, None, 3)
                } else {
                    return Err(SmilesError::IllegalCharacter(i, '%'));
                }
            }
            b'A'..=b'Z' => {
                // Bare atoms: organic subset only, longest match first.
                let two = if i + 1 < bytes.len() {
                    &smiles[i..i + 2]
                } else {
                    ""
                };
                if two == "Cl" || two == "Br" {
                    (TokenKind::Atom, Some(AtomDescriptor::bare(two)), 2)
                } else {
                    let one = &smiles[i..i + 1];
                    if matches!(one, "B" | "C" | "N" | "O" | "P" | "S" | "F" | "I") {
                        (TokenKind::Atom, Some(AtomDescriptor::bare(one)), 1)
                    } else {
                        return Err(SmilesError::IllegalCharacter(i, b as char));
                    }
                }
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                let sym = smiles[i..i + 1].to_ascii_uppercase();
                (TokenKind::Atom, Some(AtomDescriptor::aromatic(&sym)), 1)
            }
            other => return Err(SmilesError::IllegalCharacter(i, other as char)),
        };
        tokens.push(Token {
            kind,
            text: smiles[start..start + len].to_string(),
            atom,
            position: tokens.len(),
        });
        i = start + len;
    }
    Ok(tokens)
}

/// Parse the interior of a bracket atom: isotope? symbol chirality? hcount?
/// charge? map?. `offset` is the byte position of the interior for errors.
fn parse_bracket(body: &str, offset: usize) -> Result<AtomDescriptor> {
    let bytes = body.as_bytes();
    let bad = |at: usize| {
        SmilesError::IllegalCharacter(
            offset + at,
            body[at..].chars().next().unwrap_or(']'),
        )
    };
    let mut i = 0;

    let mut isotope = None;
    let iso_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i > iso_start {
        isotope = Some(body[iso_start..i].parse().map_err(|_| bad(iso_start))?);
    }

    let (element, aromatic, sym_len) = read_symbol(&body[i..]).ok_or_else(|| bad(i))?;
    i += sym_len;

    let mut chirality = Chirality::None;
    if bytes.get(i) == Some(&b'@') {
        if bytes.get(i + 1) == Some(&b'@') {
            chirality = Chirality::Clockwise;
            i += 2;
        } else {
            chirality = Chirality::Anticlockwise;
            i += 1;
        }
    }

    let mut explicit_h = 0;
    if bytes.get(i) == Some(&b'H') {
        i += 1;
        let d_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        explicit_h = if i > d_start {
            body[d_start..i].parse().map_err(|_| bad(d_start))?
        } else {
            1
        };
    }

    let mut charge: i32 = 0;
    while let Some(&sign) = bytes.get(i) {
        if sign != b'+' && sign != b'-' {
            break;
        }
        i += 1;
        let d_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let magnitude: i32 = if i > d_start {
            body[d_start..i].parse().map_err(|_| bad(d_start))?
        } else {
            1
        };
        charge += if sign == b'+' { magnitude } else { -magnitude };
    }

    let mut atom_map = None;
    if bytes.get(i) == Some(&b':') {
        i += 1;
        let d_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == d_start {
            return Err(bad(d_start.min(body.len())));
        }
        atom_map = Some(body[d_start..i].parse().map_err(|_| bad(d_start))?);
    }

    if i != bytes.len() {
        return Err(bad(i));
    }

    Ok(AtomDescriptor {
        element,
        aromatic,
        charge,
        explicit_h,
        chirality,
        isotope,
        atom_map,
    })
}

/// Read an element symbol at the start of `s`. Lowercase symbols (c, n, o,
/// s, p, b, se, as) set the aromatic flag; uppercase ones are matched
/// longest-first against the periodic table.
fn read_symbol(s: &str) -> Option<(String, bool, usize)> {
    let bytes = s.as_bytes();
    let first = *bytes.first()?;
    if first.is_ascii_lowercase() {
        let two = if s.len() >= 2 { &s[..2] } else { "" };
        if two == "se" || two == "as" {
            let mut sym = two.to_string();
            sym[..1].make_ascii_uppercase();
            return Some((sym, true, 2));
        }
        if matches!(first, b'b' | b'c' | b'n' | b'o' | b'p' | b's') {
            return Some((s[..1].to_ascii_uppercase(), true, 1));
        }
        return None;
    }
    if s.len() >= 2 && bytes[1].is_ascii_lowercase() {
        let two = &s[..2];
        if is_element(two) {
            return Some((two.to_string(), false, 2));
        }
    }
    let one = &s[..1];
    if is_element(one) {
        return Some((one.to_string(), false, 1));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(smiles: &str) -> Vec<String> {
        tokenize(smiles).unwrap().iter().map(|t| t.text.clone()).collect()
    }

    #[test]
    fn benzene_is_eight_tokens() {
        let toks = tokenize("c1ccccc1").unwrap();
        assert_eq!(toks.len(), 8);
        assert_eq!(toks[0].kind, TokenKind::Atom);
        assert!(toks[0].atom.as_ref().unwrap().aromatic);
        assert_eq!(toks[1].kind, TokenKind::RingClosure);
    }

    #[test]
    fn bracket_atom_is_one_token() {
        let toks = tokenize("[OH]").unwrap();
        assert_eq!(toks.len(), 1);
        let a = toks[0].atom.as_ref().unwrap();
        assert_eq!(a.element, "O");
        assert_eq!(a.explicit_h, 1);
    }

    #[test]
    fn mapped_atom_and_two_letter_element() {
        let toks = tokenize("[CH3:1]Br").unwrap();
        assert_eq!(toks.len(), 2);
        let a = toks[0].atom.as_ref().unwrap();
        assert_eq!(a.atom_map, Some(1));
        assert_eq!(a.explicit_h, 3);
        assert_eq!(toks[1].atom.as_ref().unwrap().element, "Br");
    }

    #[test]
    fn concatenation_reconstructs_input() {
        for s in ["CC(=O)Oc1ccccc1C(=O)O", "[13CH4]", "C%12CC%12", "F/C=C/F"] {
            assert_eq!(texts(s).concat(), s);
        }
    }

    #[test]
    fn charge_forms() {
        let a = tokenize("[O-]").unwrap()[0].atom.clone().unwrap();
        assert_eq!(a.charge, -1);
        let a = tokenize("[Ca+2]").unwrap()[0].atom.clone().unwrap();
        assert_eq!(a.charge, 2);
        let a = tokenize("[Fe++]").unwrap()[0].atom.clone().unwrap();
        assert_eq!(a.charge, 2);
    }

    #[test]
    fn chirality_forms() {
        let a = tokenize("[C@@H]").unwrap()[0].atom.clone().unwrap();
        assert_eq!(a.chirality, Chirality::Clockwise);
        assert_eq!(a.explicit_h, 1);
        let a = tokenize("[C@H]").unwrap()[0].atom.clone().unwrap();
        assert_eq!(a.chirality, Chirality::Anticlockwise);
    }

    #[test]
    fn errors() {
        assert_eq!(tokenize(""), Err(SmilesError::EmptyInput));
        assert_eq!(tokenize("[OH"), Err(SmilesError::UnterminatedBracket(0)));
        assert!(matches!(
            tokenize("C?C"),
            Err(SmilesError::IllegalCharacter(1, '?'))
        ));
        assert!(matches!(tokenize("Xy"), Err(SmilesError::IllegalCharacter(0, 'X'))));
    }

    #[test]
    fn percent_ring_closure() {
        let toks = tokenize("C%12CC%12").unwrap();
        assert_eq!(toks[1].ring_number(), Some(12));
    }

    #[test]
    fn aromatic_selenium_needs_brackets() {
        let a = tokenize("[se]").unwrap()[0].atom.clone().unwrap();
        assert_eq!(a.element, "Se");
        assert!(a.aromatic);
    }
}
