//! Bidirectional conversion between SMILES and the decomposed element-token
//! form. A bracket atom becomes an element token followed by modifier
//! tokens: `&` lowercase/aromatic, `@` chiral (doubled for `@@`), `H` per
//! explicit hydrogen, `+`/`$` per positive/negative charge unit. Isotope
//! digits pass through as structural digit tokens before the element; atom
//! maps are never emitted.

use smiles_core::atom::is_element;
use smiles_core::{render_atom, tokenize, AtomDescriptor, Chirality, TokenKind};

use crate::error::{CsmilesError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CSmilesKind {
    /// Uppercase-normalized element symbol; aromaticity is carried by a
    /// following `&`.
    Element,
    /// One of the five specials: & + $ H @.
    Special,
    /// Bonds, digits, parentheses, dots, percent ring closures.
    Structural,
    /// `<pad>` `<unk>` `<sos>` `<eos>`.
    Sentinel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CSmilesToken {
    pub text: String,
    pub kind: CSmilesKind,
}

impl CSmilesToken {
    fn element(symbol: &str) -> Self {
        CSmilesToken {
            text: symbol.to_string(),
            kind: CSmilesKind::Element,
        }
    }

    fn special(text: &str) -> Self {
        CSmilesToken {
            text: text.to_string(),
            kind: CSmilesKind::Special,
        }
    }

    fn structural(text: &str) -> Self {
        CSmilesToken {
            text: text.to_string(),
            kind: CSmilesKind::Structural,
        }
    }
}

/// Classify a bare token text. `H` is reported as Special; the decoder
/// decides from position whether it acts as an element.
pub fn classify(text: &str) -> Result<CSmilesKind> {
    match text {
        "&" | "+" | "$" | "H" | "@" => Ok(CSmilesKind::Special),
        "(" | ")" | "-" | "=" | "#" | ":" | "/" | "\\" | "." => Ok(CSmilesKind::Structural),
        "<pad>" | "<unk>" | "<sos>" | "<eos>" => Ok(CSmilesKind::Sentinel),
        t if t.chars().all(|c| c.is_ascii_digit()) && !t.is_empty() => Ok(CSmilesKind::Structural),
        t if t.starts_with('%') && t[1..].chars().all(|c| c.is_ascii_digit()) && t.len() == 3 => {
            Ok(CSmilesKind::Structural)
        }
        t if t.starts_with("<RC_") && t.ends_with('>') => Ok(CSmilesKind::Sentinel),
        t if is_element(t) => Ok(CSmilesKind::Element),
        t => Err(CsmilesError::MalformedSequence {
            position: 0,
            reason: format!("unknown token {t:?}"),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CSmilesSequence {
    pub tokens: Vec<CSmilesToken>,
    /// For each token, the index of the raw SMILES token it came from.
    pub source_span: Vec<usize>,
}

impl CSmilesSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Space-separated token texts, the CLI interchange form.
    pub fn to_line(&self) -> String {
        self.texts().join(" ")
    }

    /// Positions whose tokens came from raw token `raw_idx`.
    pub fn span_of(&self, raw_idx: usize) -> Vec<usize> {
        self.source_span
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == raw_idx)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn decode(&self) -> Result<String> {
        decode(&self.tokens)
    }
}

/// Decompose one atom. Emission order is fixed: isotope digits, element,
/// `&`, `@`s, `H`s, then charge tokens.
pub fn encode_atom(atom: &AtomDescriptor) -> Vec<CSmilesToken> {
    let mut out = Vec::new();
    if let Some(iso) = atom.isotope {
        for d in iso.to_string().chars() {
            out.push(CSmilesToken::structural(&d.to_string()));
        }
    }
    out.push(CSmilesToken::element(&atom.element));
    if atom.aromatic {
        out.push(CSmilesToken::special("&"));
    }
    match atom.chirality {
        Chirality::None => {}
        Chirality::Anticlockwise => out.push(CSmilesToken::special("@")),
        Chirality::Clockwise => {
            out.push(CSmilesToken::special("@"));
            out.push(CSmilesToken::special("@"));
        }
    }
    for _ in 0..atom.explicit_h {
        out.push(CSmilesToken::special("H"));
    }
    let charge_token = if atom.charge > 0 { "+" } else { "$" };
    for _ in 0..atom.charge.unsigned_abs() {
        out.push(CSmilesToken::special(charge_token));
    }
    out
}

/// Convert a SMILES string to its decomposed token sequence. The input must
/// tokenize and parse; structural tokens pass through unchanged and
/// `source_span` records each token's raw origin.
pub fn encode(smiles: &str) -> Result<CSmilesSequence> {
    let raw = tokenize(smiles)?;
    smiles_core::parse(&raw)?;
    let mut seq = CSmilesSequence::default();
    for (raw_idx, tok) in raw.iter().enumerate() {
        match tok.kind {
            TokenKind::Atom => {
                let atom = tok.atom.as_ref().expect("atom token has descriptor");
                for ct in encode_atom(atom) {
                    seq.tokens.push(ct);
                    seq.source_span.push(raw_idx);
                }
            }
            _ => {
                seq.tokens.push(CSmilesToken::structural(&tok.text));
                seq.source_span.push(raw_idx);
            }
        }
    }
    Ok(seq)
}

struct AtomRun {
    element: String,
    aromatic: bool,
    at_count: u32,
    h_count: u32,
    charge: i32,
    isotope: Option<u32>,
    position: usize,
}

impl AtomRun {
    fn render(self, out: &mut String) -> Result<()> {
        if self.at_count > 2 {
            return Err(CsmilesError::MalformedSequence {
                position: self.position,
                reason: format!("{} chirality tokens on one atom", self.at_count),
            });
        }
        let desc = AtomDescriptor {
            element: self.element,
            aromatic: self.aromatic,
            charge: self.charge,
            explicit_h: self.h_count,
            chirality: match self.at_count {
                0 => Chirality::None,
                1 => Chirality::Anticlockwise,
                _ => Chirality::Clockwise,
            },
            isotope: self.isotope,
            atom_map: None,
        };
        out.push_str(&render_atom(&desc));
        Ok(())
    }
}

/// Reassemble a SMILES string from decomposed tokens. An atom regains
/// brackets only when it kept a modifier that needs them. Digit tokens are
/// ring closures except where a ring closure cannot occur (sequence start,
/// after `(` or `.`), where they are read as isotope digits; encoded
/// isotopes elsewhere in a molecule do not survive this round trip, which
/// keeps the special-token set at five.
pub fn decode(tokens: &[CSmilesToken]) -> Result<String> {
    let mut out = String::new();
    let mut run: Option<AtomRun> = None;
    let mut isotope_digits = String::new();
    // Ring closures are impossible only at the very start and right after
    // '(' or '.'.
    let mut ring_possible = false;

    let flush = |run: &mut Option<AtomRun>, out: &mut String| -> Result<()> {
        if let Some(r) = run.take() {
            r.render(out)?;
        }
        Ok(())
    };

    for (pos, tok) in tokens.iter().enumerate() {
        let text = tok.text.as_str();
        let kind = classify(text).map_err(|_| CsmilesError::MalformedSequence {
            position: pos,
            reason: format!("unknown token {text:?}"),
        })?;
        if kind == CSmilesKind::Sentinel {
            return Err(CsmilesError::MalformedSequence {
                position: pos,
                reason: format!("sentinel {text:?} inside a decodable sequence"),
            });
        }

        let is_digit_run = text.chars().all(|c| c.is_ascii_digit());
        if is_digit_run && (!ring_possible || !isotope_digits.is_empty()) {
            isotope_digits.push_str(text);
            continue;
        }

        match text {
            "&" | "@" | "+" | "$" => {
                let Some(r) = run.as_mut() else {
                    return Err(CsmilesError::DanglingModifier {
                        position: pos,
                        text: text.to_string(),
                    });
                };
                match text {
                    "&" => r.aromatic = true,
                    "@" => r.at_count += 1,
                    "+" => r.charge += 1,
                    _ => r.charge -= 1,
                }
            }
            "H" => {
                // H after a non-hydrogen element is a hydrogen-count
                // modifier; anywhere else it starts a hydrogen atom.
                match run.as_mut() {
                    Some(r) if r.element != "H" => r.h_count += 1,
                    _ => {
                        flush(&mut run, &mut out)?;
                        run = Some(AtomRun {
                            element: "H".to_string(),
                            aromatic: false,
                            at_count: 0,
                            h_count: 0,
                            charge: 0,
                            isotope: take_isotope(&mut isotope_digits, pos)?,
                            position: pos,
                        });
                        ring_possible = true;
                    }
                }
            }
            _ if kind == CSmilesKind::Element => {
                flush(&mut run, &mut out)?;
                run = Some(AtomRun {
                    element: text.to_string(),
                    aromatic: false,
                    at_count: 0,
                    h_count: 0,
                    charge: 0,
                    isotope: take_isotope(&mut isotope_digits, pos)?,
                    position: pos,
                });
                ring_possible = true;
            }
            _ => {
                // Structural: flush the open atom and copy the text through.
                if !isotope_digits.is_empty() {
                    return Err(CsmilesError::MalformedSequence {
                        position: pos,
                        reason: "isotope digits not followed by an element".to_string(),
                    });
                }
                flush(&mut run, &mut out)?;
                out.push_str(text);
                ring_possible = !matches!(text, "(" | ".");
            }
        }
    }

    if !isotope_digits.is_empty() {
        return Err(CsmilesError::MalformedSequence {
            position: tokens.len(),
            reason: "trailing isotope digits".to_string(),
        });
    }
    flush(&mut run, &mut out)?;
    Ok(out)
}

fn take_isotope(digits: &mut String, pos: usize) -> Result<Option<u32>> {
    if digits.is_empty() {
        return Ok(None);
    }
    let v = digits
        .parse()
        .map_err(|_| CsmilesError::MalformedSequence {
            position: pos,
            reason: format!("isotope {digits:?} out of range"),
        })?;
    digits.clear();
    Ok(Some(v))
}

/// Parse a line of space-separated token texts.
pub fn tokens_from_line(line: &str) -> Result<Vec<CSmilesToken>> {
    line.split_whitespace()
        .map(|t| {
            classify(t).map(|kind| CSmilesToken {
                text: t.to_string(),
                kind,
            })
        })
        .collect()
}
