//! Reaction file ingestion and conversion to model-ready examples.
//!
//! File format: one reaction per line, `reactants>>product` with atom maps,
//! optionally preceded by a class column and a tab. A middle reagents field
//! (`reactants>reagents>product`) is dropped. Lines that fail to parse are
//! skipped with a counted warning; the retro direction makes the product
//! the source side.

use std::collections::HashMap;
use std::path::Path;

use csmiles::{build_sam, build_vocab, copy_labels, encode, Vocabulary, EOS, SOS};
use seq2seq::{SpecialIds, TrainExample};
use smiles_core::parse_smiles;

use crate::error::{io_err, CliError, Result};

pub const SPECIAL_IDS: SpecialIds = SpecialIds { sos: SOS, eos: EOS };

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionRecord {
    /// Atom-mapped product (the model's source side).
    pub product: String,
    /// Atom-mapped reactants, '.'-joined (the target side).
    pub reactants: String,
    pub reaction_class: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub records: Vec<ReactionRecord>,
    pub skipped: usize,
}

fn parse_line(line: &str) -> std::result::Result<ReactionRecord, String> {
    let line = line.trim();
    let (class_part, reaction_part) = match line.split_once('\t') {
        Some((cls, rest)) => (Some(cls), rest),
        None => (None, line),
    };
    let reaction_class = match class_part {
        Some(c) => Some(
            c.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad class column {c:?}"))?,
        ),
        None => None,
    };
    let fields: Vec<&str> = reaction_part.split('>').collect();
    let (reactants, product) = match fields.as_slice() {
        [r, _, p] => (r.trim(), p.trim()),
        [r, p] => (r.trim(), p.trim()),
        _ => return Err("expected reactants>>product".to_string()),
    };
    if reactants.is_empty() || product.is_empty() {
        return Err("empty side".to_string());
    }
    Ok(ReactionRecord {
        product: product.to_string(),
        reactants: reactants.to_string(),
        reaction_class,
    })
}

fn validate_record(rec: &ReactionRecord) -> std::result::Result<(), String> {
    parse_smiles(&rec.product).map_err(|e| format!("product: {e}"))?;
    parse_smiles(&rec.reactants).map_err(|e| format!("reactants: {e}"))?;
    for side in [&rec.product, &rec.reactants] {
        let mut seen = HashMap::new();
        for tok in smiles_core::tokenize(side).map_err(|e| e.to_string())? {
            if let Some(map) = tok.atom_map() {
                if seen.insert(map, ()).is_some() {
                    return Err(format!("duplicate atom map {map}"));
                }
            }
        }
    }
    Ok(())
}

pub fn parse_reaction_lines(text: &str, origin: &Path) -> Result<LoadReport> {
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect();
    let mut records = Vec::with_capacity(lines.len());
    let mut skipped = 0usize;
    for (idx, line) in lines.iter().enumerate() {
        match parse_line(line).and_then(|rec| {
            validate_record(&rec)?;
            Ok(rec)
        }) {
            Ok(rec) => records.push(rec),
            Err(reason) => {
                skipped += 1;
                log::warn!("{}:{}: skipped: {reason}", origin.display(), idx + 1);
            }
        }
    }
    if records.is_empty() {
        return Err(CliError::AllLinesInvalid(origin.to_path_buf()));
    }
    Ok(LoadReport { records, skipped })
}

pub fn load_reactions(path: &Path) -> Result<LoadReport> {
    if !path.exists() {
        return Err(CliError::FileNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_reaction_lines(&text, path)
}

pub fn class_token(class: u32) -> String {
    format!("<RC_{class}>")
}

/// Decomposed token texts of one training pair. The class token, when
/// present, is prepended to the product side.
pub fn pair_token_texts(
    product: &str,
    reactants: &str,
    class: Option<u32>,
) -> Result<(Vec<String>, Vec<String>)> {
    let mut src: Vec<String> = Vec::new();
    if let Some(c) = class {
        src.push(class_token(c));
    }
    src.extend(encode(product)?.texts().into_iter().map(String::from));
    let tgt: Vec<String> = encode(reactants)?
        .texts()
        .into_iter()
        .map(String::from)
        .collect();
    Ok((src, tgt))
}

/// Vocabulary over the training pairs (canonical, unaugmented strings),
/// including class tokens when conditioning is on.
pub fn build_dataset_vocab(
    records: &[ReactionRecord],
    class_conditioning: bool,
) -> Result<Vocabulary> {
    let mut sequences: Vec<Vec<String>> = Vec::with_capacity(records.len() * 2);
    for rec in records {
        let class = if class_conditioning {
            rec.reaction_class
        } else {
            None
        };
        let (src, tgt) = pair_token_texts(&rec.product, &rec.reactants, class)?;
        sequences.push(src);
        sequences.push(tgt);
    }
    Ok(build_vocab(sequences)?)
}

/// Assemble one model example: ids, decomposed alignment (a zero column is
/// prepended for the class token), and copy labels.
pub fn pair_to_example(
    product: &str,
    reactants: &str,
    class: Option<u32>,
    vocab: &Vocabulary,
) -> Result<TrainExample> {
    let sam = build_sam(product, reactants)?;
    let labels = copy_labels(&sam);
    let (src_texts, tgt_texts) = pair_token_texts(product, reactants, class)?;
    let src_ids = vocab.encode_texts(&src_texts);
    let tgt_ids = vocab.encode_texts(&tgt_texts);

    let class_offset = usize::from(class.is_some());
    let src_len = sam.cols + class_offset;
    debug_assert_eq!(src_ids.len(), src_len);
    debug_assert_eq!(tgt_ids.len(), sam.rows);

    let mut dense = vec![0.0f64; sam.rows * src_len];
    for (r, c) in sam.ones() {
        dense[r * src_len + c + class_offset] = 1.0;
    }
    Ok(TrainExample {
        src_ids,
        tgt_ids,
        sam: dense,
        copy_y: labels.y,
    })
}

/// Source-side ids for prediction: the product of a reaction line or a bare
/// molecule line.
pub fn product_to_src_ids(
    line: &str,
    class_conditioning: bool,
    vocab: &Vocabulary,
) -> Result<(Vec<usize>, String)> {
    let (record, product, class) = match parse_line(line) {
        Ok(rec) => {
            let p = rec.product.clone();
            let c = rec.reaction_class;
            (Some(rec), p, c)
        }
        Err(_) => (None, line.trim().to_string(), None),
    };
    let _ = record;
    let class = if class_conditioning { class } else { None };
    let mut texts: Vec<String> = Vec::new();
    if let Some(c) = class {
        texts.push(class_token(c));
    }
    texts.extend(encode(&product)?.texts().into_iter().map(String::from));
    Ok((vocab.encode_texts(&texts), product))
}

pub const SPECIALS: SpecialIds = SPECIAL_IDS;

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn line_formats() {
        let rec = parse_line("[CH3:1]Br.[OH2:2]>>[CH3:1][OH:2]").unwrap();
        assert_eq!(rec.product, "[CH3:1][OH:2]");
        assert_eq!(rec.reactants, "[CH3:1]Br.[OH2:2]");
        assert_eq!(rec.reaction_class, None);

        let rec = parse_line("3\t[CH3:1]Br>>[CH3:1]O").unwrap();
        assert_eq!(rec.reaction_class, Some(3));

        // Reagents field dropped.
        let rec = parse_line("[CH3:1]Br>CCO>[CH3:1]O").unwrap();
        assert_eq!(rec.reactants, "[CH3:1]Br");
        assert_eq!(rec.product, "[CH3:1]O");

        assert!(parse_line("no separators here").is_err());
    }

    #[test]
    fn malformed_lines_are_counted() {
        let text = "[CH3:1]Br>>[CH3:1]O\nbroken line\n[CH3:1]I>>[CH3:1]O\n";
        let report = parse_reaction_lines(text, &PathBuf::from("test.txt")).unwrap();
        assert_eq!(report.records.len(), 2);
        assert_eq!(report.skipped, 1);
    }

    #[test]
    fn duplicate_maps_are_skipped() {
        let text = "[CH3:1][CH3:1]>>[CH3:1]C\n[CH3:1]Br>>[CH3:1]O\n";
        let report = parse_reaction_lines(text, &PathBuf::from("t")).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.skipped, 1);
    }

    #[test]
    fn all_invalid_is_an_error() {
        let text = "garbage\nmore garbage\n";
        assert!(matches!(
            parse_reaction_lines(text, &PathBuf::from("t")),
            Err(CliError::AllLinesInvalid(_))
        ));
    }

    #[test]
    fn example_assembly_with_class_token() {
        let records = vec![ReactionRecord {
            product: "[CH3:1][OH:2]".to_string(),
            reactants: "[CH3:1]Br".to_string(),
            reaction_class: Some(2),
        }];
        let vocab = build_dataset_vocab(&records, true).unwrap();
        assert!(vocab.id("<RC_2>").is_some());

        let ex = pair_to_example(
            &records[0].product,
            &records[0].reactants,
            Some(2),
            &vocab,
        )
        .unwrap();
        // src: <RC_2> C H H H O H ; tgt: C H H H Br
        assert_eq!(ex.src_ids.len(), 7);
        assert_eq!(ex.tgt_ids.len(), 5);
        // Class column is never aligned.
        for r in 0..ex.tgt_ids.len() {
            assert_eq!(ex.sam[r * 7], 0.0);
        }
        // The C/H block aligns diagonally after the class column.
        assert_eq!(ex.sam[0 * 7 + 1], 1.0);
        assert_eq!(ex.sam[1 * 7 + 2], 1.0);
        assert_eq!(ex.copy_y, vec![0, 0, 0, 0, 1]);
    }
}
