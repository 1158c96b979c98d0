use std::collections::HashMap;

use crate::error::{CsmilesError, Result};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const SOS: usize = 2;
pub const EOS: usize = 3;
pub const SENTINELS: [&str; 4] = ["<pad>", "<unk>", "<sos>", "<eos>"];

/// Token-text to dense-id table. Sentinels hold the four lowest ids; content
/// tokens follow ordered by descending count, ties by text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_of: HashMap<String, usize>,
    text_of: Vec<String>,
    counts: Vec<u64>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.text_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text_of.is_empty()
    }

    pub fn id(&self, text: &str) -> Option<usize> {
        self.id_of.get(text).copied()
    }

    pub fn id_or_unk(&self, text: &str) -> usize {
        self.id(text).unwrap_or(UNK)
    }

    pub fn text(&self, id: usize) -> &str {
        &self.text_of[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    /// Content tokens only (sentinels excluded), in id order.
    pub fn content_tokens(&self) -> impl Iterator<Item = &str> {
        self.text_of.iter().skip(SENTINELS.len()).map(|s| s.as_str())
    }

    pub fn encode_texts<S: AsRef<str>>(&self, texts: &[S]) -> Vec<usize> {
        texts.iter().map(|t| self.id_or_unk(t.as_ref())).collect()
    }

    pub fn decode_ids(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.text_of[i].clone()).collect()
    }

    /// Rebuild from an ordered token list (checkpoint loading).
    pub fn from_ordered_tokens(texts: Vec<String>) -> Result<Vocabulary> {
        if texts.len() < SENTINELS.len() || texts[..SENTINELS.len()] != SENTINELS {
            return Err(CsmilesError::MalformedSequence {
                position: 0,
                reason: "vocabulary does not start with the sentinel block".to_string(),
            });
        }
        let id_of = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let counts = vec![0; texts.len()];
        Ok(Vocabulary {
            id_of,
            text_of: texts,
            counts,
        })
    }

    pub fn ordered_tokens(&self) -> &[String] {
        &self.text_of
    }
}

/// Count tokens over a corpus of already-tokenized sequences and assign
/// dense ids. Errors on an empty corpus.
pub fn build_vocab<I, S>(corpus: I) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: IntoIterator<Item = String>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut sequences = 0usize;
    for seq in corpus {
        sequences += 1;
        for tok in seq {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    if sequences == 0 {
        return Err(CsmilesError::EmptyCorpus);
    }

    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(t, _)| !SENTINELS.contains(&t.as_str()))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut text_of: Vec<String> = SENTINELS.iter().map(|s| s.to_string()).collect();
    let mut count_col = vec![0u64; SENTINELS.len()];
    for (text, count) in entries {
        text_of.push(text);
        count_col.push(count);
    }
    let id_of = text_of
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        id_of,
        text_of,
        counts: count_col,
    })
}

/// Distinct raw-SMILES token texts (atom maps removed from atom tokens), the
/// composite-token baseline the decomposed vocabulary is compared against.
pub fn raw_token_set<S: AsRef<str>>(lines: &[S]) -> Result<std::collections::BTreeSet<String>> {
    let mut set = std::collections::BTreeSet::new();
    for line in lines {
        for tok in smiles_core::tokenize(line.as_ref())? {
            set.insert(raw_token_text_unmapped(&tok));
        }
    }
    Ok(set)
}

/// Raw token text with any atom-map suffix dropped, so the comparison sees
/// what a model would see.
pub fn raw_token_text_unmapped(tok: &smiles_core::Token) -> String {
    match &tok.atom {
        Some(atom) if atom.atom_map.is_some() => {
            let mut bare = atom.clone();
            bare.atom_map = None;
            smiles_core::render_atom(&bare)
        }
        _ => tok.text.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode;

    #[test]
    fn tiny_corpus() {
        let seq = encode("CCO").unwrap();
        let vocab = build_vocab([seq.texts().into_iter().map(String::from).collect::<Vec<_>>()])
            .unwrap();
        assert_eq!(vocab.len(), 6);
        assert_eq!(vocab.text(PAD), "<pad>");
        assert_eq!(vocab.text(EOS), "<eos>");
        assert_eq!(vocab.id("C"), Some(4));
        assert_eq!(vocab.id("O"), Some(5));
        assert_eq!(vocab.count(4), 2);
        assert_eq!(vocab.id_or_unk("Zr"), UNK);
    }

    #[test]
    fn empty_corpus_rejected() {
        let corpus: Vec<Vec<String>> = Vec::new();
        assert!(matches!(build_vocab(corpus), Err(CsmilesError::EmptyCorpus)));
    }

    #[test]
    fn composites_collapse() {
        // Raw side has three distinct composite tokens; decomposed side
        // reuses S and the specials.
        let lines = ["[s+]", "[S+]", "S"];
        let raw = raw_token_set(&lines).unwrap();
        assert_eq!(raw.len(), 3);
        let decomposed = build_vocab(
            lines
                .iter()
                .map(|l| {
                    encode(l)
                        .unwrap()
                        .texts()
                        .into_iter()
                        .map(String::from)
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let content: Vec<&str> = decomposed.content_tokens().collect();
        assert_eq!(content.len(), 3); // S, &, +
        assert!(content.iter().all(|t| !t.contains('[')));
    }

    #[test]
    fn mapped_tokens_lose_maps_in_raw_set() {
        let raw = raw_token_set(&["[CH3:1][CH3:2]"]).unwrap();
        assert_eq!(raw.len(), 1);
        assert!(raw.contains("[CH3]"));
    }

    #[test]
    fn ids_survive_ordered_round_trip() {
        let seq = encode("c1ccncc1").unwrap();
        let vocab = build_vocab([seq.texts().into_iter().map(String::from).collect::<Vec<_>>()])
            .unwrap();
        let rebuilt = Vocabulary::from_ordered_tokens(vocab.ordered_tokens().to_vec()).unwrap();
        for id in 0..vocab.len() {
            assert_eq!(rebuilt.id(vocab.text(id)), Some(id));
        }
    }
}
