//! Teacher-forced copy tracing: which output tokens the gate marks as
//! copied, and from which source position.

use seq2seq::{alignment_attention, gate_values, ModelConfig, Parameters, SpecialIds, TrainExample};

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub token: String,
    pub p_gen: f64,
    pub copied: bool,
    pub source_index: usize,
}

/// Re-run a candidate teacher-forced against its product and flag each token
/// copied when (1 - p_gen) clears the threshold; the source index is the
/// supervised head's argmax.
pub fn copy_trace(
    params: &Parameters,
    config: &ModelConfig,
    ids: SpecialIds,
    src_ids: &[usize],
    candidate_ids: &[usize],
    candidate_texts: &[String],
    threshold: f64,
) -> Result<Vec<TraceRecord>> {
    let dummy = TrainExample {
        src_ids: src_ids.to_vec(),
        tgt_ids: candidate_ids.to_vec(),
        sam: vec![0.0; candidate_ids.len() * src_ids.len()],
        copy_y: vec![0; candidate_ids.len()],
    };
    let gates = gate_values(params, config, true, ids, &dummy)?;
    let attn = alignment_attention(params, config, ids, &dummy)?;
    let mut out = Vec::with_capacity(candidate_ids.len());
    for (t, gate) in gates.iter().enumerate() {
        let argmax = attn[t]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite attention"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        out.push(TraceRecord {
            token: candidate_texts.get(t).cloned().unwrap_or_default(),
            p_gen: *gate,
            copied: 1.0 - gate > threshold,
            source_index: argmax,
        });
    }
    Ok(out)
}

/// TSV rendering: token, p_gen, copied, source_index.
pub fn trace_to_tsv(records: &[TraceRecord]) -> String {
    let mut out = String::from("token\tp_gen\tcopied\tsource_index\n");
    for r in records {
        out.push_str(&format!(
            "{}\t{:.6}\t{}\t{}\n",
            r.token,
            r.p_gen,
            u8::from(r.copied),
            r.source_index
        ));
    }
    out
}
