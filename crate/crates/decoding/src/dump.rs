//! Attention and alignment matrix dumps: CSV and row-max-normalized 8-bit
//! grayscale PGM (binary P5).

use std::fs;
use std::path::{Path, PathBuf};

use seq2seq::{alignment_attention, ModelConfig, Parameters, SpecialIds, TrainExample};

use crate::error::Result;

pub fn write_matrix_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect())
}

/// Each row is scaled so its maximum maps to 255; all-zero rows stay black.
pub fn write_matrix_pgm(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let height = rows.len();
    let width = rows.first().map(Vec::len).unwrap_or(0);
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    for row in rows {
        let max = row.iter().cloned().fold(0.0f64, f64::max);
        for &v in row {
            let px = if max > 0.0 {
                (v / max * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            bytes.push(px);
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn pgm_dimensions(path: &Path) -> Result<(usize, usize)> {
    let bytes = fs::read(path)?;
    let header = String::from_utf8_lossy(&bytes[..bytes.len().min(64)]).to_string();
    let mut fields = header.split_whitespace();
    let magic = fields.next().unwrap_or("");
    assert_eq!(magic, "P5", "not a binary PGM");
    let width: usize = fields.next().and_then(|v| v.parse().ok()).unwrap_or(0);
    let height: usize = fields.next().and_then(|v| v.parse().ok()).unwrap_or(0);
    Ok((height, width))
}

pub struct DumpPaths {
    pub attention_csv: PathBuf,
    pub attention_pgm: PathBuf,
    pub alignment_csv: PathBuf,
    pub alignment_pgm: PathBuf,
}

/// Teacher-forced attention of the supervised head next to the reference
/// alignment, as two CSV/PGM pairs.
pub fn attention_dump(
    params: &Parameters,
    config: &ModelConfig,
    ids: SpecialIds,
    src_ids: &[usize],
    tgt_ids: &[usize],
    sam_rows: &[Vec<f64>],
    dir: &Path,
    stem: &str,
) -> Result<(DumpPaths, Vec<Vec<f64>>)> {
    let dummy = TrainExample {
        src_ids: src_ids.to_vec(),
        tgt_ids: tgt_ids.to_vec(),
        sam: vec![0.0; tgt_ids.len() * src_ids.len()],
        copy_y: vec![0; tgt_ids.len()],
    };
    let attn = alignment_attention(params, config, ids, &dummy)?;
    let paths = DumpPaths {
        attention_csv: dir.join(format!("{stem}_attention.csv")),
        attention_pgm: dir.join(format!("{stem}_attention.pgm")),
        alignment_csv: dir.join(format!("{stem}_alignment.csv")),
        alignment_pgm: dir.join(format!("{stem}_alignment.pgm")),
    };
    write_matrix_csv(&paths.attention_csv, &attn)?;
    write_matrix_pgm(&paths.attention_pgm, &attn)?;
    write_matrix_csv(&paths.alignment_csv, sam_rows)?;
    write_matrix_pgm(&paths.alignment_pgm, sam_rows)?;
    Ok((paths, attn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_to_high_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let rows = vec![vec![0.25, 0.5, 0.25], vec![0.1, 0.2, 0.7]];
        write_matrix_csv(&path, &rows).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        for (a, b) in rows.iter().flatten().zip(back.iter().flatten()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn pgm_shape_and_normalization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let rows = vec![vec![0.5, 1.0, 0.0], vec![0.0, 0.0, 0.0]];
        write_matrix_pgm(&path, &rows).unwrap();
        assert_eq!(pgm_dimensions(&path).unwrap(), (2, 3));
        let bytes = std::fs::read(&path).unwrap();
        let pixels = &bytes[bytes.len() - 6..];
        assert_eq!(pixels, &[128, 255, 0, 0, 0, 0]);
    }
}
