//! Checkpoint file: little-endian binary. Layout:
//!   magic "CSMK1"
//!   config block: num_layers, num_heads, d_model, d_ff (u32), dropout (f32),
//!                 vocab_size, max_len, align_layer, align_head (u32)
//!   tensor count (u32), then per tensor:
//!   name length (u32), name bytes, rank (u32), dims (u32 each), f32 data.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::config::ModelConfig;
use crate::error::{EngineError, Result};
use crate::params::Parameters;
use crate::tensor::Tensor;

const MAGIC: &[u8; 5] = b"CSMK1";

pub fn save(path: &Path, config: &ModelConfig, params: &Parameters) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    for v in [
        config.num_layers,
        config.num_heads,
        config.d_model,
        config.d_ff,
    ] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    w.write_all(&(config.dropout as f32).to_le_bytes())?;
    for v in [
        config.vocab_size,
        config.max_len,
        config.alignment_head.0,
        config.alignment_head.1,
    ] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    w.write_all(&(params.tensors.len() as u32).to_le_bytes())?;
    for (name, tensor) in &params.tensors {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&2u32.to_le_bytes())?;
        w.write_all(&(tensor.rows as u32).to_le_bytes())?;
        w.write_all(&(tensor.cols as u32).to_le_bytes())?;
        for v in &tensor.data {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f32(r: &mut impl Read) -> Result<f32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(f32::from_le_bytes(buf))
}

pub fn load(path: &Path) -> Result<(ModelConfig, Parameters)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(EngineError::CheckpointFormat(format!(
            "bad magic {magic:?}"
        )));
    }
    let num_layers = read_u32(&mut r)? as usize;
    let num_heads = read_u32(&mut r)? as usize;
    let d_model = read_u32(&mut r)? as usize;
    let d_ff = read_u32(&mut r)? as usize;
    let dropout = f64::from(read_f32(&mut r)?);
    let vocab_size = read_u32(&mut r)? as usize;
    let max_len = read_u32(&mut r)? as usize;
    let align_layer = read_u32(&mut r)? as usize;
    let align_head = read_u32(&mut r)? as usize;
    let config = ModelConfig {
        num_layers,
        num_heads,
        d_model,
        d_ff,
        dropout,
        vocab_size,
        max_len,
        alignment_head: (align_layer, align_head),
    };
    config.validate()?;

    let count = read_u32(&mut r)? as usize;
    let mut params = Parameters::default();
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        if name_len > 4096 {
            return Err(EngineError::CheckpointFormat(format!(
                "tensor name length {name_len} is implausible"
            )));
        }
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|e| EngineError::CheckpointFormat(format!("tensor name: {e}")))?;
        let rank = read_u32(&mut r)? as usize;
        if rank != 2 {
            return Err(EngineError::CheckpointFormat(format!(
                "tensor {name} has rank {rank}, expected 2"
            )));
        }
        let rows = read_u32(&mut r)? as usize;
        let cols = read_u32(&mut r)? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(f64::from(read_f32(&mut r)?));
        }
        params
            .tensors
            .insert(name, Tensor::from_vec(rows, cols, data));
    }
    Ok((config, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::init_parameters;
    use rand::SeedableRng;

    #[test]
    fn save_load_round_trip() {
        let cfg = ModelConfig::desk_default(25);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let params = init_parameters(&cfg, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save(&path, &cfg, &params).unwrap();
        let (cfg2, params2) = load(&path).unwrap();
        // dropout travels as f32 by format; compare through that precision.
        assert_eq!(cfg2.dropout, f64::from(cfg.dropout as f32));
        assert_eq!(
            ModelConfig { dropout: 0.0, ..cfg2.clone() },
            ModelConfig { dropout: 0.0, ..cfg.clone() }
        );
        // f32 serialization is the checksum domain, so checksums agree.
        assert_eq!(params.checksum(), params2.checksum());
        assert_eq!(params.tensors.len(), params2.tensors.len());
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ckpt");
        std::fs::write(&path, b"NOTCK0000").unwrap();
        assert!(matches!(
            load(&path),
            Err(EngineError::CheckpointFormat(_))
        ));
    }
}
