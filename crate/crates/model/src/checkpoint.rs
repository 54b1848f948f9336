//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//! `magic "TRJGCKPT" | u32 version | u32 config length | config JSON |
//! u32 tensor count | per tensor (u32 name length, name, u64 rows, u64 cols,
//! rows*cols f64) | u8 optimizer flag | [u64 step, first and second moments
//! in tensor order] | u32 CRC-32 of everything before it`.

use std::path::Path;

use ndarray::Array2;
use trajgen_nn::{AdamW, Matrix};

use crate::config::DecoderConfig;
use crate::decoder::Decoder;
use crate::error::{ModelError, Result};

const MAGIC: &[u8; 8] = b"TRJGCKPT";
pub const FORMAT_VERSION: u32 = 1;

pub struct Checkpoint {
    pub decoder: Decoder,
    pub optimizer: Option<AdamW>,
}

pub fn to_bytes(decoder: &Decoder, optimizer: Option<&AdamW>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let config = serde_json::to_vec(&decoder.config).expect("config serializes");
    out.extend_from_slice(&(config.len() as u32).to_le_bytes());
    out.extend_from_slice(&config);
    out.extend_from_slice(&(decoder.store.len() as u32).to_le_bytes());
    for p in decoder.store.iter() {
        out.extend_from_slice(&(p.name.len() as u32).to_le_bytes());
        out.extend_from_slice(p.name.as_bytes());
        out.extend_from_slice(&(p.value.nrows() as u64).to_le_bytes());
        out.extend_from_slice(&(p.value.ncols() as u64).to_le_bytes());
        write_values(&mut out, &p.value);
    }
    match optimizer {
        Some(opt) => {
            out.push(1);
            out.extend_from_slice(&opt.step.to_le_bytes());
            for m in opt.first_moment.iter().chain(&opt.second_moment) {
                write_values(&mut out, m);
            }
        }
        None => out.push(0),
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn write_values(out: &mut Vec<u8>, m: &Matrix) {
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            ModelError::CorruptCheckpoint(format!("file ends while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<Matrix> {
        let len = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| ModelError::CorruptCheckpoint(format!("{what}: implausible shape {rows}x{cols}")))?;
        let raw = self.take(len, what)?;
        let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Array2::from_shape_vec((rows, cols), values).map_err(|e| ModelError::CorruptCheckpoint(format!("{what}: {e}")))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelError::CorruptCheckpoint("missing checkpoint header".into()));
    }
    let mut r = Reader { bytes, pos: MAGIC.len() };
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(ModelError::CheckpointVersion { found: version, expected: FORMAT_VERSION });
    }
    let config_len = r.u32("config length")? as usize;
    let config: DecoderConfig = serde_json::from_slice(r.take(config_len, "config")?)
        .map_err(|e| ModelError::CorruptCheckpoint(format!("config: {e}")))?;
    let mut decoder = Decoder::new(config)?;
    let count = r.u32("tensor count")? as usize;
    if count != decoder.store.len() {
        return Err(ModelError::CorruptCheckpoint(format!(
            "{count} tensors stored but the config builds {}",
            decoder.store.len()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for p in decoder.store.iter() {
        let name_len = r.u32("tensor name length")? as usize;
        let name = std::str::from_utf8(r.take(name_len, "tensor name")?)
            .map_err(|_| ModelError::CorruptCheckpoint("tensor name is not UTF-8".into()))?;
        if name != p.name {
            return Err(ModelError::CorruptCheckpoint(format!("expected tensor {} but found {name}", p.name)));
        }
        let rows = r.u64("rows")? as usize;
        let cols = r.u64("cols")? as usize;
        if [rows, cols] != p.value.shape() {
            return Err(ModelError::CorruptCheckpoint(format!(
                "tensor {name} is {rows}x{cols}, expected {:?}",
                p.value.shape()
            )));
        }
        values.push(r.matrix(rows, cols, name)?);
    }
    for (p, v) in decoder.store.iter_mut().zip(values) {
        p.value = v;
    }
    let optimizer = match r.take(1, "optimizer flag")?[0] {
        0 => None,
        1 => {
            let mut opt = AdamW::new(Default::default(), &decoder.store);
            opt.step = r.u64("optimizer step")?;
            let shapes: Vec<(usize, usize)> = decoder.store.iter().map(|p| p.value.dim()).collect();
            for m in opt.first_moment.iter_mut().chain(opt.second_moment.iter_mut()) {
                let (rows, cols) = m.dim();
                *m = r.matrix(rows, cols, "optimizer moment")?;
            }
            debug_assert_eq!(shapes.len(), opt.first_moment.len());
            Some(opt)
        }
        f => return Err(ModelError::CorruptCheckpoint(format!("bad optimizer flag {f}"))),
    };
    let body_end = r.pos;
    let crc = r.u32("checksum")?;
    if crc != crc32fast::hash(&bytes[..body_end]) {
        return Err(ModelError::CorruptCheckpoint("checksum mismatch".into()));
    }
    if r.pos != bytes.len() {
        return Err(ModelError::CorruptCheckpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(Checkpoint { decoder, optimizer })
}

pub fn save_checkpoint(path: &Path, decoder: &Decoder, optimizer: Option<&AdamW>) -> Result<()> {
    std::fs::write(path, to_bytes(decoder, optimizer)).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&bytes)
}

/// Loads a checkpoint and rejects it unless its config equals `expected`.
pub fn load_checkpoint_expecting(path: &Path, expected: &DecoderConfig) -> Result<Checkpoint> {
    let ck = load_checkpoint(path)?;
    check_config(&ck.decoder.config, expected)?;
    Ok(ck)
}

pub fn check_config(found: &DecoderConfig, expected: &DecoderConfig) -> Result<()> {
    let (f, e) = (serde_json::to_value(found).unwrap(), serde_json::to_value(expected).unwrap());
    if let (Some(f), Some(e)) = (f.as_object(), e.as_object()) {
        for (key, ev) in e {
            let fv = f.get(key).cloned().unwrap_or(serde_json::Value::Null);
            if &fv != ev {
                return Err(ModelError::ConfigMismatch {
                    field: key.clone(),
                    found: fv.to_string(),
                    expected: ev.to_string(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_stable() {
        let d = Decoder::new(DecoderConfig::tiny()).unwrap();
        let bytes = to_bytes(&d, None);
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(to_bytes(&back.decoder, None), bytes);
        assert!(back.optimizer.is_none());
    }

    #[test]
    fn truncation_and_corruption_are_detected() {
        let d = Decoder::new(DecoderConfig::tiny()).unwrap();
        let bytes = to_bytes(&d, Some(&AdamW::new(Default::default(), &d.store)));
        for cut in [3, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(from_bytes(&bytes[..cut]), Err(ModelError::CorruptCheckpoint(_))), "cut {cut}");
        }
        let mut flipped = bytes.clone();
        let mid = flipped.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(from_bytes(&flipped), Err(ModelError::CorruptCheckpoint(_))));
        let mut versioned = bytes;
        versioned[8] = 9;
        assert!(matches!(from_bytes(&versioned), Err(ModelError::CheckpointVersion { found: 9, .. })));
    }

    #[test]
    fn config_mismatch_names_the_field() {
        let err = check_config(&DecoderConfig::tiny(), &DecoderConfig { head_hidden: 32, ..DecoderConfig::tiny() })
            .unwrap_err();
        assert!(matches!(&err, ModelError::ConfigMismatch { field, .. } if field == "head_hidden"), "{err}");
    }
}
