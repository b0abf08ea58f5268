//! Raw field dumps: a 32-byte little-endian header followed by the interior
//! values in x, y, z order (z fastest) at the run's precision.
//!
//! | bytes | content                         |
//! |-------|---------------------------------|
//! | 0..8  | magic `STBSNAP1`                |
//! | 8..12 | precision in bits, u32 (32, 64) |
//! | 12..24| shape, 3 x u32                  |
//! | 24..32| time index, u64                 |

use super::run::FieldData;
use crate::error::{Error, Result};
use crate::real::Real;
use std::io::{Read, Write};
use std::path::Path;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"STBSNAP1";
pub const SNAPSHOT_HEADER_LEN: usize = 32;

fn encode<T: Real>(field: &FieldData) -> Vec<u8> {
    let mut buf = Vec::with_capacity(SNAPSHOT_HEADER_LEN + field.values.len() * (T::BITS as usize / 8));
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&T::BITS.to_le_bytes());
    for s in field.shape {
        buf.extend_from_slice(&(s as u32).to_le_bytes());
    }
    buf.extend_from_slice(&field.time_index.to_le_bytes());
    for &v in &field.values {
        T::from_f64_lossy(v).write_le(&mut buf);
    }
    buf
}

pub fn write_snapshot(path: &Path, field: &FieldData) -> Result<()> {
    let bytes = match field.precision {
        32 => encode::<f32>(field),
        64 => encode::<f64>(field),
        p => return Err(crate::error::invalid("precision", format!("must be 32 or 64, got {p}"))),
    };
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

fn bad(reason: impl Into<String>) -> Error {
    Error::ShapeMismatch(format!("snapshot: {}", reason.into()))
}

pub fn read_snapshot(path: &Path) -> Result<FieldData> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < SNAPSHOT_HEADER_LEN || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("missing header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let precision = u32_at(8);
    let shape = [u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize];
    let time_index = u64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
    let width = match precision {
        32 => 4,
        64 => 8,
        p => return Err(bad(format!("precision {p}"))),
    };
    let n: usize = shape.iter().product();
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if body.len() != n * width {
        return Err(bad(format!("{} payload bytes for shape {shape:?}", body.len())));
    }
    let values = body
        .chunks_exact(width)
        .map(|c| {
            if width == 4 {
                f32::read_le(c) as f64
            } else {
                f64::read_le(c)
            }
        })
        .collect();
    Ok(FieldData {
        name: path
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
        shape,
        time_index,
        precision,
        values,
    })
}
