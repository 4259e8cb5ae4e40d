//! Binary field snapshots.
//!
//! Layout (all little-endian): `b"THNF"`, format version `u32`, `n u32`,
//! `L f64`, `time f64`, then `n * n` `f64` samples in grid order.

use std::io::{Read, Write};
use std::path::Path;

use super::field::ScalarField;
use super::grid::Grid;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"THNF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

pub fn encode(field: &ScalarField, time: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.samples() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], origin: &Path) -> Result<(ScalarField, f64)> {
    let bad = |reason: &str| Error::Format {
        path: origin.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("missing THNF header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n = u32_at(8) as usize;
    let half_width = f64_at(12);
    let time = f64_at(20);
    let grid = Grid::new(n, half_width).map_err(|e| bad(&e.to_string()))?;
    if bytes.len() != HEADER_LEN + 8 * grid.len() {
        return Err(bad("sample count does not match header"));
    }
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let field = ScalarField::from_samples(grid, samples).map_err(|e| bad(&e.to_string()))?;
    Ok((field, time))
}

pub fn write(path: &Path, field: &ScalarField, time: f64) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(field, time))
        .map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<(ScalarField, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
