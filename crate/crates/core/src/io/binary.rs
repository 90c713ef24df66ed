//! Flat binary field dumps.
//!
//! Layout: the 4 bytes `HNF1`, then `n` and `m` as little-endian `u32`, a
//! reserved zero `u32`, then `m^n` little-endian `f64` values in node order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::ScalarField;

pub const MAGIC: &[u8; 4] = b"HNF1";
pub const HEADER_LEN: usize = 16;

/// Decoded dump: grid dimension, points per axis, values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub grid_n: usize,
    pub grid_m: usize,
    pub values: Vec<f64>,
}

pub fn encode_field(u: &ScalarField) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&(g.m() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<FieldDump> {
    let bad = |offset: usize, message: String| Error::Parse {
        position: format!("byte {offset}"),
        message,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(bytes.len(), "truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad(0, "missing HNF1 magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (grid_n, grid_m) = (word(4), word(8));
    let count = u32::try_from(grid_n)
        .ok()
        .and_then(|n| grid_m.checked_pow(n))
        .ok_or_else(|| bad(4, format!("implausible shape n = {grid_n}, m = {grid_m}")))?;
    let expected = count
        .checked_mul(8)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| bad(4, "size overflow".into()))?;
    if bytes.len() != expected {
        return Err(bad(
            bytes.len().min(expected),
            format!("expected {expected} bytes for n = {grid_n}, m = {grid_m}, got {}", bytes.len()),
        ));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldDump {
        grid_n,
        grid_m,
        values,
    })
}

pub fn write_field(path: &Path, u: &ScalarField) -> Result<()> {
    std::fs::write(path, encode_field(u))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldDump> {
    decode_field(&std::fs::read(path)?)
}
