//! `W2DS` field snapshots.
//!
//! Layout, all little-endian: magic `W2DS`, format version `u32`, grid `n`
//! `u32`, `max_mode` `u32`, record count `u64`, then `count` records of
//! `(l1: i32, l2: i32, c: f64)`. Only coefficients whose bit pattern is not
//! `+0.0` are stored. The header carries no padding or cutoff shape; reads
//! assume the defaults of [`GridSpec::new`] callers (3/2 padding, radial).

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::spectral::{Cutoff, GridSpec, Mode, ModeSet, Pad, SpectralError, SpectralField};

use super::IoError;

pub const MAGIC: [u8; 4] = *b"W2DS";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 4 + 4 + 4 + 8;
const RECORD: usize = 4 + 4 + 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("bad magic {0:?}, expected \"W2DS\"")]
    Magic([u8; 4]),
    #[error("unsupported format version {0}, expected {VERSION}")]
    Version(u32),
    #[error("truncated snapshot: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after the last record")]
    Trailing(usize),
    #[error("record {0} holds the (0, 0) mode; fields are zero-mean")]
    ZeroMode(u64),
    #[error("record {index}: mode {mode} lies outside the grid cutoff")]
    OutsideCutoff { index: u64, mode: Mode },
    #[error("record {index}: mode {mode} appears twice")]
    Duplicate { index: u64, mode: Mode },
    #[error("record {index}: coefficient at {mode} is not finite")]
    NonFinite { index: u64, mode: Mode },
    #[error("header grid: {0}")]
    Grid(#[from] SpectralError),
}

pub fn encode_snapshot(field: &SpectralField) -> Vec<u8> {
    let grid = field.grid();
    let records: Vec<(Mode, f64)> = field
        .basis()
        .modes()
        .zip(field.coeffs())
        .filter(|(_, c)| c.to_bits() != 0)
        .map(|(l, &c)| (l, c))
        .collect();
    let mut out = Vec::with_capacity(HEADER + RECORD * records.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.max_mode() as u32).to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for (l, c) in records {
        out.extend_from_slice(&l.l1.to_le_bytes());
        out.extend_from_slice(&l.l2.to_le_bytes());
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("length checked")
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SpectralField, SnapshotError> {
    if bytes.len() < HEADER {
        return Err(SnapshotError::Truncated { expected: HEADER, found: bytes.len() });
    }
    let magic = take::<4>(bytes, 0);
    if magic != MAGIC {
        return Err(SnapshotError::Magic(magic));
    }
    let version = u32::from_le_bytes(take(bytes, 4));
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let n = u32::from_le_bytes(take(bytes, 8)) as usize;
    let max_mode = u32::from_le_bytes(take(bytes, 12)) as usize;
    let count = u64::from_le_bytes(take(bytes, 16));
    let expected = (count as usize).checked_mul(RECORD).and_then(|r| r.checked_add(HEADER)).unwrap_or(usize::MAX);
    if bytes.len() < expected {
        return Err(SnapshotError::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(SnapshotError::Trailing(bytes.len() - expected));
    }
    let grid = GridSpec::new(n, max_mode, Pad::THREE_HALVES, Cutoff::Radial)?;
    let mut field = SpectralField::zeros(Arc::new(ModeSet::new(grid)));
    let mut seen = HashSet::new();
    for index in 0..count {
        let at = HEADER + index as usize * RECORD;
        let mode = Mode::new(i32::from_le_bytes(take(bytes, at)), i32::from_le_bytes(take(bytes, at + 4)));
        let c = f64::from_le_bytes(take(bytes, at + 8));
        if mode.is_zero() {
            return Err(SnapshotError::ZeroMode(index));
        }
        if !c.is_finite() {
            return Err(SnapshotError::NonFinite { index, mode });
        }
        if !seen.insert(mode) {
            return Err(SnapshotError::Duplicate { index, mode });
        }
        field.set(mode, c).map_err(|_| SnapshotError::OutsideCutoff { index, mode })?;
    }
    Ok(field)
}

pub fn write_snapshot(path: &Path, field: &SpectralField) -> Result<(), IoError> {
    std::fs::write(path, encode_snapshot(field)).map_err(|e| IoError::file(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::file(path, e))?;
    decode_snapshot(&bytes).map_err(|source| IoError::Snapshot { path: path.to_path_buf(), source })
}
