//! Flow-state snapshot files.
//!
//! Layout (little-endian): magic "CMAF", u32 version = 1, u32 n, u32 N,
//! f64 t, then N^(2n) f64 values in grid order (x₁, y₁, …, x_n, y_n), last
//! axis fastest. Round trips are bitwise lossless on the potential values;
//! the metric and RHS caches are recomputed on read.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::error::{FieldError, FlowError};
use crate::field::ScalarField;
use crate::flow::FlowState;
use crate::geometry::TorusGeometry;
use crate::nonlinearity::Nonlinearity;

pub const MAGIC: &[u8; 4] = b"CMAF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot magic mismatch: expected \"CMAF\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0} (this reader understands version 1)")]
    UnsupportedVersion(u32),
    #[error("dimension mismatch: {0}")]
    BadDimensions(#[from] FieldError),
    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("time stamp is not finite: {0}")]
    BadTime(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cached state could not be rebuilt: {0}")]
    Rebuild(#[from] FlowError),
}

/// Serializes (t, φ); atomic write-temp-then-rename.
pub fn write_snapshot(state: &FlowState, path: &Path) -> Result<(), SnapshotError> {
    let geom = state.phi.geom();
    let mut buf = Vec::with_capacity(4 + 4 + 4 + 4 + 8 + 8 * geom.points());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(geom.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(geom.grid() as u32).to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    for v in state.phi.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads (t, φ) without rebuilding the caches.
pub fn read_snapshot_raw(path: &Path) -> Result<(f64, ScalarField), SnapshotError> {
    let mut f = fs::File::open(path)?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    if bytes.len() < 16 {
        return Err(SnapshotError::Truncated {
            expected: 16,
            found: bytes.len() as u64,
        });
    }
    let mut magic = [0u8; 4];
    magic.copy_from_slice(&bytes[..4]);
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let grid = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let geom = TorusGeometry::new(n, grid)?;
    let expected = 16 + 8 + 8 * geom.points() as u64;
    if bytes.len() as u64 != expected {
        return Err(SnapshotError::Truncated {
            expected,
            found: bytes.len() as u64,
        });
    }
    let t = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if !t.is_finite() {
        return Err(SnapshotError::BadTime(t));
    }
    let values: Vec<f64> = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let phi = ScalarField::new(geom, values)?;
    Ok((t, phi))
}

/// Reads a snapshot and rebuilds the metric and RHS caches against `f`.
pub fn read_snapshot(
    path: &Path,
    f: &Nonlinearity,
    log_c: f64,
) -> Result<FlowState, SnapshotError> {
    let (t, phi) = read_snapshot_raw(path)?;
    Ok(crate::flow::make_state(t, phi, f, log_c)?)
}
