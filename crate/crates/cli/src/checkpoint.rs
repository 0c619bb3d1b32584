//! Binary evolution-operator checkpoints with JSON sidecars.
//!
//! The `.bin` file holds `dim²` complex entries in column-major order, each as
//! two little-endian `f64` (real, imaginary).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anneal_lab::DenseOperator;
use faer::c64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const LAYOUT: &str = "complex128-le column-major";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub n_sites: usize,
    pub sector: String,
    pub dim: usize,
    pub step: usize,
    pub t: f64,
    pub s: f64,
    pub params_hash: String,
    pub layout: String,
}

fn located(path: &Path) -> impl FnOnce(io::Error) -> io::Error + '_ {
    move |e| io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

/// Writes `<stem>.bin` and `<stem>.json`, returning both paths.
pub fn write_checkpoint(stem: &Path, u: &DenseOperator, meta: &CheckpointMeta) -> io::Result<[PathBuf; 2]> {
    let bin = stem.with_extension("bin");
    let json = stem.with_extension("json");
    let d = u.dim();
    let mut bytes = Vec::with_capacity(d * d * 16);
    for j in 0..d {
        for i in 0..d {
            let z = u.get(i, j);
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    fs::write(&bin, bytes).map_err(located(&bin))?;
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(&json, text).map_err(located(&json))?;
    Ok([bin, json])
}

/// Reads a checkpoint back from its sidecar path or stem.
pub fn read_checkpoint(stem: &Path) -> Result<(DenseOperator, CheckpointMeta), CliError> {
    let json = stem.with_extension("json");
    let text = fs::read_to_string(&json).map_err(CliError::io(&json))?;
    let meta: CheckpointMeta = serde_json::from_str(&text).map_err(|e| CliError::Io {
        path: json.clone(),
        source: io::Error::new(io::ErrorKind::InvalidData, e),
    })?;
    let bin = stem.with_extension("bin");
    let bytes = fs::read(&bin).map_err(CliError::io(&bin))?;
    let d = meta.dim;
    if bytes.len() != d * d * 16 {
        return Err(CliError::Io {
            path: bin,
            source: io::Error::new(
                io::ErrorKind::InvalidData,
                format!("expected {} bytes for dim {d}, found {}", d * d * 16, bytes.len()),
            ),
        });
    }
    let word = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let u = DenseOperator::from_fn(d, |i, j| {
        let k = 2 * (j * d + i);
        c64::new(word(k), word(k + 1))
    });
    Ok((u, meta))
}
