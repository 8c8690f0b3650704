use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Flavor;

use super::field::{BoundaryPolicy, FlowField};
use super::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

/// Metadata written next to a binary snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub grid: Grid,
    pub k: usize,
    pub l: usize,
    pub flavor: Flavor,
    pub policy: BoundaryPolicy,
    pub time: f64,
    pub dt: f64,
    /// File name of the little-endian `f64` array, relative to the metadata.
    pub data: String,
}

/// Node coordinates and solution value `u`, one row per node.
pub fn write_csv(field: &FlowField, slice: usize, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = field.grid.dim();
    let header: Vec<String> = (0..d).map(|a| format!("x{a}")).chain(["u".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    let values = &field.slices[slice];
    for n in 0..field.grid.len() {
        let mut row: Vec<String> = field.grid.coords(n).iter().map(|x| format!("{x:.16e}")).collect();
        row.push(format!("{:.16e}", field.u_value(values, n)));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>.json` and `<stem>.bin` into `dir`; returns the metadata path.
/// The array holds the stored values (the periodic part for periodic fields).
pub fn write_binary(field: &FlowField, slice: usize, dir: &Path, stem: &str) -> Result<PathBuf> {
    let bin = format!("{stem}.bin");
    let mut w = BufWriter::new(File::create(dir.join(&bin))?);
    for v in &field.slices[slice] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let meta = SnapshotMeta {
        grid: field.grid.clone(),
        k: field.k,
        l: field.l,
        flavor: field.flavor,
        policy: field.policy.clone(),
        time: field.times[slice],
        dt: field.dt,
        data: bin,
    };
    let path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn read_binary(meta_path: &Path) -> Result<(SnapshotMeta, Vec<f64>)> {
    let text = std::fs::read_to_string(meta_path)?;
    let meta: SnapshotMeta = serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))?;
    let dir = meta_path.parent().unwrap_or(Path::new("."));
    let mut bytes = Vec::new();
    File::open(dir.join(&meta.data))?.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * meta.grid.len() {
        return Err(Error::Io(format!(
            "snapshot holds {} bytes, expected {}",
            bytes.len(),
            8 * meta.grid.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((meta, values))
}
