//! Field snapshots: one JSON header line, then the values as little-endian `f64`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::params::SimParams;
use crate::record::format_f64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid: serde_json::Value,
    pub time: f64,
    pub params: Option<SimParams>,
    pub count: usize,
}

pub fn write_snapshot(
    path: &Path,
    u: &ScalarField,
    time: f64,
    params: Option<&SimParams>,
) -> Result<()> {
    let header = SnapshotHeader {
        grid: u.grid().descriptor(),
        time,
        params: params.copied(),
        count: u.len(),
    };
    let mut out = Vec::with_capacity(u.len() * 8 + 256);
    serde_json::to_writer(&mut out, &header)?;
    out.push(b'\n');
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ScalarField, SnapshotHeader)> {
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())?;
    let grid = Arc::new(Grid::from_descriptor(&header.grid)?);
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != header.count * 8 {
        return Err(Error::Structural(format!(
            "snapshot holds {} bytes of data, header promises {} values",
            bytes.len(),
            header.count
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField::new(grid, values)?, header))
}

/// Two-column CSV `x,u` of a one-dimensional field.
pub fn profile_csv(u: &ScalarField) -> Result<String> {
    let x = u.grid().line_coords().ok_or(Error::UnsupportedDomain {
        op: "profile_csv",
        domain: "2D box",
    })?;
    let mut s = String::from("x,u\n");
    for (xi, ui) in x.iter().zip(u.values()) {
        s.push_str(&format!("{},{}\n", format_f64(*xi), format_f64(*ui)));
    }
    Ok(s)
}
