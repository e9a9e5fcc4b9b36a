//! Time series of run diagnostics, persisted as CSV plus a JSON metadata sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// Phase-field run: `mass` is the mean of `u`, `energy_ac` the Allen–Cahn part.
    Diffuse,
    /// Sharp-interface run: `mass` is the `+1` phase volume, `energy_ac` the area term.
    Sharp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: RecordKind,
    pub times: Vec<f64>,
    pub energy_total: Vec<f64>,
    pub energy_ac: Vec<f64>,
    pub energy_nonlocal: Vec<f64>,
    pub mass: Vec<f64>,
    /// Instantaneous dissipation rate (`∫|∇w|²`).
    pub dissipation: Vec<f64>,
    pub interface_radii: Option<Vec<Vec<f64>>>,
    /// Additional named series, written after the standard columns.
    pub extra: Vec<(String, Vec<f64>)>,
}

/// One row of a record.
#[derive(Debug, Clone, Default)]
pub struct RecordRow {
    pub time: f64,
    pub energy_total: f64,
    pub energy_ac: f64,
    pub energy_nonlocal: f64,
    pub mass: f64,
    pub dissipation: f64,
    pub radii: Option<Vec<f64>>,
    pub extra: Vec<(&'static str, f64)>,
}

impl RunRecord {
    pub fn new(kind: RecordKind) -> Self {
        RunRecord {
            kind,
            times: Vec::new(),
            energy_total: Vec::new(),
            energy_ac: Vec::new(),
            energy_nonlocal: Vec::new(),
            mass: Vec::new(),
            dissipation: Vec::new(),
            interface_radii: None,
            extra: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, row: RecordRow) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(row.time > last) {
                return Err(Error::Structural(format!(
                    "record times must increase strictly: {} after {last}",
                    row.time
                )));
            }
        }
        let n = self.times.len();
        self.times.push(row.time);
        self.energy_total.push(row.energy_total);
        self.energy_ac.push(row.energy_ac);
        self.energy_nonlocal.push(row.energy_nonlocal);
        self.mass.push(row.mass);
        self.dissipation.push(row.dissipation);
        if let Some(r) = row.radii {
            self.interface_radii.get_or_insert_with(|| vec![Vec::new(); n]).push(r);
        } else if let Some(radii) = self.interface_radii.as_mut() {
            radii.push(Vec::new());
        }
        for (name, value) in row.extra {
            match self.extra.iter_mut().find(|(k, _)| k == name) {
                Some((_, series)) => series.push(value),
                None => {
                    let mut series = vec![f64::NAN; n];
                    series.push(value);
                    self.extra.push((name.to_string(), series));
                }
            }
        }
        for (_, series) in self.extra.iter_mut() {
            if series.len() < n + 1 {
                series.push(f64::NAN);
            }
        }
        Ok(())
    }

    pub fn extra_series(&self, name: &str) -> Option<&[f64]> {
        self.extra.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_slice())
    }

    /// Checks the record invariants: equal lengths, strictly increasing times.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let lens = [
            self.energy_total.len(),
            self.energy_ac.len(),
            self.energy_nonlocal.len(),
            self.mass.len(),
            self.dissipation.len(),
        ];
        if lens.iter().any(|&l| l != n)
            || self.interface_radii.as_ref().is_some_and(|r| r.len() != n)
            || self.extra.iter().any(|(_, s)| s.len() != n)
        {
            return Err(Error::Structural("record series differ in length".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Structural("record times are not strictly increasing".into()));
        }
        Ok(())
    }

    fn max_radii(&self) -> usize {
        self.interface_radii
            .as_ref()
            .map(|r| r.iter().map(Vec::len).max().unwrap_or(0))
            .unwrap_or(0)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let radii = (1..=self.max_radii()).map(|i| format!("r_{i}"));
        let mut cols = vec!["t".to_string()];
        match self.kind {
            RecordKind::Diffuse => {
                cols.extend(
                    ["E_total", "E_ac", "E_nonlocal", "mass", "dissipation"].map(String::from),
                );
                cols.extend(self.extra.iter().map(|(k, _)| k.clone()));
                cols.extend(radii);
            }
            RecordKind::Sharp => {
                cols.extend(radii);
                cols.extend(
                    ["E_total", "E_area", "E_nonlocal", "vol_plus", "dissipation"].map(String::from),
                );
                cols.extend(self.extra.iter().map(|(k, _)| k.clone()));
            }
        }
        cols
    }

    /// CSV text: one header line, one row per time, every float with 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        self.validate()?;
        let k = self.max_radii();
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for i in 0..self.len() {
            let mut row = vec![self.times[i]];
            let radii: Vec<f64> = (0..k)
                .map(|j| {
                    self.interface_radii
                        .as_ref()
                        .and_then(|r| r[i].get(j).copied())
                        .unwrap_or(f64::NAN)
                })
                .collect();
            let standard = [
                self.energy_total[i],
                self.energy_ac[i],
                self.energy_nonlocal[i],
                self.mass[i],
                self.dissipation[i],
            ];
            let extra = self.extra.iter().map(|(_, s)| s[i]);
            match self.kind {
                RecordKind::Diffuse => {
                    row.extend(standard);
                    row.extend(extra);
                    row.extend(radii);
                }
                RecordKind::Sharp => {
                    row.extend(radii);
                    row.extend(standard);
                    row.extend(extra);
                }
            }
            let line: Vec<String> = row.into_iter().map(format_f64).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn persist(&self, dir: &Path, stem: &str, meta: &RunMetadata) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_csv(&dir.join(format!("{stem}.csv")))?;
        fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(meta)?,
        )?;
        Ok(())
    }
}

/// Round-trip exact decimal form.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        let mut s = String::new();
        write!(s, "{v:.16e}").unwrap();
        s
    }
}

/// Sidecar metadata describing the run that produced a record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub run_id: String,
    pub kind: RecordKind,
    pub params: serde_json::Value,
    pub grid: serde_json::Value,
    pub wall_time_s: f64,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl RunMetadata {
    pub fn new(
        kind: RecordKind,
        params: serde_json::Value,
        grid: serde_json::Value,
        wall_time_s: f64,
    ) -> Self {
        let run_id = run_id(&params, &grid);
        RunMetadata {
            run_id,
            kind,
            params,
            grid,
            wall_time_s,
            notes: Vec::new(),
        }
    }
}

/// Content hash of the run inputs, shortened like a git object id.
pub fn run_id(params: &serde_json::Value, grid: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    h.update(params.to_string().as_bytes());
    h.update(grid.to_string().as_bytes());
    let digest = h.finalize();
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> RecordRow {
        RecordRow {
            time: t,
            energy_total: 1.0 - t,
            energy_ac: 1.0 - t,
            mass: 0.25,
            ..Default::default()
        }
    }

    #[test]
    fn rejects_non_increasing_times() {
        let mut rec = RunRecord::new(RecordKind::Diffuse);
        rec.push(row(0.0)).unwrap();
        rec.push(row(0.1)).unwrap();
        assert!(rec.push(row(0.1)).is_err());
        assert_eq!(rec.len(), 2);
        rec.validate().unwrap();
    }

    #[test]
    fn csv_has_one_row_per_time_and_named_columns() {
        let mut rec = RunRecord::new(RecordKind::Sharp);
        for (i, t) in [0.0, 0.5].into_iter().enumerate() {
            let mut r = row(t);
            r.radii = Some(vec![0.4 - 0.1 * i as f64, 0.7]);
            rec.push(r).unwrap();
        }
        let csv = rec.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,r_1,r_2,E_total,E_area,E_nonlocal,vol_plus,dissipation");
        assert_eq!(lines.len(), 3);
        let fields: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields[1], 0.30000000000000004);
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 12345.678901234567] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn extra_series_backfill() {
        let mut rec = RunRecord::new(RecordKind::Diffuse);
        rec.push(row(0.0)).unwrap();
        let mut r = row(1.0);
        r.extra.push(("discrepancy", 0.5));
        rec.push(r).unwrap();
        let s = rec.extra_series("discrepancy").unwrap();
        assert!(s[0].is_nan());
        assert_eq!(s[1], 0.5);
        rec.validate().unwrap();
    }

    #[test]
    fn run_id_is_deterministic() {
        let p = serde_json::json!({"eps": 0.1});
        let g = serde_json::json!({"kind": "radial"});
        assert_eq!(run_id(&p, &g), run_id(&p, &g));
        assert_eq!(run_id(&p, &g).len(), 12);
    }
}
