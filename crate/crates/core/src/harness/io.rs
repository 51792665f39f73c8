use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::{SweepPoint, SweepResult};
use crate::error::Result;

/// Pretty JSON with a trailing newline. Floats use shortest round-trip
/// formatting, so identical values always give identical bytes.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `K,N,error` rows.
pub fn write_points_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["K", "N", "error"])?;
    for p in points {
        w.write_record([p.k.to_string(), p.n.to_string(), p.error.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `sweep.json` and `points.csv` into `dir`, creating it if needed.
/// Returns the two paths.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let json = dir.join("sweep.json");
    let csv = dir.join("points.csv");
    write_json(&json, result)?;
    write_points_csv(&csv, &result.points)?;
    Ok((json, csv))
}
