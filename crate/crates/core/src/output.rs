//! File formats shared by the command-line tools.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::mesh::HermiteField;

/// CSV with header `x,u`, one row per sample point.
pub fn write_snapshot_csv(path: &Path, field: &HermiteField, xs: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x,u")?;
    for &x in xs {
        writeln!(out, "{},{}", x, field.evaluate(x, 0))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads back a file written by [`write_snapshot_csv`].
pub fn read_xy_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.chars().any(|c| c.is_ascii_alphabetic())) {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| crate::Error::InvalidParameter(format!("{}: bad row {}: {line}", path.display(), i + 1)))
        };
        rows.push((parse(parts.next())?, parse(parts.next())?));
    }
    Ok(rows)
}

/// Nonzero entries as `row,col,value`.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "row,col,value")?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i},{j},{v:e}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
