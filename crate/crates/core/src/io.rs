//! Artifact files: CSV tables with a header row and JSON documents.
//!
//! Floats in CSV are written as `{:.16e}` (17 significant digits), which
//! round-trips every double exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{spacing, PotentialGrid};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Dimension(format!(
                "row of {} cells under a header of {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|c| c.render())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_potential_csv(path: &Path, q: &PotentialGrid) -> Result<()> {
    let rows: Vec<Vec<Cell>> = (0..q.n_points())
        .map(|i| {
            let v = q.values()[i];
            vec![q.x(i).into(), v.re.into(), v.im.into()]
        })
        .collect();
    write_csv(path, &["x", "q_re", "q_im"], &rows)
}

/// Read a `x,q_re,q_im` table written by [`write_potential_csv`]; the nodes must
/// be the uniform grid on `[0, pi]`.
pub fn read_potential_csv(path: &Path) -> Result<PotentialGrid> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["x", "q_re", "q_im"] {
        return Err(Error::Parse(format!(
            "{}: expected header x,q_re,q_im",
            path.display()
        )));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let field = |k: usize, name: &str| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("{}: row {}: bad {name}", path.display(), line + 1)))
        };
        xs.push(field(0, "x")?);
        values.push(Complex64::new(field(1, "q_re")?, field(2, "q_im")?));
    }
    let h = spacing(values.len());
    if let Some(i) = xs.iter().enumerate().position(|(i, x)| (x - i as f64 * h).abs() > 1e-9) {
        return Err(Error::InvalidGrid(format!(
            "{}: row {} is not on the uniform grid",
            path.display(),
            i + 1
        )));
    }
    PotentialGrid::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_round_trips_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let q = PotentialGrid::builtin("x-plus-i-sinx", 65).unwrap();
        write_potential_csv(&path, &q).unwrap();
        let back = read_potential_csv(&path).unwrap();
        assert_eq!(back.values(), q.values());
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&path, &["mu", "residual"], &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "mu,residual\n");
    }

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(Cell::from(3usize).render(), "3");
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        std::fs::write(&path, "x,q_re,q_im\n0,1,oops\n").unwrap();
        assert!(matches!(read_potential_csv(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "a,b\n").unwrap();
        assert!(matches!(read_potential_csv(&path), Err(Error::Parse(_))));
    }
}
