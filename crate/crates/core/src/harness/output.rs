//! Plain CSV writer: `# key=value` metadata lines, one header line, then rows
//! with floats at full double precision.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    /// Quoted when it contains a comma or a quote.
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.buf, "# {key}={value}");
        self
    }

    pub fn header(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.len();
        self.buf.push_str(&names.join(","));
        self.buf.push('\n');
        self
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<&mut Self> {
        if cells.len() != self.columns {
            return Err(Error::Dimension(format!("row of {} cells, header has {}", cells.len(), self.columns)));
        }
        let line: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => fmt_float(*v),
                Cell::Text(t) if t.contains([',', '"']) => format!("\"{}\"", t.replace('"', "\"\"")),
                Cell::Text(t) => t.clone(),
                Cell::Empty => String::new(),
            })
            .collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
        Ok(self)
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.buf)?;
        Ok(())
    }
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, std::f64::consts::PI] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn layout() {
        let mut c = Csv::new();
        c.meta("n", 8).header(&["k", "x", "y"]);
        c.row(&[3usize.into(), 0.5.into(), None.into()]).unwrap();
        c.row(&[Cell::Text("a,\"b\"".into()), Cell::Text("ok".into()), Cell::Empty]).unwrap();
        assert_eq!(c.as_str(), "# n=8\nk,x,y\n3,5.0000000000000000e-1,\n\"a,\"\"b\"\"\",ok,\n");
        assert!(c.row(&[1usize.into()]).is_err());
    }
}
