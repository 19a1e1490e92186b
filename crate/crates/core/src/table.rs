//! Plain CSV output with fixed float formatting.

use std::io::Write;

use crate::error::Result;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // nine significant digits
            Cell::Float(v) if v.is_finite() => write!(f, "{v:.8e}"),
            Cell::Float(v) if v.is_nan() => write!(f, "nan"),
            Cell::Float(v) => write!(f, "{}", if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

pub trait Row {
    fn cells(&self) -> Vec<Cell>;
}

impl Row for Vec<Cell> {
    fn cells(&self) -> Vec<Cell> {
        self.clone()
    }
}

/// Writes `# comment` lines, a header and the rows.
pub fn write_csv<W: Write, R: Row>(
    out: &mut W,
    comments: &[String],
    header: &[&str],
    rows: &[R],
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let line: Vec<String> = r.cells().iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
