//! Point-cloud CSV format.
//!
//! One point per line, comma-separated decimal coordinates, no header. The
//! dimension is taken from the first line. Coordinates are written with 17
//! significant digits, which round-trips every `f64` exactly.

use std::io::{Read, Write};

use crate::design::DesignProblem;
use crate::error::{DesignError, Result};

/// Formats one coordinate with 17 significant digits.
pub fn format_coord(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_points_csv<W: Write>(mut out: W, problem: &DesignProblem) -> Result<()> {
    let mut line = String::new();
    for p in problem.points() {
        line.clear();
        for (j, x) in p.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_coord(*x));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads points; `lift` appends a constant 1 to every row.
pub fn read_points_csv<R: Read>(input: R, lift: bool) -> Result<DesignProblem> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DesignError::Parse { line, msg: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let width = record.len();
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(DesignError::Parse { line, msg: format!("expected {d} coordinates, found {width}") })
            }
            _ => {}
        }
        for field in record.iter() {
            let x: f64 = field
                .parse()
                .map_err(|_| DesignError::Parse { line, msg: format!("cannot parse `{field}` as a number") })?;
            if !x.is_finite() {
                return Err(DesignError::Parse { line, msg: format!("non-finite coordinate `{field}`") });
            }
            coords.push(x);
        }
        if lift {
            coords.push(1.0);
        }
    }
    let dim = dim.ok_or_else(|| DesignError::Parse { line: 1, msg: "no points".into() })?;
    DesignProblem::from_flat(dim + usize::from(lift), coords)
}
