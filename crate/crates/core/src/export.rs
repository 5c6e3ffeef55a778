//! CSV / JSON writers shared by the library and the command-line front end.
//!
//! CSV follows RFC 4180 (comma separated, CRLF-free `\n` records are accepted
//! by every reader we target), always with a header row; floats carry 17
//! significant digits so values round-trip exactly.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::fundamental::DerivKind;
use crate::image_green::{GridSpec, ImageGreen};

/// Shortest text that round-trips `v` exactly, in scientific notation with
/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes a header and numeric rows.
pub fn write_csv<W, I, R>(mut w: W, header: &[&str], rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let head: Vec<String> = header.iter().map(|h| quote(h)).collect();
    writeln!(w, "{}", head.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes a header and pre-formatted text rows (quoted as needed).
pub fn write_csv_text<W: Write>(mut w: W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let head: Vec<String> = header.iter().map(|h| quote(h)).collect();
    writeln!(w, "{}", head.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// JSON sidecar accompanying a grid export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub variant: String,
    pub eps: f64,
    pub q_rule: String,
    pub singular: (f64, f64),
    pub kind: String,
    pub coefficients: String,
    pub grid: GridSpec,
    pub version: String,
}

impl GridMetadata {
    pub fn new(green: &ImageGreen, grid: &GridSpec, kind: DerivKind) -> Self {
        let spec = green.spec();
        Self {
            variant: spec.variant.name().to_string(),
            eps: spec.eps,
            q_rule: spec.variant.q_rule().to_string(),
            singular: green.singular(),
            kind: kind.name().to_string(),
            coefficients: spec.field.label().to_string(),
            grid: *grid,
            version: crate::VERSION.to_string(),
        }
    }
}

/// Row-major `xi,eta,value` CSV of sampled grid values.
pub fn write_grid_csv<W: Write>(w: W, samples: &[[f64; 3]]) -> io::Result<()> {
    write_csv(w, &["xi", "eta", "value"], samples.iter())
}
