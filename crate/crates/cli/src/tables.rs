//! Plot-ready whitespace tables for gnuplot.

use std::fmt::Write as _;
use std::path::Path;

use modespec::{IntensityScan, WeightSpectrum};

/// Column table with a `#`-prefixed header line.
pub fn write_columns(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut s = format!("# {}\n", header.join(" "));
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    std::fs::write(path, s)
}

/// Scan in gnuplot's grid layout: one block per φ₊, blank line between
/// blocks, ready for `splot ... with pm3d`.
pub fn write_scan(path: &Path, scan: &IntensityScan) -> std::io::Result<()> {
    let mut s = String::from("# phi_plus phi_minus delta_i\n");
    for (i, p) in scan.phi_plus.iter().enumerate() {
        for (j, m) in scan.phi_minus.iter().enumerate() {
            writeln!(s, "{p:?} {m:?} {:?}", scan.get(i, j)).unwrap();
        }
        s.push('\n');
    }
    std::fs::write(path, s)
}

pub fn write_weights(path: &Path, weights: &WeightSpectrum) -> std::io::Result<()> {
    let rows: Vec<Vec<f64>> = weights.iter().map(|(k, w)| vec![k.nx as f64, k.ny as f64, w]).collect();
    write_columns(path, &["nx", "ny", "weight"], &rows)
}
