//! Whitespace-separated column export.

use std::io::Write;

use crate::error::{param, Result};

/// Write equal-length columns with a `#`-prefixed header line.
pub fn write_columns<W: Write>(w: &mut W, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    if names.len() != columns.len() {
        return param(format!("{} names for {} columns", names.len(), columns.len()));
    }
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return param("columns differ in length");
    }
    writeln!(w, "# {}", names.join(" "))?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:.17e}", c[i]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Parse columns written by [`write_columns`] or any whitespace table;
/// `#` lines are skipped.
pub fn read_columns(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| crate::error::Error::Parameter(format!("line {}: {e}", no + 1)))?;
        if cols.is_empty() {
            cols = vec![Vec::new(); row.len()];
        }
        if row.len() != cols.len() {
            return param(format!("line {}: expected {} columns", no + 1, cols.len()));
        }
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let a = [0.1, -1e-300, 3.0];
        let b = [f64::MAX, 2.5, -0.0];
        let mut out = Vec::new();
        write_columns(&mut out, &["a", "b"], &[&a, &b]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("# a b\n"));
        let cols = read_columns(&text).unwrap();
        assert_eq!(cols[0], a);
        assert_eq!(cols[1], b);
    }

    #[test]
    fn mismatches_rejected() {
        let mut out = Vec::new();
        assert!(write_columns(&mut out, &["a"], &[&[1.0], &[2.0]]).is_err());
        assert!(write_columns(&mut out, &["a", "b"], &[&[1.0], &[]]).is_err());
        assert!(read_columns("1 2\n3\n").is_err());
        assert!(read_columns("1 x\n").is_err());
    }
}
