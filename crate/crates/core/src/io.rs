//! Text output shared by the library dumps and the CLI.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that every double survives a write/read round trip.

use std::io::Write;

/// 17 significant digits, e.g. `1.0000000000000000e0`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV writer that prefixes a `# manifest: <hash>` comment line.
pub struct CsvWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, manifest_hash: &str, header: &[&str]) -> std::io::Result<Self> {
        writeln!(out, "# manifest: {manifest_hash}")?;
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out })
    }

    /// Writes a row of floats.
    pub fn row(&mut self, values: &[f64]) -> std::io::Result<()> {
        let cells: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(self.out, "{}", cells.join(","))
    }

    /// Writes a row of preformatted cells.
    pub fn cells(&mut self, cells: &[String]) -> std::io::Result<()> {
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [1.0, -0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_starts_with_manifest() {
        let mut w = CsvWriter::new(Vec::new(), "abc", &["a", "b"]).unwrap();
        w.row(&[1.0, 2.0]).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# manifest: abc"));
        assert_eq!(lines.next(), Some("a,b"));
        assert_eq!(lines.next(), Some("1.0000000000000000e0,2.0000000000000000e0"));
    }
}
