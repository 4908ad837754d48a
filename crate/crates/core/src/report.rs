//! CSV tables with a `#` comment line and an optional trailing `FIT` row.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Formats a float identically on every run and platform.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CsvTable {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Key/value pairs written as `FIT,key,value,...`.
    pub fit: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new(comment: impl Into<String>, header: &[&str]) -> Self {
        CsvTable {
            comment: comment.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            fit: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn fit_value(&mut self, key: &str, value: String) {
        self.fit.push((key.to_string(), value));
    }

    pub fn write<W: Write>(&self, mut out: W) -> csv::Result<()> {
        writeln!(out, "# {}", self.comment)?;
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        if !self.fit.is_empty() {
            let mut rec = vec!["FIT".to_string()];
            for (k, v) in &self.fit {
                rec.push(k.clone());
                rec.push(v.clone());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> csv::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Ordinary least squares `y ≈ a + b·x`; returns `(a, b)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new("s: grid point; v: value", &["s", "v"]);
        t.push(vec![fmt_f64(0.5), fmt_f64(1e-30)]);
        t.fit_value("slope", fmt_f64(2.0));
        assert_eq!(
            t.to_csv_string(),
            "# s: grid point; v: value\ns,v\n5e-1,1e-30\nFIT,slope,2e0\n"
        );
    }

    #[test]
    fn ols_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let (a, b) = ols(&x, &y);
        assert!((a - 0.5).abs() < 1e-12 && (b + 2.0).abs() < 1e-12);
    }
}
