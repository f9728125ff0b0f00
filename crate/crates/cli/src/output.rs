//! CSV writing. Numbers use 17 significant digits in scientific notation,
//! which round-trips every `f64`; NaN is written `nan`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

/// A CSV table buffered in memory and written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, self.to_bytes()?).map_err(|e| CliError::io(path, e))
    }
}

/// Where a command writes its files.
#[derive(Debug, Clone)]
pub struct OutDir {
    pub root: PathBuf,
    pub plot_data: bool,
}

impl OutDir {
    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn plot_file(&self, name: &str) -> PathBuf {
        self.root.join("plot").join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.2188010496002884e-1, -7.5e300, 5e-324, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn table_bytes_are_plain_csv() {
        let mut t = Table::new(&["x", "cdf"]);
        t.push(vec![num(0.5), num(1.0)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "x,cdf\n5.0000000000000000e-1,1.0000000000000000e0\n");
    }
}
