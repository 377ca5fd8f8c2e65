//! Numeric CSV files with a trailing `# meta:` comment.
//!
//! Values are written with 17 significant digits so they parse back to the
//! same `f64`. Lines end in LF.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const BOUND_HEADER: [&str; 4] = ["gamma", "ser_ub", "ber_ub", "err_est"];
pub const MC_HEADER: [&str; 5] = ["gamma", "ser", "ber", "symbols", "ci95_ser"];
pub const GAMMA_TABLE_HEADER: [&str; 2] = ["ser_target", "gamma"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsvMeta {
    pub seed: Option<u64>,
    pub config_hash: String,
    pub version: String,
}

impl CsvMeta {
    pub fn new(seed: Option<u64>, config_hash: impl Into<String>) -> Self {
        CsvMeta {
            seed,
            config_hash: config_hash.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn render(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# meta: seed={seed} config_hash={} version={}",
            self.config_hash, self.version
        )
    }

    fn parse(line: &str) -> Option<Self> {
        let body = line.strip_prefix("# meta:")?;
        let mut meta = CsvMeta::default();
        for kv in body.split_whitespace() {
            let (k, v) = kv.split_once('=')?;
            match k {
                "seed" => meta.seed = if v == "none" { None } else { Some(v.parse().ok()?) },
                "config_hash" => meta.config_hash = v.to_string(),
                "version" => meta.version = v.to_string(),
                _ => {}
            }
        }
        Some(meta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: Option<CsvMeta>,
}

/// Integral values print plainly, everything else with 17 significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: CsvMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Dimension {
                what: "CSV row width",
                expected: self.header.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // in-memory writes of plain ASCII cannot fail
        w.write_record(&self.header).expect("in-memory CSV");
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v))).expect("in-memory CSV");
        }
        let mut out = String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("ASCII");
        if let Some(meta) = &self.meta {
            let _ = writeln!(out, "{}", meta.render());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let meta = text.lines().filter_map(CsvMeta::parse).last();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| Error::config(format!("CSV header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(Error::config("empty CSV"));
        }
        let mut table = CsvTable {
            header,
            rows: Vec::new(),
            meta,
        };
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::config(format!("CSV: {e}")))?;
            let row: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::config(format!("malformed CSV row {:?}", rec.iter().collect::<Vec<_>>())))?;
            table.push(row)?;
        }
        Ok(table)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::parse(&text)
    }
}
