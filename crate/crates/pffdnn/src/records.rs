//! CSV schemas.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so every file
//! re-parses into bit-identical values. Optional fields are written empty.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use pffdnn_core::fitters::Method;
use pffdnn_core::signals::SignalKind;

use crate::error::{HarnessError, Result};

pub const CONVERGENCE_HEADER: [&str; 9] = [
    "method",
    "signal",
    "delta_omega",
    "seed",
    "update_count",
    "rmse",
    "relative_rmse",
    "test_rmse",
    "train_mse",
];
pub const TIMING_HEADER: [&str; 2] = ["update_count", "wall_seconds"];
pub const RECONSTRUCTION_HEADER: [&str; 3] = ["x", "f_true", "f_fit"];
pub const SAMPLES_HEADER: [&str; 2] = ["x", "f"];
pub const SPECTRUM_HEADER: [&str; 5] = ["k", "frequency", "magnitude", "re", "im"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One checkpoint of one run. `delta_omega` is empty for vanilla fits.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub method: Method,
    pub signal: SignalKind,
    pub delta_omega: Option<usize>,
    pub seed: u64,
    pub update_count: u64,
    pub rmse: f64,
    pub relative_rmse: f64,
    pub test_rmse: Option<f64>,
    /// Mean latest batch loss over the run's networks, in normalized units.
    pub train_mse: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRecord {
    pub update_count: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionRow {
    pub x: f64,
    pub f_true: f64,
    pub f_fit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRow {
    pub x: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub k: usize,
    /// Angular frequency in radians per signal unit.
    pub frequency: f64,
    pub magnitude: f64,
    pub re: f64,
    pub im: f64,
}

/// A row type with a fixed CSV schema.
pub trait CsvRow: Sized {
    const HEADER: &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String>;
}

fn field<T: FromStr>(fields: &[&str], i: usize) -> std::result::Result<T, String> {
    let raw = fields.get(i).ok_or_else(|| format!("missing column {i}"))?;
    raw.parse().map_err(|_| format!("invalid value `{raw}` in column {i}"))
}

fn opt_field<T: FromStr>(fields: &[&str], i: usize) -> std::result::Result<Option<T>, String> {
    match fields.get(i) {
        Some(&"") => Ok(None),
        Some(_) => field(fields, i).map(Some),
        None => Err(format!("missing column {i}")),
    }
}

impl CsvRow for ConvergenceRecord {
    const HEADER: &'static [&'static str] = &CONVERGENCE_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.signal.to_string(),
            fmt_opt(self.delta_omega),
            self.seed.to_string(),
            self.update_count.to_string(),
            fmt_f64(self.rmse),
            fmt_f64(self.relative_rmse),
            fmt_opt_f64(self.test_rmse),
            fmt_opt_f64(self.train_mse),
        ]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self {
            method: field(f, 0)?,
            signal: field(f, 1)?,
            delta_omega: opt_field(f, 2)?,
            seed: field(f, 3)?,
            update_count: field(f, 4)?,
            rmse: field(f, 5)?,
            relative_rmse: field(f, 6)?,
            test_rmse: opt_field(f, 7)?,
            train_mse: opt_field(f, 8)?,
        })
    }
}

impl CsvRow for TimingRecord {
    const HEADER: &'static [&'static str] = &TIMING_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![self.update_count.to_string(), fmt_f64(self.wall_seconds)]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self { update_count: field(f, 0)?, wall_seconds: field(f, 1)? })
    }
}

impl CsvRow for ReconstructionRow {
    const HEADER: &'static [&'static str] = &RECONSTRUCTION_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![fmt_f64(self.x), fmt_f64(self.f_true), fmt_f64(self.f_fit)]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self { x: field(f, 0)?, f_true: field(f, 1)?, f_fit: field(f, 2)? })
    }
}

impl CsvRow for SampleRow {
    const HEADER: &'static [&'static str] = &SAMPLES_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![fmt_f64(self.x), fmt_f64(self.f)]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self { x: field(f, 0)?, f: field(f, 1)? })
    }
}

impl CsvRow for SpectrumRow {
    const HEADER: &'static [&'static str] = &SPECTRUM_HEADER;

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            fmt_f64(self.frequency),
            fmt_f64(self.magnitude),
            fmt_f64(self.re),
            fmt_f64(self.im),
        ]
    }

    fn from_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(Self {
            k: field(f, 0)?,
            frequency: field(f, 1)?,
            magnitude: field(f, 2)?,
            re: field(f, 3)?,
            im: field(f, 4)?,
        })
    }
}

/// Serializes `rows` with a header to an in-memory buffer.
pub fn to_csv_bytes<R: CsvRow>(rows: &[R]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    w.write_record(R::HEADER).expect("in-memory csv write");
    for r in rows {
        w.write_record(r.to_fields()).expect("in-memory csv write");
    }
    w.into_inner().expect("in-memory csv flush")
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    let bytes = to_csv_bytes(rows);
    File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| HarnessError::io(path, e))
}

/// Parses CSV text whose header must equal `R::HEADER`. Row numbers in
/// errors are 1-based file lines.
pub fn parse_csv<R: CsvRow>(path: &Path, bytes: &[u8]) -> Result<Vec<R>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(bytes);
    let mut records = reader.records();
    let parse_err = |row: u64, message: String| HarnessError::Parse { path: path.to_path_buf(), row, message };
    let header = match records.next() {
        Some(h) => h.map_err(|e| parse_err(1, e.to_string()))?,
        None => return Err(parse_err(1, "missing header".into())),
    };
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(parse_err(1, format!("expected header `{}`", R::HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            parse_err(row, e.to_string())
        })?;
        let row = rec.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = rec.iter().collect();
        if fields.len() != R::HEADER.len() {
            return Err(parse_err(row, format!("expected {} columns, found {}", R::HEADER.len(), fields.len())));
        }
        rows.push(R::from_fields(&fields).map_err(|m| parse_err(row, m))?);
    }
    Ok(rows)
}

pub fn read_csv<R: CsvRow>(path: &Path) -> Result<Vec<R>> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    parse_csv(path, &bytes)
}

/// Sort key for combined sweep files: `(method name, delta_omega, update_count)`.
pub fn sort_records(records: &mut [ConvergenceRecord]) {
    records.sort_by(|a, b| {
        (a.method.as_str(), a.delta_omega, a.update_count).cmp(&(b.method.as_str(), b.delta_omega, b.update_count))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn float_format_is_lossless() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn malformed_row_is_named() {
        let text = "x,f\n1.0,2.0\n3.0,oops\n";
        let err = parse_csv::<SampleRow>(&PathBuf::from("s.csv"), text.as_bytes()).unwrap_err();
        match err {
            HarnessError::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("{other}"),
        }
        let short = "x,f\n1.0\n";
        assert!(parse_csv::<SampleRow>(&PathBuf::from("s.csv"), short.as_bytes()).is_err());
        let wrong_header = "a,b\n1,2\n";
        assert!(parse_csv::<SampleRow>(&PathBuf::from("s.csv"), wrong_header.as_bytes()).is_err());
    }
}
