//! CSV and JSON result files.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::sweep::ParetoRow;

pub const CSV_HEADER: [&str; 13] = [
    "protocol",
    "eps",
    "k",
    "param",
    "param_value",
    "analytic_asr",
    "analytic_mse",
    "empirical_asr",
    "empirical_asr_stderr",
    "empirical_mse",
    "n",
    "runs",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::range("format", "csv or json", s)),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ParetoRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.protocol.clone(),
            real(r.eps),
            r.k.to_string(),
            r.param.clone().unwrap_or_default(),
            opt_real(r.param_value),
            real(r.analytic_asr),
            real(r.analytic_mse),
            opt_real(r.empirical_asr),
            opt_real(r.empirical_asr_stderr),
            opt_real(r.empirical_mse),
            r.n.to_string(),
            r.runs.map(|v| v.to_string()).unwrap_or_default(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ParetoRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n").map_err(|e| Error::Json(serde_json::Error::io(e)))?;
    Ok(())
}

/// Writes `rows` to `path` in the given format.
pub fn export(rows: &[ParetoRow], format: Format, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, &mut buf)?,
    }
    std::fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ParetoRow>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    if reader.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::MissingColumn(CSV_HEADER.join(",")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| Error::UnparsableRow {
            line,
            value: cell(i).to_string(),
        };
        let req = |i: usize| cell(i).parse::<f64>().map_err(|_| bad(i));
        let opt = |i: usize| -> Result<Option<f64>> {
            if cell(i).is_empty() {
                Ok(None)
            } else {
                req(i).map(Some)
            }
        };
        let int = |i: usize| cell(i).parse::<u64>().map_err(|_| bad(i));
        rows.push(ParetoRow {
            protocol: cell(0).to_string(),
            eps: req(1)?,
            k: int(2)? as usize,
            param: Some(cell(3).to_string()).filter(|s| !s.is_empty()),
            param_value: opt(4)?,
            analytic_asr: req(5)?,
            analytic_mse: req(6)?,
            empirical_asr: opt(7)?,
            empirical_asr_stderr: opt(8)?,
            empirical_mse: opt(9)?,
            n: int(10)?,
            runs: if cell(11).is_empty() { None } else { Some(int(11)? as usize) },
            seed: int(12)?,
        });
    }
    Ok(rows)
}
