use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;
use crate::experiments::SweepResult;

pub const SWEEP_HEADER: [&str; 8] = ["x", "fidelity", "stderr", "p_syn0", "p_syn1", "p_syn2", "p_syn3", "trials"];

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// 17 significant digits: enough to round-trip every `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

/// `out.csv` → `out.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<(), CliError> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for p in &sweep.points {
        let mut row = vec![num(p.x), num(p.fidelity), num(p.stderr)];
        match p.syndrome {
            Some(s) => row.extend(s.iter().map(|v| num(*v))),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.push(p.trials.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `x,y` rows to `path`, or to standard output.
pub fn write_curve_csv(path: Option<&Path>, rows: &[(f64, f64)]) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => {
            ensure_parent(p)?;
            Box::new(fs::File::create(p).map_err(io_err(p))?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let label = path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| CliError::Io(format!("{label}: {e}"));
    w.write_record(["x", "y"]).map_err(csv_err)?;
    for (x, y) in rows {
        w.write_record([num(*x), num(*y)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{label}: {e}")))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Reads a headed CSV into columns; empty cells become `None`.
pub fn read_columns(path: &Path) -> Result<BTreeMap<String, Vec<Option<f64>>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
        _ => CliError::Config(format!("input: {e}")),
    })?;
    let headers: Vec<String> =
        r.headers().map_err(|e| CliError::Config(format!("input: {e}")))?.iter().map(str::to_string).collect();
    let mut cols: BTreeMap<String, Vec<Option<f64>>> = headers.iter().map(|h| (h.clone(), Vec::new())).collect();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("input: {e}")))?;
        for (h, cell) in headers.iter().zip(rec.iter()) {
            let v = if cell.trim().is_empty() {
                None
            } else {
                Some(cell.trim().parse::<f64>().map_err(|_| {
                    CliError::Config(format!("input: row {}, column `{h}`: {cell:?} is not a number", line + 1))
                })?)
            };
            cols.get_mut(h).expect("header column").push(v);
        }
    }
    Ok(cols)
}
