//! CSV persistence of sweep results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::to_db;
use crate::{Error, Result};

/// Aggregate of one scheme at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: String,
    pub snr_db: f64,
    pub mean_nmse: f64,
    pub mean_iterations: f64,
    pub mean_runtime_s: f64,
    /// Trials that completed; failed trials are excluded from the means.
    pub trials: usize,
    pub nmse_std_err: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Orders rows by `(scheme, snr_db)`.
    pub fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.snr_db.total_cmp(&b.snr_db)));
    }

    pub fn row(&self, scheme: &str, snr_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.scheme == scheme && r.snr_db == snr_db)
    }

    /// Rows of one scheme in SNR order.
    pub fn curve(&self, scheme: &str) -> Vec<&SweepRow> {
        let mut rows: Vec<_> = self.rows.iter().filter(|r| r.scheme == scheme).collect();
        rows.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        rows
    }
}

const HEADER: [&str; 8] = [
    "scheme",
    "snr_db",
    "mean_nmse",
    "mean_iterations",
    "mean_runtime_s",
    "trials",
    "nmse_std_err",
    "failures",
];

/// The plot-data file written next to `csv_path`.
pub fn plot_data_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("dat")
}

/// Writes `result` to `path` as CSV sorted by `(scheme, snr_db)`, plus a
/// whitespace-separated plot-data file with one block per scheme.
pub fn write_results(result: &SweepResult, path: &Path) -> Result<()> {
    let mut sorted = result.clone();
    sorted.sort();

    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    writer.write_record(HEADER).map_err(|e| csv_error(path, e))?;
    for row in &sorted.rows {
        writer.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;

    let plot_path = plot_data_path(path);
    write_plot_data(&sorted, &plot_path).map_err(|e| Error::io(&plot_path, e))
}

fn write_plot_data(sorted: &SweepResult, path: &Path) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut schemes: Vec<&str> = sorted.rows.iter().map(|r| r.scheme.as_str()).collect();
    schemes.dedup();
    for (k, scheme) in schemes.iter().enumerate() {
        if k > 0 {
            writeln!(out)?;
            writeln!(out)?;
        }
        writeln!(out, "# {scheme}")?;
        writeln!(out, "# snr_db mean_nmse nmse_db mean_iterations mean_runtime_s")?;
        for row in sorted.rows.iter().filter(|r| r.scheme == *scheme) {
            writeln!(
                out,
                "{} {} {} {} {}",
                row.snr_db,
                row.mean_nmse,
                to_db(row.mean_nmse),
                row.mean_iterations,
                row.mean_runtime_s
            )?;
        }
    }
    out.flush()
}

/// Reads a file produced by [`write_results`].
pub fn read_results(path: &Path) -> Result<SweepResult> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(HEADER) {
        return Err(Error::format(path, format!("unexpected header {header:?}")));
    }
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<SweepRow>, _>>()
        .map_err(|e| csv_error(path, e))?;
    Ok(SweepResult { rows })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::format(path, e.to_string())
    }
}
