//! Readers and writers for the tool's CSV and netpbm file formats.
//!
//! Machine-readable CSVs write floats with the shortest decimal that
//! round-trips, so re-reading an emitted file reproduces the exact values.

mod heatmap_file;
mod inputs;
mod tables;

pub use heatmap_file::{
    read_heatmap, read_heatmap_csv, read_pgm, write_heatmap_csv, write_pgm, HeatmapFormat,
};
pub use inputs::{
    read_annotations, read_truth, read_votes, write_annotations, write_truth, write_votes,
    VoteRecord,
};
pub use tables::{
    read_best_counts, read_rankings, read_rbo_rows, read_score_tables, read_sweeps,
    write_best_counts, write_rankings, write_rbo_rows, write_score_tables, write_sweeps,
    SweepRecord,
};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Rows of a headed CSV file with their 1-based line numbers.
pub(crate) struct CsvRows {
    pub path: PathBuf,
    pub rows: Vec<(u64, csv::StringRecord)>,
}

impl CsvRows {
    /// Reads `path`, requiring exactly `header`. An empty file yields no rows.
    pub fn read(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let malformed = |line: u64, message: String| Error::MalformedCsv {
            path: path.to_path_buf(),
            line,
            message,
        };
        let found = reader.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
        let mut rows = Vec::new();
        if found.is_empty() || (found.len() == 1 && found[0].is_empty()) {
            return Ok(CsvRows {
                path: path.to_path_buf(),
                rows,
            });
        }
        if found.iter().ne(header.iter().copied()) {
            return Err(malformed(
                1,
                format!("expected header {:?}, found {:?}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                malformed(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            rows.push((line, record));
        }
        Ok(CsvRows {
            path: path.to_path_buf(),
            rows,
        })
    }

    pub fn error(&self, line: u64, message: impl Into<String>) -> Error {
        Error::MalformedCsv {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    pub fn parse<T: std::str::FromStr>(&self, line: u64, record: &csv::StringRecord, col: usize, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        record[col]
            .parse()
            .map_err(|e: T::Err| self.error(line, format!("column {name}: {e} ({:?})", &record[col])))
    }

    /// Empty field parses to `None`.
    pub fn parse_opt<T: std::str::FromStr>(&self, line: u64, record: &csv::StringRecord, col: usize, name: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if record[col].is_empty() {
            Ok(None)
        } else {
            self.parse(line, record, col, name).map(Some)
        }
    }
}

pub(crate) fn create_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::MalformedFile {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub(crate) fn finish<W: Write>(path: &Path, writer: csv::Writer<W>) -> Result<()> {
    let mut inner = writer
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
