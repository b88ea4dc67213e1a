//! CSV interchange for interaction datasets and attribution tables.
//!
//! Floats are written in Rust's shortest round-trip notation, so a write
//! followed by a read reproduces every value bit for bit.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use xrl_core::{Dataset, EnvSpec, EnvState, SAPair};

use crate::error::{Error, Result};

/// One explained sample: its row in the source dataset, the explained
/// action, the per-feature importances and the explanation wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionRow {
    pub sample_idx: usize,
    pub action: usize,
    pub phi: Vec<f64>,
    pub millis: f64,
}

pub fn dataset_header(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("state_{i}")).chain(["action".to_string()]).collect()
}

pub fn attribution_header(d: usize) -> Vec<String> {
    ["sample_idx".to_string(), "action".to_string()]
        .into_iter()
        .chain((0..d).map(|i| format!("phi_{i}")))
        .chain(["millis".to_string()])
        .collect()
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))?;
    let inner = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner.into_inner().map_err(|e| Error::io(path, e.into_error()))?.sync_all().map_err(|e| Error::io(path, e))
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_dataset_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(dataset_header(dataset.spec().state_dim)).map_err(|e| csv_err(path, e))?;
    let mut row = Vec::new();
    for pair in dataset.pairs() {
        row.clear();
        row.extend(pair.state.as_slice().iter().map(|&v| fmt_f64(v)));
        row.push(pair.action.to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    finish(w, path)
}

/// Reads records, checking the header and the width of every row.
fn read_records(path: &Path, header: &[String]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut out = Vec::new();
    let mut saw_header = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if !saw_header {
            if rec.len() != header.len() {
                return Err(Error::at_line(
                    path,
                    line,
                    format!("expected {} columns, found {}", header.len(), rec.len()),
                ));
            }
            if rec.iter().zip(header).any(|(a, b)| a.trim() != b) {
                return Err(Error::at_line(path, line, format!("header must be {}", header.join(","))));
            }
            saw_header = true;
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::at_line(
                path,
                line,
                format!("expected {} columns, found {}", header.len(), rec.len()),
            ));
        }
        out.push((line, rec));
    }
    if !saw_header {
        return Err(Error::at_line(path, 1, "missing header"));
    }
    Ok(out)
}

fn parse_f64(path: &Path, line: u64, cell: &str) -> Result<f64> {
    match cell.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::at_line(path, line, format!("invalid number {cell:?}"))),
    }
}

fn parse_index(path: &Path, line: u64, cell: &str, what: &str) -> Result<usize> {
    cell.trim().parse::<usize>().map_err(|_| Error::at_line(path, line, format!("invalid {what} {cell:?}")))
}

pub fn read_dataset_csv(path: &Path, spec: &EnvSpec) -> Result<Dataset> {
    let d = spec.state_dim;
    let records = read_records(path, &dataset_header(d))?;
    if records.is_empty() {
        return Err(Error::format(path, "dataset has no rows"));
    }
    let mut pairs = Vec::with_capacity(records.len());
    for (line, rec) in records {
        let values = (0..d).map(|i| parse_f64(path, line, &rec[i])).collect::<Result<Vec<_>>>()?;
        let action = parse_index(path, line, &rec[d], "action")?;
        if action >= spec.action_count {
            return Err(Error::at_line(
                path,
                line,
                format!("action {action} out of range for {} actions", spec.action_count),
            ));
        }
        let state = EnvState::new(values).map_err(|e| Error::at_line(path, line, e))?;
        pairs.push(SAPair { state, action });
    }
    Dataset::new(spec.clone(), pairs).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_attributions_csv(rows: &[AttributionRow], d: usize, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(attribution_header(d)).map_err(|e| csv_err(path, e))?;
    for r in rows {
        if r.phi.len() != d {
            return Err(Error::Runtime(format!("attribution for sample {} has {} values, expected {d}", r.sample_idx, r.phi.len())));
        }
        let mut row = vec![r.sample_idx.to_string(), r.action.to_string()];
        row.extend(r.phi.iter().map(|&v| fmt_f64(v)));
        row.push(format!("{:.6}", r.millis));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    finish(w, path)
}

pub fn read_attributions_csv(path: &Path, d: usize) -> Result<Vec<AttributionRow>> {
    read_records(path, &attribution_header(d))?
        .into_iter()
        .map(|(line, rec)| {
            Ok(AttributionRow {
                sample_idx: parse_index(path, line, &rec[0], "sample index")?,
                action: parse_index(path, line, &rec[1], "action")?,
                phi: (0..d).map(|i| parse_f64(path, line, &rec[2 + i])).collect::<Result<_>>()?,
                millis: parse_f64(path, line, &rec[2 + d])?,
            })
        })
        .collect()
}
