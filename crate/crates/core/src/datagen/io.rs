//! Dataset files.
//!
//! CSV: header `x_0,…,x_{d−1},y`, one sample per row. Line records: a JSON
//! header object on the first line, then one `[x_0, …, x_{d−1}, y]` array per
//! line. Both print floats in shortest round-trip decimal, so reading back
//! reproduces every bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{DataSet, LabeledSample};
use crate::error::{Error, Result};

use super::GenKind;

pub const RECORD_FORMAT: &str = "gradem-records";
const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordHeader {
    pub format: String,
    pub version: u32,
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<GenKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RecordHeader {
    pub fn new(d: usize, n: usize, kind: Option<GenKind>, seed: Option<u64>) -> Self {
        Self {
            format: RECORD_FORMAT.into(),
            version: RECORD_VERSION,
            d,
            n,
            kind,
            seed,
        }
    }
}

pub fn write_csv<W: Write>(data: &DataSet, out: W) -> Result<()> {
    let d = data.dim().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..d).map(|i| format!("x_{i}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for s in data {
        w.write_record(s.x.iter().chain([&s.y]).map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<DataSet> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let d = header
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::Format("empty header".into()))?;
    for (i, name) in header.iter().enumerate() {
        let want = if i == d {
            "y".to_string()
        } else {
            format!("x_{i}")
        };
        if name.trim() != want {
            return Err(Error::Format(format!(
                "header column {i} is {name:?}, expected {want:?}"
            )));
        }
    }
    let mut samples = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("row {}: {v:?} is not a number ({e})", row + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(split_row(values, d, row + 1)?);
    }
    DataSet::new(samples)
}

fn split_row(mut values: Vec<f64>, d: usize, row: usize) -> Result<LabeledSample> {
    if values.len() != d + 1 {
        return Err(Error::Format(format!(
            "row {row} has {} values, expected {}",
            values.len(),
            d + 1
        )));
    }
    let y = values.pop().expect("d + 1 >= 1");
    Ok(LabeledSample::new(values, y))
}

pub fn write_records<W: Write>(data: &DataSet, header: &RecordHeader, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    if header.n != data.len() || (header.d != data.dim().unwrap_or(header.d)) {
        return Err(Error::Format(
            "record header disagrees with dataset shape".into(),
        ));
    }
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    let mut row = Vec::with_capacity(header.d + 1);
    for s in data {
        row.clear();
        row.extend_from_slice(&s.x);
        row.push(s.y);
        serde_json::to_writer(&mut w, &row)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<(RecordHeader, DataSet)> {
    let mut lines = BufReader::new(input).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("missing header line".into()))??;
    let header: RecordHeader = serde_json::from_str(&first)?;
    if header.format != RECORD_FORMAT || header.version != RECORD_VERSION {
        return Err(Error::Format(format!(
            "unsupported record format {} v{}",
            header.format, header.version
        )));
    }
    let mut samples = Vec::with_capacity(header.n);
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = serde_json::from_str(&line)?;
        samples.push(split_row(values, header.d, row + 1)?);
    }
    if samples.len() != header.n {
        return Err(Error::Format(format!(
            "header promises {} samples, found {}",
            header.n,
            samples.len()
        )));
    }
    Ok((header, DataSet::new(samples)?))
}

/// Reads `.csv` as CSV and anything else as line records.
pub fn load_dataset(path: &Path) -> Result<DataSet> {
    let file = File::open(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => read_csv(file),
        _ => read_records(file).map(|(_, d)| d),
    }
}
