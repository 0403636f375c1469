//! Tabular data: CSV ingestion, train/test splits and quantization.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use revfrf_forest::{FixedGrid, Task};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    /// Row-major feature values.
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub feature_names: Vec<String>,
    pub task: Task,
    /// Number of classes; 0 for regression.
    pub num_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub label: String,
    pub task: Task,
    /// Columns whose values are integer-encoded by first appearance.
    pub categorical: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dataset: DatasetSpec,
    /// Rows skipped because a cell was empty or not a number.
    pub dropped: usize,
}

/// First-appearance integer codes.
#[derive(Debug, Default)]
struct Encoder(HashMap<String, usize>);

impl Encoder {
    fn code(&mut self, value: &str) -> usize {
        let next = self.0.len();
        *self.0.entry(value.to_owned()).or_insert(next)
    }
}

pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Ingested> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file, schema).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn ingest_reader(reader: impl Read, schema: &CsvSchema) -> Result<Ingested> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header: Vec<String> = csv
        .headers()
        .map_err(|e| CliError::Validation(format!("cannot read header: {e}")))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CliError::Validation("missing header row".into()));
    }
    let label_at = header
        .iter()
        .position(|h| *h == schema.label)
        .ok_or_else(|| CliError::Validation(format!("no label column {:?}", schema.label)))?;
    for c in &schema.categorical {
        if !header.contains(c) {
            return Err(CliError::Validation(format!("no categorical column {c:?}")));
        }
    }
    let features: Vec<usize> = (0..header.len()).filter(|&i| i != label_at).collect();
    let categorical: Vec<bool> = header.iter().map(|h| schema.categorical.contains(h)).collect();
    let mut encoders: Vec<Encoder> = header.iter().map(|_| Encoder::default()).collect();

    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    let mut dropped = 0;
    for (line, record) in csv.records().enumerate() {
        let record = match record {
            Ok(r) if r.len() == header.len() => r,
            Ok(r) => {
                log::warn!("row {}: {} cells, expected {}; dropped", line + 2, r.len(), header.len());
                dropped += 1;
                continue;
            }
            Err(e) => {
                log::warn!("row {}: {e}; dropped", line + 2);
                dropped += 1;
                continue;
            }
        };
        let cell = |i: usize| record[i].trim();
        let mut row = Vec::with_capacity(features.len());
        let mut ok = !cell(label_at).is_empty();
        for &i in &features {
            let v = cell(i);
            if v.is_empty() {
                ok = false;
                break;
            }
            if categorical[i] {
                // Codes are assigned only once the row is known to be kept.
                row.push(f64::NAN);
            } else if let Ok(x) = v.parse::<f64>().map_err(|_| ()).and_then(|x| if x.is_finite() { Ok(x) } else { Err(()) }) {
                row.push(x);
            } else {
                ok = false;
                break;
            }
        }
        if ok && schema.task == Task::Regression && !cell(label_at).parse::<f64>().is_ok_and(f64::is_finite) {
            ok = false;
        }
        if !ok {
            log::warn!("row {}: empty or non-numeric cell; dropped", line + 2);
            dropped += 1;
            continue;
        }
        for (slot, &i) in row.iter_mut().zip(&features) {
            if categorical[i] {
                *slot = encoders[i].code(cell(i)) as f64;
            }
        }
        rows.push(row);
        raw_labels.push(cell(label_at).to_owned());
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!("no usable rows ({dropped} dropped)")));
    }
    let (labels, num_classes) = encode_labels(&raw_labels, schema.task);
    let feature_names = features.iter().map(|&i| header[i].clone()).collect();
    Ok(Ingested { dataset: DatasetSpec { rows, labels, feature_names, task: schema.task, num_classes }, dropped })
}

/// Regression labels parse as numbers. Class labels that are all small
/// non-negative integers keep their values; anything else is coded by
/// first appearance.
fn encode_labels(raw: &[String], task: Task) -> (Vec<f64>, usize) {
    match task {
        Task::Regression => (raw.iter().map(|y| y.parse().expect("checked at ingestion")).collect(), 0),
        Task::Classification => {
            let ints: Option<Vec<usize>> = raw.iter().map(|y| y.parse::<usize>().ok().filter(|&c| c < 1 << 16)).collect();
            let codes = ints.unwrap_or_else(|| {
                let mut enc = Encoder::default();
                raw.iter().map(|y| enc.code(y)).collect()
            });
            let k = codes.iter().max().map_or(0, |&m| m + 1);
            (codes.into_iter().map(|c| c as f64).collect(), k.max(2))
        }
    }
}

impl DatasetSpec {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[feature]).collect()
    }

    /// Column-major quantized features.
    pub fn quantized_columns(&self, grid: FixedGrid) -> Vec<Vec<i64>> {
        (0..self.num_features()).map(|f| grid.quantize_column(&self.column(f))).collect()
    }

    pub fn quantized_rows(&self, grid: FixedGrid) -> Vec<Vec<i64>> {
        self.rows.iter().map(|r| grid.quantize_column(r)).collect()
    }

    fn subset(&self, idx: &[usize]) -> DatasetSpec {
        DatasetSpec {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            task: self.task,
            num_classes: self.num_classes,
        }
    }

    /// Seeded shuffle split; at least one row lands on each side.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(DatasetSpec, DatasetSpec)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(CliError::Validation(format!("test_fraction {test_fraction} outside (0, 1)")));
        }
        if self.num_rows() < 2 {
            return Err(CliError::Validation("need at least 2 rows to split".into()));
        }
        let mut idx: Vec<usize> = (0..self.num_rows()).collect();
        idx.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        let test = ((self.num_rows() as f64 * test_fraction).round() as usize).clamp(1, self.num_rows() - 1);
        let (test_idx, train_idx) = idx.split_at(test);
        Ok((self.subset(train_idx), self.subset(test_idx)))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, label: &str) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
        let mut header = self.feature_names.clone();
        header.push(label.to_owned());
        w.write_record(&header).map_err(|e| CliError::io(path, e))?;
        for (row, y) in self.rows.iter().zip(&self.labels) {
            let mut cells: Vec<String> = row.iter().map(f64::to_string).collect();
            cells.push(y.to_string());
            w.write_record(&cells).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}
