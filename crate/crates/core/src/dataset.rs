//! Data model shared by every learner: label spaces, examples with optional
//! mixing ratios, CSV ingestion and the per-attribute `[-1, +1]` scaling.
//!
//! CSV layout, one example per row:
//!
//! ```text
//! id,labels,f0,f1,...,f{d-1}
//! s1,soybean:1,0.10,0.20
//! m1,soybean:0.8|sesame:0.2,0.15,0.22
//! ```
//!
//! The ratio part of a label entry is optional; a row either gives a ratio for
//! every label or for none of them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Indices into a [`LabelSpace`], kept ordered.
pub type LabelSet = BTreeSet<usize>;

/// Ratio tolerance applied when reading files.
const RATIO_READ_TOLERANCE: f64 = 1e-6;
/// Ratio tolerance held by every constructed [`Example`].
const RATIO_TOLERANCE: f64 = 1e-9;

/// Ordered, unique label names. Label `i` is `names()[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSpace {
    names: Vec<String>,
}

impl LabelSpace {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::LabelSpace("at least one label is required".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::LabelSpace("empty label name".into()));
            }
            if name.contains([':', '|', '\t', '\n']) {
                return Err(Error::LabelSpace(format!(
                    "label `{name}` contains a reserved character"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::LabelSpace(format!("duplicate label `{name}`")));
            }
        }
        Ok(LabelSpace { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One sample: a feature vector, its non-empty label set and, for mixtures,
/// the true fraction of each component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub features: Vec<f64>,
    pub labels: LabelSet,
    pub ratios: Option<BTreeMap<usize, f64>>,
}

impl Example {
    pub fn new(
        id: impl Into<String>,
        features: Vec<f64>,
        labels: LabelSet,
        ratios: Option<BTreeMap<usize, f64>>,
    ) -> Result<Self> {
        let id = id.into();
        if labels.is_empty() {
            return Err(Error::InvalidDataset(format!("example `{id}` has no labels")));
        }
        if let Some(column) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "example `{id}` has a non-finite feature at column {column}"
            )));
        }
        if let Some(ratios) = &ratios {
            if !ratios.keys().copied().eq(labels.iter().copied()) {
                return Err(Error::InvalidDataset(format!(
                    "example `{id}`: ratio keys differ from labels"
                )));
            }
            if ratios.values().any(|&r| !(r > 0.0 && r <= 1.0)) {
                return Err(Error::InvalidDataset(format!(
                    "example `{id}`: ratios must lie in (0, 1]"
                )));
            }
            let sum: f64 = ratios.values().sum();
            if (sum - 1.0).abs() > RATIO_TOLERANCE {
                return Err(Error::InvalidDataset(format!(
                    "example `{id}`: ratios sum to {sum}"
                )));
            }
        }
        Ok(Example {
            id,
            features,
            labels,
            ratios,
        })
    }

    pub fn is_mixture(&self) -> bool {
        self.labels.len() >= 2
    }

    /// Fraction of the smallest component; 0 for a pure sample.
    pub fn minor_fraction(&self) -> Option<f64> {
        minor_fraction(&self.labels, self.ratios.as_ref())
    }
}

pub(crate) fn minor_fraction(labels: &LabelSet, ratios: Option<&BTreeMap<usize, f64>>) -> Option<f64> {
    if labels.len() < 2 {
        return Some(0.0);
    }
    ratios.map(|r| r.values().copied().fold(f64::INFINITY, f64::min))
}

/// Per-attribute `(min, max)` pairs of the affine map onto `[-1, +1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub ranges: Vec<(f64, f64)>,
}

impl Scaling {
    pub fn fit(dataset: &Dataset) -> Self {
        let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dataset.dim];
        for example in &dataset.examples {
            for (range, &v) in ranges.iter_mut().zip(&example.features) {
                range.0 = range.0.min(v);
                range.1 = range.1.max(v);
            }
        }
        Scaling { ranges }
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    /// Applies the stored map. Values outside the training range are not clamped.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ranges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ranges.len(),
                actual: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.ranges)
            .map(|(&v, &(lo, hi))| scale_value(v, lo, hi))
            .collect())
    }
}

#[inline]
fn scale_value(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        2.0 * (v - lo) / (hi - lo) - 1.0
    } else {
        0.0
    }
}

/// A labelled sample collection with a common feature dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub space: LabelSpace,
    pub examples: Vec<Example>,
    pub dim: usize,
    pub scaling: Option<Scaling>,
}

impl Dataset {
    pub fn new(space: LabelSpace, examples: Vec<Example>) -> Result<Self> {
        let first = examples
            .first()
            .ok_or_else(|| Error::InvalidDataset("dataset is empty".into()))?;
        let dim = first.features.len();
        for example in &examples {
            if example.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: example.features.len(),
                });
            }
            if let Some(&l) = example.labels.iter().find(|&&l| l >= space.len()) {
                return Err(Error::InvalidDataset(format!(
                    "example `{}` uses label index {l} outside a space of {}",
                    example.id,
                    space.len()
                )));
            }
        }
        Ok(Dataset {
            space,
            examples,
            dim,
            scaling: None,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> usize {
        self.space.len()
    }

    /// Rows at `indices`, in that order. Scaling metadata is kept.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::InvalidDataset("empty subset".into()));
        }
        Ok(Dataset {
            space: self.space.clone(),
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            dim: self.dim,
            scaling: self.scaling.clone(),
        })
    }

    /// Maps every attribute onto `[-1, +1]` with its own min and max and records them.
    pub fn scale_to_unit(&self) -> Dataset {
        let scaling = Scaling::fit(self);
        let mut scaled = self.with_scaling(&scaling);
        scaled.scaling = Some(scaling);
        scaled
    }

    /// Applies an existing scaling, e.g. one fitted on training rows.
    pub fn apply_scaling(&self, scaling: &Scaling) -> Result<Dataset> {
        if scaling.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: scaling.dim(),
                actual: self.dim,
            });
        }
        let mut scaled = self.with_scaling(scaling);
        scaled.scaling = Some(scaling.clone());
        Ok(scaled)
    }

    fn with_scaling(&self, scaling: &Scaling) -> Dataset {
        let examples = self
            .examples
            .iter()
            .map(|e| Example {
                features: e
                    .features
                    .iter()
                    .zip(&scaling.ranges)
                    .map(|(&v, &(lo, hi))| scale_value(v, lo, hi))
                    .collect(),
                ..e.clone()
            })
            .collect();
        Dataset {
            space: self.space.clone(),
            examples,
            dim: self.dim,
            scaling: None,
        }
    }

    /// Pure (one label) rows map to -1, mixtures to +1.
    pub fn binary_view(&self) -> Vec<(&[f64], i8)> {
        self.examples
            .iter()
            .map(|e| (e.features.as_slice(), if e.is_mixture() { 1 } else { -1 }))
            .collect()
    }

    /// Reads a CSV file whose label names must all belong to `space`.
    pub fn load_csv(path: impl AsRef<Path>, space: &LabelSpace) -> Result<Dataset> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, space)
    }

    pub fn read_csv<R: Read>(reader: R, space: &LabelSpace) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::MalformedRow {
                row: 1,
                message: e.to_string(),
            })?
            .clone();
        let dim = parse_header(&header)?;
        let mut examples = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::MalformedRow {
                row,
                message: e.to_string(),
            })?;
            examples.push(parse_row(&record, row, dim, space)?);
        }
        Dataset::new(space.clone(), examples)
    }

    /// `(id, features)` pairs of a CSV file in the dataset layout. The labels
    /// column is ignored and may be empty.
    pub fn read_unlabeled_csv<R: Read>(reader: R) -> Result<Vec<(String, Vec<f64>)>> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::MalformedRow {
                row: 1,
                message: e.to_string(),
            })?
            .clone();
        let dim = parse_header(&header)?;
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 2;
            let record = record.map_err(|e| Error::MalformedRow {
                row,
                message: e.to_string(),
            })?;
            let features = parse_features(&record, row, dim)?;
            rows.push((record[0].to_string(), features));
        }
        Ok(rows)
    }

    pub fn load_unlabeled_csv(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<f64>)>> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_unlabeled_csv(file)
    }

    /// Reads a CSV file and builds the label space from the names found in it,
    /// in order of first appearance.
    pub fn load_csv_infer(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut names: Vec<String> = Vec::new();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::MalformedRow {
                row: i + 2,
                message: e.to_string(),
            })?;
            let field = record.get(1).unwrap_or("");
            for entry in field.split('|') {
                let name = entry.split(':').next().unwrap_or("").trim();
                if !name.is_empty() && !names.iter().any(|n| n == name) {
                    names.push(name.to_string());
                }
            }
        }
        let space = LabelSpace::new(names)?;
        Self::read_csv(text.as_bytes(), &space)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        crate::io::write_atomic(path, &buf)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "labels".to_string()];
        header.extend((0..self.dim).map(|j| format!("f{j}")));
        let to_err = |e: csv::Error| Error::InvalidDataset(format!("csv write: {e}"));
        wtr.write_record(&header).map_err(to_err)?;
        for example in &self.examples {
            let mut record = Vec::with_capacity(self.dim + 2);
            record.push(example.id.clone());
            record.push(format_labels(example, &self.space));
            record.extend(example.features.iter().map(|v| v.to_string()));
            wtr.write_record(&record).map_err(to_err)?;
        }
        wtr.flush()
            .map_err(|e| Error::InvalidDataset(format!("csv write: {e}")))?;
        Ok(())
    }
}

fn parse_header(header: &csv::StringRecord) -> Result<usize> {
    let bad = |message: String| Error::MalformedRow { row: 1, message };
    if header.get(0).map(str::trim) != Some("id") || header.get(1).map(str::trim) != Some("labels") {
        return Err(bad("header must start with `id,labels`".into()));
    }
    let dim = header.len() - 2;
    if dim == 0 {
        return Err(bad("no feature columns".into()));
    }
    for (j, name) in header.iter().skip(2).enumerate() {
        if name.trim() != format!("f{j}") {
            return Err(bad(format!("expected column `f{j}`, found `{name}`")));
        }
    }
    Ok(dim)
}

fn parse_row(record: &csv::StringRecord, row: usize, dim: usize, space: &LabelSpace) -> Result<Example> {
    if record.len() != dim + 2 {
        return Err(Error::MalformedRow {
            row,
            message: format!("expected {} fields, found {}", dim + 2, record.len()),
        });
    }
    let id = record[0].to_string();
    let (labels, ratios) = parse_labels(&record[1], row, space)?;
    let features = parse_features(record, row, dim)?;
    Example::new(id, features, labels, ratios).map_err(|e| Error::MalformedRow {
        row,
        message: e.to_string(),
    })
}

fn parse_features(record: &csv::StringRecord, row: usize, dim: usize) -> Result<Vec<f64>> {
    if record.len() != dim + 2 {
        return Err(Error::MalformedRow {
            row,
            message: format!("expected {} fields, found {}", dim + 2, record.len()),
        });
    }
    let mut features = Vec::with_capacity(dim);
    for (j, field) in record.iter().skip(2).enumerate() {
        let v: f64 = field.trim().parse().map_err(|_| Error::MalformedRow {
            row,
            message: format!("column f{j}: cannot parse `{field}`"),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column: j });
        }
        features.push(v);
    }
    Ok(features)
}

fn parse_labels(
    field: &str,
    row: usize,
    space: &LabelSpace,
) -> Result<(LabelSet, Option<BTreeMap<usize, f64>>)> {
    let mut labels = LabelSet::new();
    let mut ratios = BTreeMap::new();
    let mut with_ratio = 0usize;
    let entries: Vec<&str> = field.split('|').collect();
    for entry in &entries {
        let mut parts = entry.splitn(2, ':');
        let name = parts.next().unwrap_or("").trim();
        if name.is_empty() {
            return Err(Error::MalformedRow {
                row,
                message: "empty label entry".into(),
            });
        }
        let index = space.index_of(name).ok_or_else(|| Error::UnknownLabel {
            row,
            label: name.to_string(),
        })?;
        if !labels.insert(index) {
            return Err(Error::MalformedRow {
                row,
                message: format!("label `{name}` repeated"),
            });
        }
        if let Some(ratio) = parts.next() {
            let r: f64 = ratio.trim().parse().map_err(|_| Error::MalformedRow {
                row,
                message: format!("cannot parse ratio `{ratio}`"),
            })?;
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::MalformedRow {
                    row,
                    message: format!("ratio {r} outside (0, 1]"),
                });
            }
            ratios.insert(index, r);
            with_ratio += 1;
        }
    }
    if with_ratio == 0 {
        return Ok((labels, None));
    }
    if with_ratio != entries.len() {
        return Err(Error::MalformedRow {
            row,
            message: "either every label or none carries a ratio".into(),
        });
    }
    let sum: f64 = ratios.values().sum();
    if (sum - 1.0).abs() > RATIO_READ_TOLERANCE {
        return Err(Error::RatioSum { row, sum });
    }
    if (sum - 1.0).abs() > RATIO_TOLERANCE {
        ratios.values_mut().for_each(|r| *r /= sum);
    }
    Ok((labels, Some(ratios)))
}

fn format_labels(example: &Example, space: &LabelSpace) -> String {
    example
        .labels
        .iter()
        .map(|&l| match example.ratios.as_ref().and_then(|r| r.get(&l)) {
            Some(r) => format!("{}:{}", space.name(l), r),
            None => space.name(l).to_string(),
        })
        .collect::<Vec<_>>()
        .join("|")
}
