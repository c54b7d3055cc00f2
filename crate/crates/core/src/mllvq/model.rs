//! Trained ML-LVQ predictor: scaling, prototypes and the label-count model.

use std::path::Path;

use crate::boosting::{single, StumpEnsemble};
use crate::dataset::{Dataset, LabelSet, LabelSpace, Scaling};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, parse_usize, write_atomic, Lines};

use super::{top_k, train_meta_labeler, train_mllvq, LvqTrainConfig, MetaLabeler, Polarity, PrototypeBook};

const FORMAT_HEADER: &str = "oilcheck-mllvq";
const FORMAT_VERSION: &str = "1";

/// One ranked prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedPrediction {
    pub scores: Vec<f64>,
    /// Predicted labels, best first; the first is the major ingredient.
    pub ranked: Vec<usize>,
    pub labels: LabelSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlLvqModel {
    pub book: PrototypeBook,
    pub meta: MetaLabeler,
    pub scaling: Scaling,
}

impl MlLvqModel {
    /// Scales `dataset` onto `[-1, +1]`, trains prototypes and the count model on the scaled rows.
    pub fn fit(dataset: &Dataset, config: &LvqTrainConfig, meta_stumps: usize) -> Result<Self> {
        let scaling = Scaling::fit(dataset);
        let scaled = dataset.apply_scaling(&scaling)?;
        let book = train_mllvq(&scaled, config)?;
        let meta = train_meta_labeler(&scaled, meta_stumps)?;
        Ok(MlLvqModel { book, meta, scaling })
    }

    pub fn space(&self) -> &LabelSpace {
        self.book.space()
    }

    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }

    /// Label scores for an unscaled feature vector.
    pub fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.book.score_labels(&self.scaling.apply(x)?)
    }

    /// Keeps the predicted number of top-scoring labels.
    pub fn predict_ranked(&self, x: &[f64]) -> Result<RankedPrediction> {
        let scaled = self.scaling.apply(x)?;
        let scores = self.book.score_labels(&scaled)?;
        let count = self.meta.predict_count(&scaled)?.min(scores.len());
        let ranked = top_k(&scores, count);
        let labels = ranked.iter().copied().collect();
        Ok(RankedPrediction { scores, ranked, labels })
    }

    pub fn to_text(&self) -> String {
        let book = &self.book;
        let mut out = String::new();
        out.push_str(&format!("{FORMAT_HEADER}\t{FORMAT_VERSION}\n"));
        out.push_str(&format!("labels\t{}\n", book.space().names().join("\t")));
        out.push_str(&format!("dim\t{}\n", book.dim()));
        out.push_str(&format!("per_class\t{}\n", book.per_class()));
        let lo: Vec<String> = self.scaling.ranges.iter().map(|r| fmt_f64(r.0)).collect();
        let hi: Vec<String> = self.scaling.ranges.iter().map(|r| fmt_f64(r.1)).collect();
        out.push_str(&format!("scale_min\t{}\n", lo.join("\t")));
        out.push_str(&format!("scale_max\t{}\n", hi.join("\t")));
        for p in book.prototypes() {
            let polarity = match p.polarity {
                Polarity::Positive => "+",
                Polarity::Negative => "-",
            };
            let coords: Vec<String> = p.position.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&format!("prototype\t{}\t{polarity}\t{}\n", p.label, coords.join("\t")));
        }
        match &self.meta.model {
            None => out.push_str(&format!("meta\tconstant\t{}\n", self.meta.counts[0])),
            Some(model) => {
                out.push_str("meta\tstumps\n");
                out.push_str(&model.to_text());
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let version = lines.expect(FORMAT_HEADER)?;
        if version != [FORMAT_VERSION] {
            return Err(Error::ModelFormat(format!("unsupported ML-LVQ model version {version:?}")));
        }
        let space = LabelSpace::new(lines.expect("labels")?.iter().map(|s| s.to_string()))?;
        let dim = parse_usize(single(&lines.expect("dim")?)?)?;
        let per_class = parse_usize(single(&lines.expect("per_class")?)?)?;
        let lo = parse_vector(&lines.expect("scale_min")?, dim)?;
        let hi = parse_vector(&lines.expect("scale_max")?, dim)?;
        let scaling = Scaling {
            ranges: lo.into_iter().zip(hi).collect(),
        };
        let mut positive = vec![Vec::with_capacity(per_class); space.len()];
        let mut negative = vec![Vec::with_capacity(per_class); space.len()];
        for _ in 0..2 * per_class * space.len() {
            let fields = lines.expect("prototype")?;
            if fields.len() != 2 + dim {
                return Err(Error::ModelFormat(format!(
                    "prototype line has {} fields, expected {}",
                    fields.len(),
                    2 + dim
                )));
            }
            let label = parse_usize(fields[0])?;
            if label >= space.len() {
                return Err(Error::ModelFormat(format!("prototype label {label} out of range")));
            }
            let position = parse_vector(&fields[2..], dim)?;
            match fields[1] {
                "+" => positive[label].push(position),
                "-" => negative[label].push(position),
                other => return Err(Error::ModelFormat(format!("unknown polarity `{other}`"))),
            }
        }
        let book = PrototypeBook::new(space, positive, negative).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let meta_fields = lines.expect("meta")?;
        let meta = match meta_fields.as_slice() {
            ["constant", count] => MetaLabeler::from_model(None, Some(parse_usize(count)?))?,
            ["stumps"] => {
                let model = StumpEnsemble::read(&mut lines)?;
                if model.dim != dim {
                    return Err(Error::ModelFormat("meta-labeler dimension differs from the prototypes".into()));
                }
                MetaLabeler::from_model(Some(model), None)?
            }
            other => return Err(Error::ModelFormat(format!("malformed meta line {other:?}"))),
        };
        Ok(MlLvqModel { book, meta, scaling })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn parse_vector(fields: &[&str], dim: usize) -> Result<Vec<f64>> {
    if fields.len() != dim {
        return Err(Error::ModelFormat(format!("expected {dim} values, found {}", fields.len())));
    }
    fields.iter().map(|f| parse_f64(f)).collect()
}
