//! Multi-label learning vector quantization.
//!
//! Every label `l` owns `S` positive and `S` negative prototypes. The label
//! score is `s(x, l) = d₋(x, l) - d₊(x, l)`, the squared distance to the
//! nearest negative prototype minus the one to the nearest positive
//! prototype. Training runs SGD on the pairwise hinge
//!
//! ```text
//! L(x, Y) = 1 / (|Y| |Ȳ|) · Σ_{p ∈ Y} Σ_{q ∈ Ȳ} max(0, α - (s(x, p) - s(x, q)))
//! ```
//!
//! which bounds the fraction of misordered (relevant, irrelevant) pairs. Each
//! active pair moves the four nearest prototypes it depends on.
//!
//! The trained [`MlLvqModel`] cuts the score ranking at the label count
//! predicted by a boosted [`MetaLabeler`]; the first ranked label is the
//! predicted major ingredient.

mod kmeans;
mod meta;
mod model;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabelSet, LabelSpace};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub use kmeans::{kmeans, JITTER, MAX_ITERATIONS};
pub(crate) use kmeans::squared_distance;
pub use meta::{train_meta_labeler, MetaLabeler, META_STUMPS};
pub use model::{MlLvqModel, RankedPrediction};

/// Factor applied to the mean nearest-center distance to get `η(0)`.
pub const ETA_FACTOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Borrowed view of one prototype.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prototype<'a> {
    pub label: usize,
    pub polarity: Polarity,
    pub position: &'a [f64],
}

/// `S` positive and `S` negative prototypes for each label, stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeBook {
    space: LabelSpace,
    per_class: usize,
    dim: usize,
    positions: Vec<f64>,
}

impl PrototypeBook {
    /// `positive[l]` and `negative[l]` must each hold `per_class` vectors of length `dim`.
    pub fn new(space: LabelSpace, positive: Vec<Vec<Vec<f64>>>, negative: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let labels = space.len();
        let per_class = positive.first().map_or(0, Vec::len);
        let dim = positive.first().and_then(|p| p.first()).map_or(0, Vec::len);
        if per_class == 0 || dim == 0 {
            return Err(Error::InvalidParameter("empty prototype book".into()));
        }
        if positive.len() != labels || negative.len() != labels {
            return Err(Error::InvalidParameter("one prototype group per label required".into()));
        }
        let mut positions = Vec::with_capacity(2 * labels * per_class * dim);
        for l in 0..labels {
            for group in [&positive[l], &negative[l]] {
                if group.len() != per_class {
                    return Err(Error::InvalidParameter(format!(
                        "label {l}: expected {per_class} prototypes, got {}",
                        group.len()
                    )));
                }
                for w in group {
                    if w.len() != dim || w.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "label {l}: prototype of wrong dimension or non-finite"
                        )));
                    }
                    positions.extend_from_slice(w);
                }
            }
        }
        Ok(PrototypeBook {
            space,
            per_class,
            dim,
            positions,
        })
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    pub fn per_class(&self) -> usize {
        self.per_class
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Flat index of the `k`-th prototype of `(label, polarity)`.
    pub fn slot(&self, label: usize, polarity: Polarity, k: usize) -> usize {
        let group = 2 * label + usize::from(polarity == Polarity::Negative);
        group * self.per_class + k
    }

    pub fn position(&self, slot: usize) -> &[f64] {
        &self.positions[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn position_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.positions[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn prototypes(&self) -> impl Iterator<Item = Prototype<'_>> {
        (0..self.len()).map(move |slot| {
            let group = slot / self.per_class;
            Prototype {
                label: group / 2,
                polarity: if group.is_multiple_of(2) { Polarity::Positive } else { Polarity::Negative },
                position: self.position(slot),
            }
        })
    }

    /// Nearest prototype of `(label, polarity)`: `(slot, squared distance)`; ties to the lower slot.
    pub fn nearest(&self, x: &[f64], label: usize, polarity: Polarity) -> (usize, f64) {
        let first = self.slot(label, polarity, 0);
        let mut best = (first, f64::INFINITY);
        for slot in first..first + self.per_class {
            let d = squared_distance(x, self.position(slot));
            if d < best.1 {
                best = (slot, d);
            }
        }
        best
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// `s(x, l) = d₋ - d₊` for every label; larger means more likely relevant.
    pub fn score_labels(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.scores_unchecked(x).into_iter().map(|n| n.score()).collect())
    }

    fn scores_unchecked(&self, x: &[f64]) -> Vec<NearestPair> {
        (0..self.space.len())
            .map(|l| NearestPair {
                positive: self.nearest(x, l, Polarity::Positive),
                negative: self.nearest(x, l, Polarity::Negative),
            })
            .collect()
    }

    /// Euclidean distance from `x` to the closest prototype of any label or polarity.
    pub fn nearest_distance(&self, x: &[f64]) -> f64 {
        (0..self.len())
            .map(|slot| squared_distance(x, self.position(slot)))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

#[derive(Clone, Copy)]
struct NearestPair {
    positive: (usize, f64),
    negative: (usize, f64),
}

impl NearestPair {
    fn score(self) -> f64 {
        self.negative.1 - self.positive.1
    }
}

/// Surrogate value at `x` and its gradient with respect to the prototypes.
///
/// The gradient for prototype `w` at `slot` is `coefficient · (x - w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateGradient {
    pub loss: f64,
    pub terms: Vec<(usize, f64)>,
}

/// `None` when every label is relevant (no irrelevant label to pair with).
pub fn surrogate_gradient(book: &PrototypeBook, x: &[f64], labels: &LabelSet, alpha: f64) -> Option<SurrogateGradient> {
    let nearest = book.scores_unchecked(x);
    surrogate_from_nearest(&nearest, labels, alpha)
}

fn surrogate_from_nearest(nearest: &[NearestPair], labels: &LabelSet, alpha: f64) -> Option<SurrogateGradient> {
    let relevant = labels.len();
    let irrelevant = nearest.len() - relevant;
    if relevant == 0 || irrelevant == 0 {
        return None;
    }
    let pair_weight = 1.0 / (relevant * irrelevant) as f64;
    let mut loss = 0.0;
    let mut coefficients: BTreeMap<usize, f64> = BTreeMap::new();
    for &p in labels {
        for q in (0..nearest.len()).filter(|q| !labels.contains(q)) {
            let hinge = alpha - (nearest[p].score() - nearest[q].score());
            if hinge <= 0.0 {
                continue;
            }
            loss += pair_weight * hinge;
            let c = 2.0 * pair_weight;
            *coefficients.entry(nearest[p].positive.0).or_default() -= c;
            *coefficients.entry(nearest[p].negative.0).or_default() += c;
            *coefficients.entry(nearest[q].positive.0).or_default() += c;
            *coefficients.entry(nearest[q].negative.0).or_default() -= c;
        }
    }
    Some(SurrogateGradient {
        loss,
        terms: coefficients.into_iter().filter(|&(_, c)| c != 0.0).collect(),
    })
}

/// Surrogate loss alone.
pub fn surrogate_loss(book: &PrototypeBook, x: &[f64], labels: &LabelSet, alpha: f64) -> Option<f64> {
    let nearest = book.scores_unchecked(x);
    let relevant = labels.len();
    let irrelevant = nearest.len() - relevant;
    if relevant == 0 || irrelevant == 0 {
        return None;
    }
    let mut loss = 0.0;
    for &p in labels {
        for q in (0..nearest.len()).filter(|q| !labels.contains(q)) {
            loss += (alpha - (nearest[p].score() - nearest[q].score())).max(0.0);
        }
    }
    Some(loss / (relevant * irrelevant) as f64)
}

/// Training settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LvqTrainConfig {
    /// Prototypes per (label, polarity).
    pub prototypes: usize,
    /// Passes over the training set.
    pub epochs: usize,
    /// Hinge margin.
    pub alpha: f64,
    /// Initial learning rate; `None` uses `0.1 ·` mean distance to the nearest k-means center.
    pub eta0: Option<f64>,
    pub seed: u64,
}

impl Default for LvqTrainConfig {
    fn default() -> Self {
        LvqTrainConfig {
            prototypes: 1,
            epochs: 40,
            alpha: 0.0,
            eta0: None,
            seed: 0,
        }
    }
}

impl LvqTrainConfig {
    fn validate(&self) -> Result<()> {
        if self.prototypes == 0 || self.epochs == 0 {
            return Err(Error::InvalidParameter("prototype and epoch counts must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if let Some(eta) = self.eta0 {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidParameter(format!("eta0 must be > 0, got {eta}")));
            }
        }
        Ok(())
    }
}

/// Per-label k-means on the examples containing the label (positive
/// prototypes) and on the rest (negative prototypes).
pub fn kmeans_init(dataset: &Dataset, prototypes: usize, seed: u64) -> Result<PrototypeBook> {
    if prototypes == 0 {
        return Err(Error::InvalidParameter("prototype count must be at least 1".into()));
    }
    let labels = dataset.labels();
    let mut positive = Vec::with_capacity(labels);
    let mut negative = Vec::with_capacity(labels);
    for l in 0..labels {
        let (pos, neg): (Vec<&[f64]>, Vec<&[f64]>) = {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for e in &dataset.examples {
                if e.labels.contains(&l) {
                    pos.push(e.features.as_slice());
                } else {
                    neg.push(e.features.as_slice());
                }
            }
            (pos, neg)
        };
        let name = dataset.space.name(l).to_string();
        if pos.is_empty() {
            return Err(Error::NoPositiveExamples(name));
        }
        if neg.is_empty() {
            return Err(Error::Degenerate(format!("label `{name}` is present in every training example")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[l as u64, 0]));
        positive.push(kmeans(&pos, prototypes, &mut rng));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[l as u64, 1]));
        negative.push(kmeans(&neg, prototypes, &mut rng));
    }
    PrototypeBook::new(dataset.space.clone(), positive, negative)
}

/// Mean Euclidean distance from each example to its nearest prototype.
pub fn mean_nearest_distance(book: &PrototypeBook, dataset: &Dataset) -> f64 {
    dataset
        .examples
        .iter()
        .map(|e| book.nearest_distance(&e.features))
        .sum::<f64>()
        / dataset.len() as f64
}

/// What a training run did besides producing the book.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    pub eta0: f64,
    /// Examples skipped because every label was relevant.
    pub skipped: usize,
    /// Mean surrogate loss over the training set after each epoch (traced runs only).
    pub epoch_loss: Vec<f64>,
}

/// SGD on the pairwise hinge surrogate, starting from [`kmeans_init`].
/// The dataset is expected to be scaled to `[-1, +1]`.
pub fn train_mllvq(dataset: &Dataset, config: &LvqTrainConfig) -> Result<PrototypeBook> {
    Ok(train_from(kmeans_init(dataset, config.prototypes, config.seed)?, dataset, config, false)?.0)
}

/// As [`train_mllvq`], also evaluating the mean surrogate loss after every epoch.
pub fn train_mllvq_traced(dataset: &Dataset, config: &LvqTrainConfig) -> Result<(PrototypeBook, TrainTrace)> {
    train_from(kmeans_init(dataset, config.prototypes, config.seed)?, dataset, config, true)
}

/// Mean surrogate over examples that have an irrelevant label.
pub fn mean_surrogate(book: &PrototypeBook, dataset: &Dataset, alpha: f64) -> f64 {
    let losses: Vec<f64> = dataset
        .examples
        .iter()
        .filter_map(|e| surrogate_loss(book, &e.features, &e.labels, alpha))
        .collect();
    if losses.is_empty() {
        0.0
    } else {
        losses.iter().sum::<f64>() / losses.len() as f64
    }
}

/// Runs SGD from an existing book.
pub fn train_from(
    mut book: PrototypeBook,
    dataset: &Dataset,
    config: &LvqTrainConfig,
    trace_loss: bool,
) -> Result<(PrototypeBook, TrainTrace)> {
    config.validate()?;
    if book.dim() != dataset.dim {
        return Err(Error::DimensionMismatch {
            expected: book.dim(),
            actual: dataset.dim,
        });
    }
    if book.space() != &dataset.space {
        return Err(Error::InvalidParameter("prototype book and dataset use different label spaces".into()));
    }
    let eta0 = match config.eta0 {
        Some(eta) => eta,
        None => ETA_FACTOR * mean_nearest_distance(&book, dataset),
    };
    if !(eta0 > 0.0) {
        return Err(Error::Degenerate("initial learning rate is zero; every example sits on a prototype".into()));
    }

    let n = dataset.len();
    let total_steps = (config.epochs * n) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[u64::MAX]));
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = TrainTrace {
        eta0,
        ..TrainTrace::default()
    };
    let mut step = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = eta0 * (1.0 - step as f64 / total_steps);
            step += 1;
            let example = &dataset.examples[i];
            let Some(grad) = surrogate_gradient(&book, &example.features, &example.labels, config.alpha) else {
                trace.skipped += 1;
                continue;
            };
            for &(slot, coefficient) in &grad.terms {
                let w = book.position_mut(slot);
                let factor = eta * coefficient;
                w.iter_mut()
                    .zip(&example.features)
                    .for_each(|(wj, &xj)| *wj -= factor * (xj - *wj));
            }
        }
        if trace_loss {
            trace.epoch_loss.push(mean_surrogate(&book, dataset, config.alpha));
        }
    }
    if trace.skipped > 0 {
        log::warn!(
            "{} example visit(s) skipped: every label relevant, no pair to rank",
            trace.skipped
        );
    }
    Ok((book, trace))
}

/// The `k` highest-scoring labels, best first; ties to the smaller index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order = crate::metrics::rank_order(scores);
    order.truncate(k);
    order
}

/// Fraction of (relevant, irrelevant) pairs the scores order wrongly (ties count as wrong).
pub fn rank_loss(scores: &[f64], labels: &LabelSet) -> Option<f64> {
    let irrelevant: Vec<usize> = (0..scores.len()).filter(|l| !labels.contains(l)).collect();
    if labels.is_empty() || irrelevant.is_empty() {
        return None;
    }
    let wrong = labels
        .iter()
        .flat_map(|&p| irrelevant.iter().map(move |&q| (p, q)))
        .filter(|&(p, q)| scores[p] <= scores[q])
        .count();
    Some(wrong as f64 / (labels.len() * irrelevant.len()) as f64)
}
