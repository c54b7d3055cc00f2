//! Real (confidence-rated) AdaBoost.MH over decision stumps.
//!
//! Every example/label pair `(i, l)` carries a weight and a target
//! `Y[i, l] = +1` when `l` belongs to the example's label set, `-1` otherwise.
//! Each round picks the stump minimizing `Z = 2 Σ_branch Σ_l √(W₊ W₋)`, assigns
//! per-branch, per-label confidences `½ ln((W₊ + ε) / (W₋ + ε))` with
//! `ε = 1 / (N L)` and reweights by `exp(-Y h)`. The binary detector is the
//! one-label case.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::{Dataset, LabelSet, LabelSpace};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_f64, parse_usize, write_atomic, Lines};

const FORMAT_HEADER: &str = "oilcheck-stumps";
const FORMAT_VERSION: &str = "1";

/// Name of the single label used by the binary adulteration detector.
pub const ADULTERANT: &str = "adulterant";

/// Depth-one rule on attribute `feature`: emits `c_above` when `x[feature] > threshold`
/// and `c_below` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionStump {
    pub feature: usize,
    pub threshold: f64,
    pub c_below: Vec<f64>,
    pub c_above: Vec<f64>,
}

impl DecisionStump {
    #[inline]
    pub fn responses(&self, x: &[f64]) -> &[f64] {
        if x[self.feature] > self.threshold {
            &self.c_above
        } else {
            &self.c_below
        }
    }
}

/// Distribution over (example, label) pairs, stored row-major `N × L`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    examples: usize,
    labels: usize,
    weights: Vec<f64>,
}

impl WeightMatrix {
    pub fn uniform(examples: usize, labels: usize) -> Self {
        let w = 1.0 / (examples * labels) as f64;
        WeightMatrix {
            examples,
            labels,
            weights: vec![w; examples * labels],
        }
    }

    pub fn from_vec(examples: usize, labels: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != examples * labels {
            return Err(Error::InvalidParameter(format!(
                "weight matrix needs {} entries, got {}",
                examples * labels,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
        }
        Ok(WeightMatrix {
            examples,
            labels,
            weights,
        })
    }

    pub fn get(&self, example: usize, label: usize) -> f64 {
        self.weights[example * self.labels + label]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.examples, self.labels)
    }
}

/// Feature rows plus the `±1` target matrix one boosting run works on.
#[derive(Clone, Debug)]
pub struct BoostProblem<'a> {
    rows: Vec<&'a [f64]>,
    targets: Vec<i8>,
    space: LabelSpace,
    dim: usize,
}

impl<'a> BoostProblem<'a> {
    /// `targets` is row-major `N × L` with entries `+1` or `-1`.
    pub fn new(rows: Vec<&'a [f64]>, targets: Vec<i8>, space: LabelSpace) -> Result<Self> {
        let n = rows.len();
        let labels = space.len();
        if n < 2 {
            return Err(Error::Degenerate(format!("need at least 2 examples, got {n}")));
        }
        if targets.len() != n * labels || targets.iter().any(|&t| t != 1 && t != -1) {
            return Err(Error::InvalidParameter("targets must be an N x L matrix of +1/-1".into()));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::InvalidDataset("zero-dimensional features".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        if labels == 1 && targets.iter().all(|&t| t == targets[0]) {
            let side = if targets[0] > 0 { "positive" } else { "negative" };
            return Err(Error::Degenerate(format!(
                "all {n} examples are {side}; a one-label problem needs both signs"
            )));
        }
        Ok(BoostProblem {
            rows,
            targets,
            space,
            dim,
        })
    }

    /// Multi-label problem: `Y[i, l] = +1` iff `l` is in example `i`'s label set.
    pub fn multilabel(dataset: &'a Dataset) -> Result<Self> {
        let labels = dataset.labels();
        let mut targets = Vec::with_capacity(dataset.len() * labels);
        for e in &dataset.examples {
            targets.extend((0..labels).map(|l| if e.labels.contains(&l) { 1 } else { -1 }));
        }
        let rows = dataset.examples.iter().map(|e| e.features.as_slice()).collect();
        Self::new(rows, targets, dataset.space.clone())
    }

    /// One-label problem: mixtures are `+1`, pure samples `-1`.
    pub fn binary(dataset: &'a Dataset) -> Result<Self> {
        let (rows, targets) = dataset.binary_view().into_iter().unzip();
        Self::new(rows, targets, LabelSpace::new([ADULTERANT])?)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> usize {
        self.space.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn target(&self, example: usize, label: usize) -> i8 {
        self.targets[example * self.labels() + label]
    }

    pub fn row(&self, example: usize) -> &'a [f64] {
        self.rows[example]
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }
}

/// Attribute values pre-sorted once per training run.
struct SortedColumns {
    n: usize,
    order: Vec<u32>,
    values: Vec<f64>,
}

impl SortedColumns {
    fn new(problem: &BoostProblem<'_>) -> Self {
        let n = problem.len();
        let d = problem.dim();
        let mut order = Vec::with_capacity(n * d);
        let mut values = Vec::with_capacity(n * d);
        let mut idx: Vec<u32> = Vec::with_capacity(n);
        for j in 0..d {
            idx.clear();
            idx.extend(0..n as u32);
            idx.sort_by(|&a, &b| {
                problem.rows[a as usize][j]
                    .total_cmp(&problem.rows[b as usize][j])
                    .then(a.cmp(&b))
            });
            values.extend(idx.iter().map(|&i| problem.rows[i as usize][j]));
            order.extend_from_slice(&idx);
        }
        SortedColumns { n, order, values }
    }

    fn column(&self, j: usize) -> (&[u32], &[f64]) {
        let span = j * self.n..(j + 1) * self.n;
        (&self.order[span.clone()], &self.values[span])
    }
}

/// Threshold strictly between two consecutive distinct sorted values `lo < hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid >= lo && mid < hi {
        mid
    } else {
        lo
    }
}

fn below_min(min: f64) -> f64 {
    min - min.abs().max(1.0)
}

#[derive(Clone, Copy, Debug)]
struct Split {
    z: f64,
    feature: usize,
    /// Number of sorted values falling below the threshold.
    cut: usize,
}

fn better(a: Split, b: Split) -> Split {
    match a.z.total_cmp(&b.z).then(a.feature.cmp(&b.feature)) {
        Ordering::Greater => b,
        _ => a,
    }
}

/// Weight of positive and negative targets per (example, label), flattened.
struct SignedWeights {
    pos: Vec<f64>,
    neg: Vec<f64>,
    total_pos: Vec<f64>,
    total_neg: Vec<f64>,
}

impl SignedWeights {
    fn new(problem: &BoostProblem<'_>, weights: &WeightMatrix) -> Self {
        let labels = problem.labels();
        let mut pos = vec![0.0; weights.weights.len()];
        let mut neg = vec![0.0; weights.weights.len()];
        let mut total_pos = vec![0.0; labels];
        let mut total_neg = vec![0.0; labels];
        for (k, &w) in weights.weights.iter().enumerate() {
            if problem.targets[k] > 0 {
                pos[k] = w;
                total_pos[k % labels] += w;
            } else {
                neg[k] = w;
                total_neg[k % labels] += w;
            }
        }
        SignedWeights {
            pos,
            neg,
            total_pos,
            total_neg,
        }
    }
}

fn split_z(below_pos: &[f64], below_neg: &[f64], total_pos: &[f64], total_neg: &[f64]) -> f64 {
    let mut z = 0.0;
    for l in 0..below_pos.len() {
        let above_pos = (total_pos[l] - below_pos[l]).max(0.0);
        let above_neg = (total_neg[l] - below_neg[l]).max(0.0);
        z += (below_pos[l] * below_neg[l]).sqrt() + (above_pos * above_neg).sqrt();
    }
    2.0 * z
}

fn best_split_for_feature(columns: &SortedColumns, signed: &SignedWeights, j: usize, labels: usize) -> Split {
    let (order, values) = columns.column(j);
    let mut below_pos = vec![0.0; labels];
    let mut below_neg = vec![0.0; labels];
    let mut best = Split {
        z: split_z(&below_pos, &below_neg, &signed.total_pos, &signed.total_neg),
        feature: j,
        cut: 0,
    };
    for k in 1..order.len() {
        let i = order[k - 1] as usize;
        let row = i * labels;
        for l in 0..labels {
            below_pos[l] += signed.pos[row + l];
            below_neg[l] += signed.neg[row + l];
        }
        if values[k - 1] < values[k] {
            let z = split_z(&below_pos, &below_neg, &signed.total_pos, &signed.total_neg);
            if z < best.z {
                best = Split { z, feature: j, cut: k };
            }
        }
    }
    best
}

fn search(problem: &BoostProblem<'_>, columns: &SortedColumns, weights: &WeightMatrix) -> (DecisionStump, f64) {
    let labels = problem.labels();
    let signed = SignedWeights::new(problem, weights);
    let best = (0..problem.dim())
        .into_par_iter()
        .map(|j| best_split_for_feature(columns, &signed, j, labels))
        .reduce_with(better)
        .expect("at least one feature");

    let (order, values) = columns.column(best.feature);
    let threshold = if best.cut == 0 {
        below_min(values[0])
    } else {
        midpoint(values[best.cut - 1], values[best.cut])
    };

    let eps = 1.0 / (problem.len() * labels) as f64;
    let mut below_pos = vec![0.0; labels];
    let mut below_neg = vec![0.0; labels];
    for &i in &order[..best.cut] {
        let row = i as usize * labels;
        for l in 0..labels {
            below_pos[l] += signed.pos[row + l];
            below_neg[l] += signed.neg[row + l];
        }
    }
    let confidence = |p: f64, n: f64| 0.5 * ((p.max(0.0) + eps) / (n.max(0.0) + eps)).ln();
    let c_below = (0..labels).map(|l| confidence(below_pos[l], below_neg[l])).collect();
    let c_above = (0..labels)
        .map(|l| {
            confidence(
                signed.total_pos[l] - below_pos[l],
                signed.total_neg[l] - below_neg[l],
            )
        })
        .collect();
    (
        DecisionStump {
            feature: best.feature,
            threshold,
            c_below,
            c_above,
        },
        best.z,
    )
}

/// Exhaustive weak-learner search: every attribute, every midpoint between
/// consecutive distinct values plus one threshold below the minimum. Returns
/// the stump and its `Z` criterion; ties go to the smaller attribute index,
/// then the smaller threshold.
pub fn best_stump(problem: &BoostProblem<'_>, weights: &WeightMatrix) -> Result<(DecisionStump, f64)> {
    if weights.shape() != (problem.len(), problem.labels()) {
        return Err(Error::InvalidParameter(format!(
            "weight matrix shape {:?} does not match problem {}x{}",
            weights.shape(),
            problem.len(),
            problem.labels()
        )));
    }
    let columns = SortedColumns::new(problem);
    Ok(search(problem, &columns, weights))
}

/// Candidate thresholds the weak learner considers for one attribute, ascending.
pub fn candidate_thresholds(values: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.is_empty() {
        return Vec::new();
    }
    let mut out = vec![below_min(sorted[0])];
    out.extend(sorted.windows(2).map(|w| midpoint(w[0], w[1])));
    out
}

/// Incremental trainer. Each [`Booster::step`] adds one stump and reweights.
pub struct Booster<'p, 'a> {
    problem: &'p BoostProblem<'a>,
    columns: SortedColumns,
    weights: WeightMatrix,
    scores: Vec<f64>,
    stumps: Vec<DecisionStump>,
    z_history: Vec<f64>,
}

impl<'p, 'a> Booster<'p, 'a> {
    pub fn new(problem: &'p BoostProblem<'a>) -> Self {
        Booster {
            problem,
            columns: SortedColumns::new(problem),
            weights: WeightMatrix::uniform(problem.len(), problem.labels()),
            scores: vec![0.0; problem.len() * problem.labels()],
            stumps: Vec::new(),
            z_history: Vec::new(),
        }
    }

    /// One boosting round; returns the normalizer `Z` of the weight update.
    pub fn step(&mut self) -> f64 {
        let (stump, _) = search(self.problem, &self.columns, &self.weights);
        let labels = self.problem.labels();
        let mut z = 0.0;
        for i in 0..self.problem.len() {
            let h = stump.responses(self.problem.row(i));
            for l in 0..labels {
                let k = i * labels + l;
                let y = f64::from(self.problem.targets[k]);
                self.weights.weights[k] *= (-y * h[l]).exp();
                self.scores[k] += h[l];
                z += self.weights.weights[k];
            }
        }
        self.weights.weights.iter_mut().for_each(|w| *w /= z);
        self.stumps.push(stump);
        self.z_history.push(z);
        z
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    /// Fraction of (example, label) pairs where the sign rule `f > 0` disagrees with `Y`.
    pub fn training_error(&self) -> f64 {
        let wrong = self
            .scores
            .iter()
            .zip(&self.problem.targets)
            .filter(|&(&f, &y)| (f > 0.0) != (y > 0))
            .count();
        wrong as f64 / self.scores.len() as f64
    }

    /// `Π Z_t` over the rounds so far.
    pub fn error_bound(&self) -> f64 {
        self.z_history.iter().product()
    }

    pub fn finish(self) -> StumpEnsemble {
        StumpEnsemble {
            stumps: self.stumps,
            space: self.problem.space.clone(),
            z_history: self.z_history,
            dim: self.problem.dim(),
        }
    }
}

/// Trains exactly `rounds` rounds on `problem`.
pub fn train(problem: &BoostProblem<'_>, rounds: usize) -> Result<StumpEnsemble> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("round count must be at least 1".into()));
    }
    let mut booster = Booster::new(problem);
    for _ in 0..rounds {
        booster.step();
    }
    Ok(booster.finish())
}

/// Multi-label AdaBoost.MH on the dataset's label sets.
pub fn train_adaboost_mh(dataset: &Dataset, rounds: usize) -> Result<StumpEnsemble> {
    train(&BoostProblem::multilabel(dataset)?, rounds)
}

/// Binary adulteration detector: one label, positive for mixtures.
pub fn train_binary(dataset: &Dataset, rounds: usize) -> Result<StumpEnsemble> {
    train(&BoostProblem::binary(dataset)?, rounds)
}

/// A trained ensemble; `f(x, l) = Σ_t h_t(x, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StumpEnsemble {
    pub stumps: Vec<DecisionStump>,
    pub space: LabelSpace,
    pub z_history: Vec<f64>,
    pub dim: usize,
}

impl StumpEnsemble {
    pub fn rounds(&self) -> usize {
        self.stumps.len()
    }

    pub fn labels(&self) -> usize {
        self.space.len()
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

    pub fn predict_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut scores = vec![0.0; self.labels()];
        for stump in &self.stumps {
            for (s, c) in scores.iter_mut().zip(stump.responses(x)) {
                *s += c;
            }
        }
        Ok(scores)
    }

    /// Scores after each of the given round counts (ascending, each ≤ `rounds()`).
    pub fn staged_scores(&self, x: &[f64], stages: &[usize]) -> Result<Vec<Vec<f64>>> {
        self.check_dim(x)?;
        let mut out = Vec::with_capacity(stages.len());
        let mut scores = vec![0.0; self.labels()];
        let mut done = 0;
        for &stage in stages {
            if stage < done || stage > self.rounds() {
                return Err(Error::InvalidParameter(format!(
                    "stage {stage} out of order or beyond {} rounds",
                    self.rounds()
                )));
            }
            for stump in &self.stumps[done..stage] {
                for (s, c) in scores.iter_mut().zip(stump.responses(x)) {
                    *s += c;
                }
            }
            done = stage;
            out.push(scores.clone());
        }
        Ok(out)
    }

    /// Labels with a strictly positive score. May be empty.
    pub fn predict_labels(&self, x: &[f64]) -> Result<LabelSet> {
        Ok(labels_from_scores(&self.predict_scores(x)?))
    }

    /// The first `rounds` stumps as a model of their own.
    pub fn truncated(&self, rounds: usize) -> StumpEnsemble {
        let rounds = rounds.min(self.rounds());
        StumpEnsemble {
            stumps: self.stumps[..rounds].to_vec(),
            space: self.space.clone(),
            z_history: self.z_history[..rounds].to_vec(),
            dim: self.dim,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{FORMAT_HEADER}\t{FORMAT_VERSION}\n"));
        out.push_str(&format!("labels\t{}\n", self.space.names().join("\t")));
        out.push_str(&format!("dim\t{}\n", self.dim));
        out.push_str(&format!("rounds\t{}\n", self.rounds()));
        for stump in &self.stumps {
            let mut fields = vec![stump.feature.to_string(), fmt_f64(stump.threshold)];
            fields.extend(stump.c_below.iter().map(|&c| fmt_f64(c)));
            fields.extend(stump.c_above.iter().map(|&c| fmt_f64(c)));
            out.push_str(&format!("stump\t{}\n", fields.join("\t")));
        }
        let z: Vec<String> = self.z_history.iter().map(|&z| fmt_f64(z)).collect();
        out.push_str(&format!("z\t{}\n", z.join("\t")));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        Self::read(&mut lines)
    }

    pub(crate) fn read(lines: &mut Lines<'_>) -> Result<Self> {
        let version = lines.expect(FORMAT_HEADER)?;
        if version != [FORMAT_VERSION] {
            return Err(Error::ModelFormat(format!(
                "unsupported stump model version {version:?}"
            )));
        }
        let space = LabelSpace::new(lines.expect("labels")?.iter().map(|s| s.to_string()))?;
        let labels = space.len();
        let dim = parse_usize(single(&lines.expect("dim")?)?)?;
        let rounds = parse_usize(single(&lines.expect("rounds")?)?)?;
        let mut stumps = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let fields = lines.expect("stump")?;
            if fields.len() != 2 + 2 * labels {
                return Err(Error::ModelFormat(format!(
                    "stump line has {} fields, expected {}",
                    fields.len(),
                    2 + 2 * labels
                )));
            }
            let feature = parse_usize(fields[0])?;
            if feature >= dim {
                return Err(Error::ModelFormat(format!("stump feature {feature} >= dim {dim}")));
            }
            let numbers = fields[1..].iter().map(|t| parse_f64(t)).collect::<Result<Vec<_>>>()?;
            stumps.push(DecisionStump {
                feature,
                threshold: numbers[0],
                c_below: numbers[1..1 + labels].to_vec(),
                c_above: numbers[1 + labels..].to_vec(),
            });
        }
        let z_fields = lines.expect("z")?;
        let z_history = z_fields
            .iter()
            .filter(|t| !t.is_empty())
            .map(|t| parse_f64(t))
            .collect::<Result<Vec<_>>>()?;
        if z_history.len() != rounds {
            return Err(Error::ModelFormat("z history length differs from round count".into()));
        }
        Ok(StumpEnsemble {
            stumps,
            space,
            z_history,
            dim,
        })
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

pub(crate) fn single<'a>(fields: &[&'a str]) -> Result<&'a str> {
    match fields {
        [one] => Ok(one),
        _ => Err(Error::ModelFormat(format!("expected one value, found {fields:?}"))),
    }
}

/// The sign rule: every label whose score is strictly positive.
pub fn labels_from_scores(scores: &[f64]) -> LabelSet {
    scores
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s > 0.0)
        .map(|(l, _)| l)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Example;

    fn one_d(values: &[f64], positive: &[bool]) -> Dataset {
        let space = LabelSpace::new(["a", "b"]).unwrap();
        let examples = values
            .iter()
            .zip(positive)
            .enumerate()
            .map(|(i, (&v, &p))| {
                let labels = if p { LabelSet::from([0, 1]) } else { LabelSet::from([0]) };
                Example::new(i.to_string(), vec![v], labels, None).unwrap()
            })
            .collect();
        Dataset::new(space, examples).unwrap()
    }

    fn stump(c_below: f64, c_above: f64) -> DecisionStump {
        DecisionStump {
            feature: 0,
            threshold: 0.0,
            c_below: vec![c_below],
            c_above: vec![c_above],
        }
    }

    fn ensemble(stumps: Vec<DecisionStump>) -> StumpEnsemble {
        let z_history = vec![1.0; stumps.len()];
        StumpEnsemble {
            stumps,
            space: LabelSpace::new([ADULTERANT]).unwrap(),
            z_history,
            dim: 1,
        }
    }

    #[test]
    fn separable_line_needs_one_round() {
        let ds = one_d(&[-2.0, -1.0, 1.0, 2.0], &[false, false, true, true]);
        let problem = BoostProblem::binary(&ds).unwrap();
        let mut booster = Booster::new(&problem);
        booster.step();
        assert_eq!(booster.training_error(), 0.0);
        let model = booster.finish();
        assert_eq!(model.stumps[0].threshold, 0.0);
    }

    #[test]
    fn candidate_count_on_four_values() {
        let c = candidate_thresholds(&[3.0, 1.0, 4.0, 2.0, 2.0]);
        assert_eq!(c, vec![0.0, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn separating_stump_has_smaller_z() {
        // Uniform weights, four examples, one label: separating split has W₋ = 0 on both sides.
        let ds = one_d(&[1.0, 2.0, 3.0, 4.0], &[false, false, true, true]);
        let problem = BoostProblem::binary(&ds).unwrap();
        let w = WeightMatrix::uniform(4, 1);
        let (stump, z) = best_stump(&problem, &w).unwrap();
        assert_eq!(stump.threshold, 2.5);
        assert_eq!(z, 0.0);
        // By hand the best non-separating split (θ = 1.5) has
        // Z = 2(√(0 · ¼) + √(½ · ¼)) = √2 / 2.
        let signed = SignedWeights::new(&problem, &w);
        let below_pos = [0.0];
        let below_neg = [0.25];
        let z_other = split_z(&below_pos, &below_neg, &signed.total_pos, &signed.total_neg);
        assert!((z_other - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn identical_features_tie_to_smaller_index() {
        let space = LabelSpace::new([ADULTERANT]).unwrap();
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let problem = BoostProblem::new(
            rows.iter().map(Vec::as_slice).collect(),
            vec![-1, 1, 1],
            space,
        )
        .unwrap();
        let (stump, _) = best_stump(&problem, &WeightMatrix::uniform(3, 1)).unwrap();
        assert_eq!(stump.feature, 0);
    }

    #[test]
    fn single_label_set_gets_positive_scores() {
        let space = LabelSpace::new(["a", "b"]).unwrap();
        let examples = (0..5)
            .map(|i| Example::new(i.to_string(), vec![i as f64], LabelSet::from([1]), None).unwrap())
            .collect();
        let ds = Dataset::new(space, examples).unwrap();
        let model = train_adaboost_mh(&ds, 1).unwrap();
        for e in &ds.examples {
            let s = model.predict_scores(&e.features).unwrap();
            assert!(s[1] > 0.0 && s[0] < 0.0);
        }
        assert!(model.z_history[0] > 0.0 && model.z_history[0] <= 1.0);
    }

    #[test]
    fn degenerate_binary_refused() {
        let ds = one_d(&[1.0, 2.0], &[false, false]);
        assert!(matches!(train_binary(&ds, 3), Err(Error::Degenerate(_))));
        let tiny = one_d(&[1.0], &[true]);
        assert!(matches!(train_adaboost_mh(&tiny, 3), Err(Error::Degenerate(_))));
        let ok = one_d(&[1.0, 2.0], &[false, true]);
        assert!(matches!(train_binary(&ok, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn score_rules() {
        let one = ensemble(vec![stump(-0.5, 0.5)]);
        assert_eq!(one.predict_scores(&[1.0]).unwrap(), vec![0.5]);
        assert_eq!(one.predict_scores(&[0.0]).unwrap(), vec![-0.5]);
        assert_eq!(one.predict_labels(&[1.0]).unwrap(), LabelSet::from([0]));
        let two = ensemble(vec![stump(-0.5, 0.5), stump(-0.5, 0.5)]);
        assert_eq!(two.predict_scores(&[1.0]).unwrap(), vec![1.0]);
        assert!(matches!(
            one.predict_scores(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, actual: 2 })
        ));
    }

    #[test]
    fn sign_rule_on_scores() {
        assert_eq!(labels_from_scores(&[0.3, -0.2, 0.1]), LabelSet::from([0, 2]));
        assert!(labels_from_scores(&[-0.3, -0.2, 0.0]).is_empty());
    }

    #[test]
    fn staged_scores_match_truncation() {
        let ds = one_d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[false, true, false, true, true, false]);
        let model = train_adaboost_mh(&ds, 6).unwrap();
        let x = [2.5];
        let staged = model.staged_scores(&x, &[2, 4, 6]).unwrap();
        for (stage, scores) in [2, 4, 6].iter().zip(&staged) {
            assert_eq!(&model.truncated(*stage).predict_scores(&x).unwrap(), scores);
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let ds = one_d(&[0.1, 0.7, 0.3, 0.9, 0.55], &[false, true, false, true, true]);
        let model = train_adaboost_mh(&ds, 4).unwrap();
        let back = StumpEnsemble::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
        assert!(StumpEnsemble::from_text(&model.to_text().replacen("\t1\n", "\t9\n", 1)).is_err());
    }
}
