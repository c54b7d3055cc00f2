//! Repeated stratified cross validation with nested model selection.
//!
//! Each run deals the examples into `k` folds stratified by label set. For
//! every fold the training part is split once more (2/3 fit, 1/3 validate) to
//! pick the grid parameter, the winner is retrained on the whole training
//! part and evaluated on the held-out fold. Scaling, PCA and all learned
//! statistics only ever see training rows.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boosting::{labels_from_scores, BoostProblem, StumpEnsemble};
use crate::dataset::{Dataset, LabelSet, LabelSpace};
use crate::error::{Error, Result};
use crate::metrics::{micro_f1, pool_curves, EvaluationReport, MainIngredient, PredictionRecord, RatioBin};
use crate::mllvq::{LvqTrainConfig, MlLvqModel, META_STUMPS};
use crate::pca::{fit_pca, PcaModel, PcaRule};
use crate::seed::derive_seed;

/// Label names of the two-class view used when evaluating the binary detector.
pub const BINARY_LABELS: [&str; 2] = ["pure", "adulterant"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Pure versus adulterated, AdaBoost.MH with one label.
    BinaryBoost,
    /// Ingredient sets with multi-label AdaBoost.MH.
    MlBoost,
    /// Ingredient sets and their ordering with ML-LVQ.
    MlLvq,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::BinaryBoost, Method::MlBoost, Method::MlLvq];

    pub fn name(self) -> &'static str {
        match self {
            Method::BinaryBoost => "binary-boost",
            Method::MlBoost => "ml-boost",
            Method::MlLvq => "ml-lvq",
        }
    }

    /// Name of the parameter the grid searches over.
    pub fn parameter(self) -> &'static str {
        match self {
            Method::BinaryBoost | Method::MlBoost => "T",
            Method::MlLvq => "S",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}` (binary-boost, ml-boost, ml-lvq)")))
    }
}

/// Candidate parameters for model selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_binary: Vec<usize>,
    pub t_multilabel: Vec<usize>,
    pub prototypes: Vec<usize>,
    /// When set, boosting runs on PCA projections chosen by this rule.
    #[serde(with = "pca_rule_text")]
    pub pca_rule: Option<PcaRule>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            t_binary: vec![100, 200, 300, 400, 500],
            t_multilabel: vec![20, 40, 60, 80, 100],
            prototypes: vec![1, 3, 5, 7, 9],
            pca_rule: None,
        }
    }
}

impl GridSpec {
    /// Sorted, de-duplicated candidates for `method`.
    pub fn candidates(&self, method: Method) -> Result<Vec<usize>> {
        let raw = match method {
            Method::BinaryBoost => &self.t_binary,
            Method::MlBoost => &self.t_multilabel,
            Method::MlLvq => &self.prototypes,
        };
        let mut values = raw.clone();
        values.sort_unstable();
        values.dedup();
        if values.is_empty() || values[0] == 0 {
            return Err(Error::InvalidParameter(format!(
                "{} grid for {method} must be non-empty and positive",
                method.parameter()
            )));
        }
        Ok(values)
    }
}

mod pca_rule_text {
    use super::PcaRule;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rule: &Option<PcaRule>, s: S) -> Result<S::Ok, S::Error> {
        match rule {
            Some(rule) => s.serialize_str(&rule.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<PcaRule>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|text| text.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Everything that fixes a cross-validation run besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub method: Method,
    pub grid: GridSpec,
    pub runs: usize,
    pub folds: usize,
    pub seed: u64,
    /// ML-LVQ passes over the training data.
    pub epochs: usize,
    /// ML-LVQ hinge margin.
    pub alpha: f64,
    /// Boosting rounds of the ML-LVQ label-count model.
    pub meta_stumps: usize,
    pub bin_width: f64,
}

impl ProtocolConfig {
    pub fn new(method: Method) -> Self {
        ProtocolConfig {
            method,
            grid: GridSpec::default(),
            runs: 10,
            folds: 5,
            seed: 0,
            epochs: 40,
            alpha: 0.0,
            meta_stumps: META_STUMPS,
            bin_width: crate::metrics::DEFAULT_BIN_WIDTH,
        }
    }

    fn validate(&self) -> Result<()> {
        self.grid.candidates(self.method)?;
        if self.runs == 0 {
            return Err(Error::InvalidParameter("cv.runs must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidParameter("cv.folds must be at least 2".into()));
        }
        if self.grid.pca_rule.is_some() && self.method == Method::MlLvq {
            return Err(Error::InvalidParameter("pca.rule applies to the boosting methods only".into()));
        }
        if !(self.bin_width > 0.0 && self.bin_width <= 1.0) {
            return Err(Error::InvalidParameter(format!("bin width must lie in (0, 1], got {}", self.bin_width)));
        }
        Ok(())
    }
}

/// One train/test split of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub run: usize,
    pub fold: usize,
    /// Row indices, ascending.
    pub test: Vec<usize>,
    pub train: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_ids<'a>(&self, dataset: &'a Dataset) -> Vec<&'a str> {
        self.test.iter().map(|&i| dataset.examples[i].id.as_str()).collect()
    }

    pub fn train_ids<'a>(&self, dataset: &'a Dataset) -> Vec<&'a str> {
        self.train.iter().map(|&i| dataset.examples[i].id.as_str()).collect()
    }
}

/// Stratified `k`-fold split, stratified by the full label set.
///
/// Every class is shuffled and dealt round-robin from one pointer shared by
/// all classes and started at a seeded offset, so per-class fold counts
/// differ by at most one and small classes land in distinct folds.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldAssignment>> {
    let labels: Vec<&LabelSet> = dataset.examples.iter().map(|e| &e.labels).collect();
    stratified_kfold_labels(&labels, k, seed)
}

fn stratified_kfold_labels(labels: &[&LabelSet], k: usize, seed: u64) -> Result<Vec<FoldAssignment>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("fold count must be at least 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::InvalidParameter(format!(
            "fold count {k} exceeds the {} available examples",
            labels.len()
        )));
    }
    let mut classes: BTreeMap<&LabelSet, Vec<usize>> = BTreeMap::new();
    for (i, set) in labels.iter().enumerate() {
        classes.entry(set).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pointer = rng.random_range(0..k);
    let mut fold_of = vec![0usize; labels.len()];
    for members in classes.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of[i] = pointer;
            pointer = (pointer + 1) % k;
        }
    }
    Ok((0..k)
        .map(|fold| {
            let (test, train) = (0..labels.len()).partition(|&i| fold_of[i] == fold);
            FoldAssignment {
                run: 0,
                fold,
                test,
                train,
            }
        })
        .collect())
}

/// `(fit, validate)` row indices: fold 0 of a stratified 3-fold split is held out.
pub fn validation_split(dataset: &Dataset, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut folds = stratified_kfold(dataset, 3, seed)?;
    let first = folds.swap_remove(0);
    Ok((first.train, first.test))
}

/// The winning grid point and what every point scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub parameter: usize,
    pub validation_score: f64,
    /// `None` marks a point that failed to train.
    pub scores: Vec<(usize, Option<f64>)>,
}

/// Picks the grid point with the best validation score (binary: accuracy,
/// multi-label: micro-F1); ties go to the smallest value.
pub fn nested_select(train: &Dataset, config: &ProtocolConfig, seed: u64) -> Result<Selection> {
    let candidates = config.grid.candidates(config.method)?;
    let (fit_rows, validate_rows) = validation_split(train, derive_seed(seed, &[0]))?;
    let fit = train.subset(&fit_rows)?;
    let validate = train.subset(&validate_rows)?;
    let (fit, validate, _) = apply_pca(&fit, &validate, config.grid.pca_rule)?;

    let scores: Vec<(usize, Option<f64>)> = match config.method {
        Method::BinaryBoost | Method::MlBoost => match boost_records(config.method, &fit, &validate, &candidates) {
            Ok(per_stage) => candidates
                .iter()
                .zip(per_stage)
                .map(|(&t, records)| (t, Some(validation_score(config.method, &records))))
                .collect(),
            Err(e) => {
                log::warn!("grid {:?} failed to train: {e}", candidates);
                candidates.iter().map(|&t| (t, None)).collect()
            }
        },
        Method::MlLvq => candidates
            .par_iter()
            .map(|&s| {
                let lvq = lvq_config(config, s, derive_seed(seed, &[1]));
                match lvq_records(&fit, &validate, &lvq, config.meta_stumps) {
                    Ok(records) => (s, Some(validation_score(config.method, &records))),
                    Err(e) => {
                        log::warn!("S = {s} failed to train: {e}");
                        (s, None)
                    }
                }
            })
            .collect(),
    };

    let mut best: Option<(usize, f64)> = None;
    for &(value, score) in &scores {
        if let Some(score) = score {
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((value, score));
            }
        }
    }
    let (parameter, validation_score) = best.ok_or_else(|| {
        Error::GridExhausted(format!("{} over {:?}", config.method, candidates))
    })?;
    Ok(Selection {
        parameter,
        validation_score,
        scores,
    })
}

fn validation_score(method: Method, records: &[PredictionRecord]) -> f64 {
    match method {
        Method::BinaryBoost => crate::metrics::detect_rate(records),
        Method::MlBoost | Method::MlLvq => micro_f1(records),
    }
}

fn lvq_config(config: &ProtocolConfig, prototypes: usize, seed: u64) -> LvqTrainConfig {
    LvqTrainConfig {
        prototypes,
        epochs: config.epochs,
        alpha: config.alpha,
        eta0: None,
        seed,
    }
}

/// PCA fitted on `train` only, applied to both sides. Also returns the kept dimension.
pub fn apply_pca(train: &Dataset, test: &Dataset, rule: Option<PcaRule>) -> Result<(Dataset, Dataset, Option<usize>)> {
    let Some(rule) = rule else {
        return Ok((train.clone(), test.clone(), None));
    };
    let model = fit_pca(train)?;
    let m = model.select_components(rule);
    Ok((model.transform(train, m)?, model.transform(test, m)?, Some(m)))
}

/// Binary records live in the two-label space `pure` / `adulterant`.
pub fn binary_record(truth_is_mixture: bool, score: f64) -> PredictionRecord {
    let class = |adulterant: bool| LabelSet::from([usize::from(adulterant)]);
    PredictionRecord {
        truth: class(truth_is_mixture),
        truth_ratios: None,
        predicted: class(score > 0.0),
        scores: vec![-score, score],
        ranked: None,
    }
}

pub fn binary_space() -> LabelSpace {
    LabelSpace::new(BINARY_LABELS).expect("fixed names are valid")
}

/// Records of a boosting model on `test`.
pub fn ensemble_records(method: Method, model: &StumpEnsemble, test: &Dataset) -> Result<Vec<PredictionRecord>> {
    Ok(boost_stage_records(method, model, test, &[model.rounds()])?.remove(0))
}

fn boost_stage_records(
    method: Method,
    model: &StumpEnsemble,
    test: &Dataset,
    stages: &[usize],
) -> Result<Vec<Vec<PredictionRecord>>> {
    let mut out = vec![Vec::with_capacity(test.len()); stages.len()];
    for e in &test.examples {
        for (records, scores) in out.iter_mut().zip(model.staged_scores(&e.features, stages)?) {
            records.push(match method {
                Method::BinaryBoost => binary_record(e.is_mixture(), scores[0]),
                _ => PredictionRecord {
                    truth: e.labels.clone(),
                    truth_ratios: e.ratios.clone(),
                    predicted: labels_from_scores(&scores),
                    scores,
                    ranked: None,
                },
            });
        }
    }
    Ok(out)
}

/// Trains `max(stages)` rounds once and evaluates every prefix.
fn boost_records(method: Method, train: &Dataset, test: &Dataset, stages: &[usize]) -> Result<Vec<Vec<PredictionRecord>>> {
    let rounds = stages.iter().copied().max().unwrap_or(0);
    let model = fit_boost(method, train, rounds)?;
    boost_stage_records(method, &model, test, stages)
}

/// Trains the boosting model behind `method`.
pub fn fit_boost(method: Method, train: &Dataset, rounds: usize) -> Result<StumpEnsemble> {
    let problem = match method {
        Method::BinaryBoost => BoostProblem::binary(train)?,
        Method::MlBoost => BoostProblem::multilabel(train)?,
        Method::MlLvq => return Err(Error::InvalidParameter("ml-lvq is not a boosting method".into())),
    };
    crate::boosting::train(&problem, rounds)
}

/// Records of an ML-LVQ model on `test`.
pub fn model_records(model: &MlLvqModel, test: &Dataset) -> Result<Vec<PredictionRecord>> {
    test.examples
        .iter()
        .map(|e| {
            let p = model.predict_ranked(&e.features)?;
            Ok(PredictionRecord {
                truth: e.labels.clone(),
                truth_ratios: e.ratios.clone(),
                predicted: p.labels,
                scores: p.scores,
                ranked: Some(p.ranked),
            })
        })
        .collect()
}

fn lvq_records(train: &Dataset, test: &Dataset, config: &LvqTrainConfig, meta_stumps: usize) -> Result<Vec<PredictionRecord>> {
    let model = MlLvqModel::fit(train, config, meta_stumps)?;
    model_records(&model, test)
}

/// Result on one held-out fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub run: usize,
    pub fold: usize,
    pub selection: Selection,
    /// Components kept when PCA is on.
    pub pca_dims: Option<usize>,
    pub report: EvaluationReport,
    pub ids: Vec<String>,
    pub records: Vec<PredictionRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub mean: f64,
    /// Sample standard deviation over folds; 0 for a single fold.
    pub std: f64,
    pub count: usize,
}

impl MeasureSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        MeasureSummary { mean, std, count: n }
    }
}

/// Aggregate of a full protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub method: Method,
    pub runs: usize,
    pub folds: usize,
    pub label_names: Vec<String>,
    pub fold_reports: Vec<FoldReport>,
    /// Mean and spread of each measure over fold reports.
    pub summary: BTreeMap<String, MeasureSummary>,
    pub main_ingredient: MainIngredient,
    /// Ids of mixtures whose first ranked label is not the major component.
    pub main_ingredient_failures: Vec<String>,
    /// Detect rate by minor fraction, pooled over all folds.
    pub ratio_curve: Vec<RatioBin>,
}

impl CvReport {
    pub fn mean(&self, measure: &str) -> Option<f64> {
        self.summary.get(measure).map(|s| s.mean)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(format!("report: {e}")))
    }

    /// Short table of the summary measures.
    pub fn summary_text(&self) -> String {
        let mut out = format!("method\t{}\nfolds\t{}\n", self.method, self.fold_reports.len());
        for (name, s) in &self.summary {
            out.push_str(&format!("{name}\t{:.4}\t± {:.4}\n", s.mean, s.std));
        }
        out
    }

    /// All records, fold by fold.
    pub fn records(&self) -> impl Iterator<Item = (&str, &PredictionRecord)> {
        self.fold_reports
            .iter()
            .flat_map(|f| f.ids.iter().map(String::as_str).zip(&f.records))
    }

    /// Records whose predicted set is wrong.
    pub fn missed(&self) -> impl Iterator<Item = (&str, &PredictionRecord)> {
        self.records().filter(|(_, r)| !r.is_exact())
    }
}

/// Every (run, fold) split the protocol visits, in order.
pub fn protocol_folds(dataset: &Dataset, runs: usize, k: usize, seed: u64) -> Result<Vec<FoldAssignment>> {
    let mut out = Vec::with_capacity(runs * k);
    for run in 0..runs {
        for mut assignment in stratified_kfold(dataset, k, derive_seed(seed, &[run as u64, 0]))? {
            assignment.run = run;
            out.push(assignment);
        }
    }
    Ok(out)
}

/// A model trained by the protocol on one fold's training rows.
#[derive(Clone, Debug, PartialEq)]
pub enum TrainedModel {
    Boost(StumpEnsemble),
    Lvq(MlLvqModel),
}

/// Everything the protocol learns on one fold: selection, PCA and the final model.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldModel {
    pub selection: Selection,
    /// Fitted PCA and the number of kept components.
    pub pca: Option<(PcaModel, usize)>,
    pub model: TrainedModel,
}

impl FoldModel {
    /// Records on `test` rows given in the original feature space.
    pub fn records(&self, method: Method, test: &Dataset) -> Result<Vec<PredictionRecord>> {
        let projected;
        let test = match &self.pca {
            Some((pca, m)) => {
                projected = pca.transform(test, *m)?;
                &projected
            }
            None => test,
        };
        match &self.model {
            TrainedModel::Boost(model) => ensemble_records(method, model, test),
            TrainedModel::Lvq(model) => model_records(model, test),
        }
    }
}

fn fold_seed(config: &ProtocolConfig, assignment: &FoldAssignment) -> u64 {
    derive_seed(config.seed, &[assignment.run as u64, 1, assignment.fold as u64])
}

/// Selection and retraining on the training rows of `assignment`; test rows are never read.
pub fn fit_fold_model(dataset: &Dataset, assignment: &FoldAssignment, config: &ProtocolConfig) -> Result<FoldModel> {
    let seed = fold_seed(config, assignment);
    let train = dataset.subset(&assignment.train)?;
    let selection = nested_select(&train, config, seed)?;
    let pca = match config.grid.pca_rule {
        Some(rule) => {
            let model = fit_pca(&train)?;
            let m = model.select_components(rule);
            log::info!("run {} fold {}: PCA keeps {m} of {} dims", assignment.run, assignment.fold, dataset.dim);
            Some((model, m))
        }
        None => None,
    };
    let train = match &pca {
        Some((model, m)) => model.transform(&train, *m)?,
        None => train,
    };
    let model = match config.method {
        Method::BinaryBoost | Method::MlBoost => TrainedModel::Boost(fit_boost(config.method, &train, selection.parameter)?),
        Method::MlLvq => {
            let lvq = lvq_config(config, selection.parameter, derive_seed(seed, &[2]));
            TrainedModel::Lvq(MlLvqModel::fit(&train, &lvq, config.meta_stumps)?)
        }
    };
    Ok(FoldModel { selection, pca, model })
}

/// Selection, retraining and evaluation on one split.
pub fn run_fold(dataset: &Dataset, assignment: &FoldAssignment, config: &ProtocolConfig) -> Result<FoldReport> {
    let fitted = fit_fold_model(dataset, assignment, config)?;
    let test = dataset.subset(&assignment.test)?;
    let records = fitted.records(config.method, &test)?;
    let mut report = EvaluationReport::evaluate(&records, config.bin_width);
    if config.method == Method::BinaryBoost {
        // binary records carry no mixture ratios
        report.ratio_curve.clear();
    }
    Ok(FoldReport {
        run: assignment.run,
        fold: assignment.fold,
        report,
        pca_dims: fitted.pca.as_ref().map(|&(_, m)| m),
        selection: fitted.selection,
        ids: test.examples.iter().map(|e| e.id.clone()).collect(),
        records,
    })
}

/// `runs` repetitions of stratified `folds`-fold cross validation.
/// Folds run in parallel; the report does not depend on scheduling.
pub fn run_protocol(dataset: &Dataset, config: &ProtocolConfig) -> Result<CvReport> {
    config.validate()?;
    let assignments = protocol_folds(dataset, config.runs, config.folds, config.seed)?;
    let fold_reports = assignments
        .par_iter()
        .map(|a| run_fold(dataset, a, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(dataset, config, fold_reports))
}

fn aggregate(dataset: &Dataset, config: &ProtocolConfig, fold_reports: Vec<FoldReport>) -> CvReport {
    let mut per_measure: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for f in &fold_reports {
        for (name, value) in f.report.measures() {
            per_measure.entry(name.to_string()).or_default().push(value);
        }
    }
    let summary = per_measure
        .into_iter()
        .map(|(name, values)| (name, MeasureSummary::of(&values)))
        .collect();
    let mut main_ingredient = MainIngredient::default();
    let mut main_ingredient_failures = Vec::new();
    for f in &fold_reports {
        let m = &f.report.main_ingredient;
        main_ingredient.correct += m.correct;
        main_ingredient.eligible += m.eligible;
        main_ingredient.missing_ratios += m.missing_ratios;
        main_ingredient.unranked += m.unranked;
        for (id, record) in f.ids.iter().zip(&f.records) {
            if crate::metrics::main_ingredient_hit(record) == Some(false) {
                main_ingredient_failures.push(format!("run{}/fold{}/{id}", f.run, f.fold));
            }
        }
    }
    let ratio_curve = pool_curves(fold_reports.iter().map(|f| f.report.ratio_curve.as_slice()));
    let label_names = match config.method {
        Method::BinaryBoost => binary_space().names().to_vec(),
        _ => dataset.space.names().to_vec(),
    };
    CvReport {
        method: config.method,
        runs: config.runs,
        folds: config.folds,
        label_names,
        fold_reports,
        summary,
        main_ingredient,
        main_ingredient_failures,
        ratio_curve,
    }
}

/// What produced a report, written beside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ProtocolConfig,
    /// SHA-256 of the dataset in its CSV form.
    pub dataset_sha256: String,
    pub examples: usize,
    pub dim: usize,
    pub labels: Vec<String>,
}

impl RunManifest {
    pub fn new(dataset: &Dataset, config: &ProtocolConfig) -> Result<Self> {
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            dataset_sha256: dataset_digest(dataset)?,
            examples: dataset.len(),
            dim: dataset.dim,
            labels: dataset.space.names().to_vec(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn dataset_digest(dataset: &Dataset) -> Result<String> {
    let mut bytes = Vec::new();
    dataset.write_csv(&mut bytes)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// One line of the PCA ablation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaSweepRow {
    #[serde(with = "pca_rule_text")]
    pub rule: Option<PcaRule>,
    /// Kept dimensions per fold.
    pub dims: Vec<usize>,
    pub accuracy: MeasureSummary,
}

/// Binary boosting accuracy with all features and under each PCA rule.
pub fn pca_sweep(dataset: &Dataset, base: &ProtocolConfig, rules: &[PcaRule]) -> Result<Vec<PcaSweepRow>> {
    std::iter::once(None)
        .chain(rules.iter().copied().map(Some))
        .map(|rule| {
            let mut config = base.clone();
            config.method = Method::BinaryBoost;
            config.grid.pca_rule = rule;
            let report = run_protocol(dataset, &config)?;
            Ok(PcaSweepRow {
                rule,
                dims: report.fold_reports.iter().filter_map(|f| f.pca_dims).collect(),
                accuracy: report.summary["accuracy"],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Example;

    fn labelled(sets: &[(&[usize], usize)]) -> Dataset {
        let space = LabelSpace::new(["a", "b", "c"]).unwrap();
        let mut examples = Vec::new();
        for (set, count) in sets {
            for _ in 0..*count {
                let i = examples.len();
                examples.push(Example::new(i.to_string(), vec![i as f64], set.iter().copied().collect(), None).unwrap());
            }
        }
        Dataset::new(space, examples).unwrap()
    }

    #[test]
    fn exact_divisibility() {
        let ds = labelled(&[(&[0], 10), (&[1], 5)]);
        let folds = stratified_kfold(&ds, 5, 3).unwrap();
        for f in &folds {
            let a = f.test.iter().filter(|&&i| ds.examples[i].labels.contains(&0)).count();
            assert_eq!((a, f.test.len() - a), (2, 1));
            assert_eq!(f.test.len() + f.train.len(), 15);
        }
    }

    #[test]
    fn two_member_class_splits() {
        let ds = labelled(&[(&[0], 7), (&[0, 2], 2)]);
        let folds = stratified_kfold(&ds, 5, 11).unwrap();
        let holders: Vec<usize> = folds
            .iter()
            .filter(|f| f.test.iter().any(|&i| ds.examples[i].labels.len() == 2))
            .map(|f| f.fold)
            .collect();
        assert_eq!(holders.len(), 2);
        assert_eq!(stratified_kfold(&ds, 5, 11).unwrap(), folds);
    }

    #[test]
    fn fold_count_is_checked() {
        let ds = labelled(&[(&[0], 3)]);
        assert!(stratified_kfold(&ds, 1, 0).is_err());
        assert!(stratified_kfold(&ds, 4, 0).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn ties_go_to_the_smallest_parameter() {
        // Perfectly separable: every T validates at accuracy 1.
        let space = LabelSpace::new(["a", "b"]).unwrap();
        let examples = (0..30)
            .map(|i| {
                let labels = if i < 15 { LabelSet::from([0]) } else { LabelSet::from([0, 1]) };
                Example::new(i.to_string(), vec![i as f64], labels, None).unwrap()
            })
            .collect();
        let ds = Dataset::new(space, examples).unwrap();
        let mut config = ProtocolConfig::new(Method::BinaryBoost);
        config.grid.t_binary = vec![30, 10, 20];
        let selection = nested_select(&ds, &config, 1).unwrap();
        assert_eq!(selection.parameter, 10);
        assert_eq!(selection.scores.len(), 3);
    }

    #[test]
    fn grid_must_be_positive() {
        let mut grid = GridSpec {
            prototypes: vec![],
            ..GridSpec::default()
        };
        assert!(grid.candidates(Method::MlLvq).is_err());
        grid.t_binary = vec![0, 5];
        assert!(grid.candidates(Method::BinaryBoost).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = MeasureSummary::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(MeasureSummary::of(&[4.0]).std, 0.0);
    }
}
