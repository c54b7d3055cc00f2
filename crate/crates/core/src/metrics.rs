//! Multi-label evaluation measures.
//!
//! Bipartition measures (micro/macro F1, Jaccard accuracy, detect rate) read
//! the predicted label sets; ranking measures (one-error, average precision)
//! read the score vectors, ranked by descending score with ties going to the
//! smaller label index. On top of these sit the main-ingredient rate and the
//! detect rate binned by the minor component's fraction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{minor_fraction, LabelSet};

/// Bins with fewer records than this are flagged as low-support.
pub const LOW_SUPPORT: usize = 5;

/// Default width of the minor-fraction bins.
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;

/// What one prediction looked like next to its ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub truth: LabelSet,
    pub truth_ratios: Option<BTreeMap<usize, f64>>,
    pub predicted: LabelSet,
    pub scores: Vec<f64>,
    /// Ordered labels, major ingredient first. `None` when the learner does not rank.
    pub ranked: Option<Vec<usize>>,
}

impl PredictionRecord {
    pub fn is_mixture(&self) -> bool {
        self.truth.len() >= 2
    }

    pub fn is_exact(&self) -> bool {
        self.predicted == self.truth
    }

    pub fn minor_fraction(&self) -> Option<f64> {
        minor_fraction(&self.truth, self.truth_ratios.as_ref())
    }
}

/// Label indices by descending score; ties to the smaller index.
pub fn rank_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

#[derive(Default, Clone, Copy)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    fn f1(self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

fn per_label_counts(records: &[PredictionRecord]) -> BTreeMap<usize, Counts> {
    let mut counts: BTreeMap<usize, Counts> = BTreeMap::new();
    for r in records {
        for &l in r.truth.union(&r.predicted) {
            let c = counts.entry(l).or_default();
            match (r.truth.contains(&l), r.predicted.contains(&l)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => unreachable!(),
            }
        }
    }
    counts
}

/// F1 of the pooled true/false positive and false negative counts.
pub fn micro_f1(records: &[PredictionRecord]) -> f64 {
    let pooled = per_label_counts(records)
        .into_values()
        .fold(Counts::default(), |acc, c| Counts {
            tp: acc.tp + c.tp,
            fp: acc.fp + c.fp,
            fn_: acc.fn_ + c.fn_,
        });
    pooled.f1()
}

/// Per-label F1 averaged over labels that are true or predicted at least once.
pub fn macro_f1(records: &[PredictionRecord]) -> f64 {
    let counts = per_label_counts(records);
    if counts.is_empty() {
        return 0.0;
    }
    counts.values().map(|c| c.f1()).sum::<f64>() / counts.len() as f64
}

/// Fraction of records whose top-ranked label is not relevant.
pub fn one_error(records: &[PredictionRecord]) -> f64 {
    mean(records, |r| {
        let top = rank_order(&r.scores)[0];
        if r.truth.contains(&top) {
            0.0
        } else {
            1.0
        }
    })
}

/// Mean over records of the precision at each relevant label's rank.
pub fn average_precision(records: &[PredictionRecord]) -> f64 {
    mean(records, |r| {
        let order = rank_order(&r.scores);
        let mut relevant_seen = 0usize;
        let mut sum = 0.0;
        for (pos, l) in order.iter().enumerate() {
            if r.truth.contains(l) {
                relevant_seen += 1;
                sum += relevant_seen as f64 / (pos + 1) as f64;
            }
        }
        sum / r.truth.len() as f64
    })
}

/// Example-wise Jaccard index `|Y ∩ Z| / |Y ∪ Z|`, with `0/0 = 1`.
pub fn multilabel_accuracy(records: &[PredictionRecord]) -> f64 {
    mean(records, |r| {
        let union = r.truth.union(&r.predicted).count();
        if union == 0 {
            1.0
        } else {
            r.truth.intersection(&r.predicted).count() as f64 / union as f64
        }
    })
}

/// Fraction of records whose predicted set equals the true set.
pub fn detect_rate(records: &[PredictionRecord]) -> f64 {
    mean(records, |r| if r.is_exact() { 1.0 } else { 0.0 })
}

fn mean(records: &[PredictionRecord], f: impl Fn(&PredictionRecord) -> f64) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().map(f).sum::<f64>() / records.len() as f64
}

/// Outcome of the main-ingredient check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MainIngredient {
    pub correct: usize,
    pub eligible: usize,
    /// Mixture records skipped because their true ratios are unknown.
    pub missing_ratios: usize,
    /// Mixture records skipped because the learner produced no ranking.
    pub unranked: usize,
}

impl MainIngredient {
    pub fn rate(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.correct as f64 / self.eligible as f64)
    }
}

/// Whether `ranked[0]` is a component with the largest true fraction.
/// `None` when the record is not eligible.
pub fn main_ingredient_hit(record: &PredictionRecord) -> Option<bool> {
    if !record.is_mixture() {
        return None;
    }
    let ratios = record.truth_ratios.as_ref()?;
    let ranked = record.ranked.as_ref()?;
    let top = ranked.first()?;
    let max = ratios.values().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(ratios.get(top).is_some_and(|&r| r == max))
}

/// Over mixture records: how often the first ranked label is the major component.
pub fn main_ingredient_rate(records: &[PredictionRecord]) -> MainIngredient {
    let mut out = MainIngredient::default();
    for r in records.iter().filter(|r| r.is_mixture()) {
        if r.truth_ratios.is_none() {
            out.missing_ratios += 1;
            continue;
        }
        if r.ranked.is_none() {
            out.unranked += 1;
            continue;
        }
        out.eligible += 1;
        if main_ingredient_hit(r) == Some(true) {
            out.correct += 1;
        }
    }
    if out.missing_ratios > 0 {
        log::warn!(
            "{} mixture record(s) without true ratios excluded from the main-ingredient rate",
            out.missing_ratios
        );
    }
    out
}

/// One point of the detect-rate versus minor-fraction curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioBin {
    /// `lower == upper == 0` marks the pure-sample bin.
    pub lower: f64,
    pub upper: f64,
    pub hits: usize,
    pub support: usize,
    pub detect_rate: f64,
    pub low_support: bool,
}

impl RatioBin {
    fn new(lower: f64, upper: f64, hits: usize, support: usize) -> Self {
        RatioBin {
            lower,
            upper,
            hits,
            support,
            detect_rate: if support == 0 { 0.0 } else { hits as f64 / support as f64 },
            low_support: support < LOW_SUPPORT,
        }
    }

    pub fn is_pure(&self) -> bool {
        self.lower == 0.0 && self.upper == 0.0
    }
}

/// Detect rate per bin of the minor component's fraction. Pure records form
/// their own bin at 0; mixtures with unknown ratios are left out.
pub fn detect_rate_by_ratio(records: &[PredictionRecord], bin_width: f64) -> Vec<RatioBin> {
    assert!(bin_width > 0.0, "bin width must be positive");
    // key: None for pure, Some(bin index) for mixtures
    let mut bins: BTreeMap<Option<u64>, (usize, usize)> = BTreeMap::new();
    for r in records {
        let Some(minor) = r.minor_fraction() else { continue };
        let key = if r.is_mixture() {
            Some((minor / bin_width + 1e-9).floor() as u64)
        } else {
            None
        };
        let entry = bins.entry(key).or_default();
        entry.1 += 1;
        if r.is_exact() {
            entry.0 += 1;
        }
    }
    bins.into_iter()
        .map(|(key, (hits, support))| match key {
            None => RatioBin::new(0.0, 0.0, hits, support),
            Some(b) => RatioBin::new(b as f64 * bin_width, (b + 1) as f64 * bin_width, hits, support),
        })
        .collect()
}

/// Detect rate over mixtures whose minor fraction lies in `[lower, upper]`.
pub fn detect_rate_in_range(records: &[PredictionRecord], lower: f64, upper: f64) -> RatioBin {
    let (mut hits, mut support) = (0, 0);
    for r in records.iter().filter(|r| r.is_mixture()) {
        if let Some(m) = r.minor_fraction() {
            if m >= lower - 1e-12 && m <= upper + 1e-12 {
                support += 1;
                hits += usize::from(r.is_exact());
            }
        }
    }
    RatioBin::new(lower, upper, hits, support)
}

/// Merges curves computed with the same bin width.
pub fn pool_curves<'a>(curves: impl IntoIterator<Item = &'a [RatioBin]>) -> Vec<RatioBin> {
    let mut bins: BTreeMap<(u64, u64), (f64, f64, usize, usize)> = BTreeMap::new();
    for curve in curves {
        for b in curve {
            let key = (b.lower.to_bits(), b.upper.to_bits());
            let e = bins.entry(key).or_insert((b.lower, b.upper, 0, 0));
            e.2 += b.hits;
            e.3 += b.support;
        }
    }
    let mut out: Vec<RatioBin> = bins
        .into_values()
        .map(|(lo, hi, hits, support)| RatioBin::new(lo, hi, hits, support))
        .collect();
    out.sort_by(|a, b| a.lower.total_cmp(&b.lower).then(a.upper.total_cmp(&b.upper)));
    out
}

/// All measures for one set of predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mac_f1: f64,
    pub mic_f1: f64,
    pub one_error: f64,
    pub avg_prec: f64,
    pub accuracy: f64,
    pub detect_rate: f64,
    pub main_ingredient_rate: Option<f64>,
    pub main_ingredient: MainIngredient,
    pub ratio_curve: Vec<RatioBin>,
}

impl EvaluationReport {
    pub fn evaluate(records: &[PredictionRecord], bin_width: f64) -> Self {
        let main_ingredient = main_ingredient_rate(records);
        EvaluationReport {
            mac_f1: macro_f1(records),
            mic_f1: micro_f1(records),
            one_error: one_error(records),
            avg_prec: average_precision(records),
            accuracy: multilabel_accuracy(records),
            detect_rate: detect_rate(records),
            main_ingredient_rate: main_ingredient.rate(),
            main_ingredient,
            ratio_curve: detect_rate_by_ratio(records, bin_width),
        }
    }

    /// The scalar measures by name, in a fixed order.
    pub fn measures(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("mac_f1", self.mac_f1),
            ("mic_f1", self.mic_f1),
            ("one_error", self.one_error),
            ("avg_prec", self.avg_prec),
            ("accuracy", self.accuracy),
            ("detect_rate", self.detect_rate),
        ];
        if let Some(rate) = self.main_ingredient_rate {
            out.push(("main_ingredient_rate", rate));
        }
        out
    }

    /// Line-oriented `key=value` text.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.measures() {
            let _ = writeln!(out, "{k}={v}");
        }
        for b in &self.ratio_curve {
            let _ = writeln!(
                out,
                "ratio_bin[{:.2},{:.2}]=detect_rate:{} support:{}{}",
                b.lower,
                b.upper,
                b.detect_rate,
                b.support,
                if b.low_support { " low_support" } else { "" }
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn rec(truth: &[usize], predicted: &[usize], scores: &[f64]) -> PredictionRecord {
        PredictionRecord {
            truth: truth.iter().copied().collect(),
            truth_ratios: None,
            predicted: predicted.iter().copied().collect(),
            scores: scores.to_vec(),
            ranked: None,
        }
    }

    fn with_ratios(mut r: PredictionRecord, ratios: &[(usize, f64)], ranked: &[usize]) -> PredictionRecord {
        r.truth_ratios = Some(ratios.iter().copied().collect());
        r.ranked = Some(ranked.to_vec());
        r
    }

    #[test]
    fn f1_hand_counts() {
        let records = [rec(&[A], &[A], &[0.0; 3]), rec(&[A, B], &[B], &[0.0; 3])];
        assert!((micro_f1(&records) - 0.8).abs() < 1e-15);
        assert!((macro_f1(&records) - 5.0 / 6.0).abs() < 1e-15);
        let perfect = [rec(&[A, C], &[A, C], &[0.0; 3])];
        assert_eq!(micro_f1(&perfect), 1.0);
        assert_eq!(macro_f1(&perfect), 1.0);
    }

    #[test]
    fn ranking_measures() {
        // rank B > A > C
        let r = rec(&[A], &[A], &[0.5, 0.9, 0.1]);
        assert_eq!(one_error(&[r]), 1.0);
        // rank A > C > B
        let r = rec(&[A, B], &[], &[0.9, 0.1, 0.5]);
        assert!((average_precision(&[r]) - 5.0 / 6.0).abs() < 1e-15);
        let r = rec(&[A, B, C], &[], &[0.1, 0.2, 0.3]);
        assert_eq!(average_precision(&[r]), 1.0);
    }

    #[test]
    fn ties_rank_by_index() {
        assert_eq!(rank_order(&[0.5, 0.5, 0.7]), vec![2, 0, 1]);
        let r = rec(&[A], &[A], &[0.5, 0.5, 0.0]);
        assert_eq!(one_error(&[r]), 0.0);
    }

    #[test]
    fn jaccard_and_exact_match() {
        assert!((multilabel_accuracy(&[rec(&[A, B], &[B, C], &[])]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(multilabel_accuracy(&[rec(&[A, B], &[A, B], &[])]), 1.0);
        assert_eq!(multilabel_accuracy(&[rec(&[A], &[], &[])]), 0.0);
        let records = [rec(&[A], &[A], &[]), rec(&[A, B], &[A, B, C], &[])];
        assert_eq!(detect_rate(&records), 0.5);
        assert_eq!(detect_rate(&records[..1]), 1.0);
    }

    #[test]
    fn main_ingredient_rules() {
        let palm = 0;
        let soybean = 1;
        let sesame = 2;
        let base = rec(&[palm, soybean], &[palm, sesame], &[0.0; 3]);
        let right = with_ratios(base.clone(), &[(palm, 0.8), (soybean, 0.2)], &[palm, sesame]);
        let wrong = with_ratios(base.clone(), &[(palm, 0.8), (soybean, 0.2)], &[soybean, palm]);
        let even = with_ratios(base.clone(), &[(palm, 0.5), (soybean, 0.5)], &[soybean, palm]);
        assert_eq!(main_ingredient_rate(std::slice::from_ref(&right)).rate(), Some(1.0));
        assert_eq!(main_ingredient_rate(&[wrong]).rate(), Some(0.0));
        assert_eq!(main_ingredient_rate(&[even]).rate(), Some(1.0));

        let stats = main_ingredient_rate(&[right, base]);
        assert_eq!((stats.eligible, stats.missing_ratios), (1, 1));
        // Pure records are not eligible.
        assert_eq!(main_ingredient_rate(&[rec(&[A], &[A], &[])]).rate(), None);
    }

    #[test]
    fn ratio_bins() {
        let pure = vec![rec(&[A], &[A], &[]); 3];
        let curve = detect_rate_by_ratio(&pure, 0.1);
        assert_eq!(curve.len(), 1);
        assert!(curve[0].is_pure() && curve[0].support == 3 && curve[0].low_support);

        let mix = |minor: f64, exact: bool| {
            let pred: &[usize] = if exact { &[A, B] } else { &[A] };
            with_ratios(rec(&[A, B], pred, &[]), &[(A, 1.0 - minor), (B, minor)], &[A])
        };
        let records = vec![mix(0.05, false), mix(0.08, true), mix(0.45, true), mix(0.3, true)];
        let curve = detect_rate_by_ratio(&records, 0.1);
        let lowers: Vec<f64> = curve.iter().map(|b| b.lower).collect();
        assert_eq!(lowers, vec![0.0, 0.30000000000000004, 0.4]);
        assert_eq!(curve[0].detect_rate, 0.5);
        assert_eq!(curve.iter().map(|b| b.support).sum::<usize>(), 4);

        let range = detect_rate_in_range(&records, 0.05, 0.15);
        assert_eq!((range.hits, range.support), (1, 2));
    }

    #[test]
    fn pooled_curves_add_counts() {
        let a = vec![RatioBin::new(0.0, 0.0, 2, 3)];
        let b = vec![RatioBin::new(0.0, 0.0, 1, 1), RatioBin::new(0.1, 0.2, 1, 2)];
        let pooled = pool_curves([a.as_slice(), b.as_slice()]);
        assert_eq!(pooled.len(), 2);
        assert_eq!((pooled[0].hits, pooled[0].support), (3, 4));
        assert_eq!(pooled[0].detect_rate, 0.75);
    }

    #[test]
    fn report_text_lists_measures() {
        let records = [rec(&[A], &[A], &[1.0, 0.0])];
        let report = EvaluationReport::evaluate(&records, DEFAULT_BIN_WIDTH);
        let text = report.to_key_value();
        assert!(text.contains("mic_f1=1\n"));
        assert!(text.contains("ratio_bin[0.00,0.00]=detect_rate:1 support:1 low_support"));
    }
}
