//! The evaluation measures on a handful of hand-written predictions.
//!
//! ```text
//! cargo run --example evaluation_measures
//! ```

use std::collections::BTreeMap;

use oilcheck::dataset::LabelSet;
use oilcheck::metrics::{EvaluationReport, PredictionRecord};

fn record(truth: &[(usize, f64)], predicted: &[usize], scores: [f64; 3]) -> PredictionRecord {
    let ranked = oilcheck::metrics::rank_order(&scores)[..predicted.len()].to_vec();
    PredictionRecord {
        truth: truth.iter().map(|&(l, _)| l).collect(),
        truth_ratios: Some(truth.iter().copied().collect::<BTreeMap<_, _>>()),
        predicted: predicted.iter().copied().collect::<LabelSet>(),
        scores: scores.to_vec(),
        ranked: Some(ranked),
    }
}

fn main() {
    // labels: 0 soybean, 1 peanut, 2 sesame
    let records = vec![
        record(&[(0, 1.0)], &[0], [2.0, -1.0, -0.5]),
        record(&[(1, 1.0)], &[1, 2], [-1.0, 1.5, 0.2]),
        record(&[(0, 0.7), (2, 0.3)], &[0, 2], [1.2, -0.3, 0.4]),
        record(&[(1, 0.45), (2, 0.55)], &[1, 2], [-0.8, 0.9, 0.6]),
        record(&[(0, 0.9), (1, 0.1)], &[0], [1.1, -0.2, -0.9]),
    ];
    let report = EvaluationReport::evaluate(&records, 0.1);
    print!("{}", report.to_key_value());
}
