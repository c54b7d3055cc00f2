//! Which oils are in each sample: multi-label AdaBoost.MH on a held-out split.
//!
//! ```text
//! cargo run --release --example ingredient_detection -- [rounds] [seed]
//! ```

use oilcheck::boosting::train_adaboost_mh;
use oilcheck::experiments::{ensemble_records, stratified_kfold, Method};
use oilcheck::metrics::EvaluationReport;
use oilcheck::synthgen::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rounds = args.first().map_or(Ok(100), |s| s.parse())?;
    let seed = args.get(1).map_or(Ok(7), |s| s.parse())?;

    let dataset = generate(&GeneratorConfig::table1(seed))?;
    let split = stratified_kfold(&dataset, 5, seed)?.remove(0);
    let train = dataset.subset(&split.train)?;
    let test = dataset.subset(&split.test)?;

    let model = train_adaboost_mh(&train, rounds)?;
    let records = ensemble_records(Method::MlBoost, &model, &test)?;
    print!("{}", EvaluationReport::evaluate(&records, 0.1).to_key_value());

    let names = |set: &oilcheck::dataset::LabelSet| -> String {
        let v: Vec<&str> = set.iter().map(|&l| dataset.space.name(l)).collect();
        if v.is_empty() { "(none)".into() } else { v.join("&") }
    };
    println!("\nmisses:");
    for (e, r) in test.examples.iter().zip(&records).filter(|(_, r)| !r.is_exact()) {
        println!("  {:<28} predicted {}", e.id, names(&r.predicted));
    }
    Ok(())
}
