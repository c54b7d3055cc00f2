//! ML-LVQ ranks the ingredients of a mixture: the first label is the major one.
//!
//! ```text
//! cargo run --release --example ratio_ordering -- [prototypes] [seed]
//! ```

use oilcheck::experiments::{model_records, stratified_kfold};
use oilcheck::metrics::{main_ingredient_rate, EvaluationReport};
use oilcheck::mllvq::{LvqTrainConfig, MlLvqModel, META_STUMPS};
use oilcheck::synthgen::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let prototypes = args.first().map_or(Ok(1), |s| s.parse())?;
    let seed = args.get(1).map_or(Ok(7), |s| s.parse())?;

    let dataset = generate(&GeneratorConfig::table1(seed))?;
    let split = stratified_kfold(&dataset, 5, seed)?.remove(0);
    let train = dataset.subset(&split.train)?;
    let test = dataset.subset(&split.test)?;

    let config = LvqTrainConfig {
        prototypes,
        seed,
        ..LvqTrainConfig::default()
    };
    let model = MlLvqModel::fit(&train, &config, META_STUMPS)?;
    let records = model_records(&model, &test)?;

    for (e, r) in test.examples.iter().zip(&records).filter(|(e, _)| e.is_mixture()) {
        let truth: Vec<String> = e
            .ratios
            .iter()
            .flatten()
            .map(|(&l, &f)| format!("{} {:.0}%", dataset.space.name(l), 100.0 * f))
            .collect();
        let ranked: Vec<&str> = r.ranked.iter().flatten().map(|&l| dataset.space.name(l)).collect();
        println!("{:<28} {:<32} ranked {}", e.id, truth.join(" + "), ranked.join(" > "));
    }
    let main = main_ingredient_rate(&records);
    println!("\nmain ingredient first: {}/{}", main.correct, main.eligible);
    println!("detect rate: {:.4}", EvaluationReport::evaluate(&records, 0.1).detect_rate);
    Ok(())
}
