//! Pure versus adulterated oil with one-label AdaBoost.MH on a held-out split.
//!
//! ```text
//! cargo run --release --example binary_detection -- [rounds] [seed]
//! ```

use oilcheck::boosting::train_binary;
use oilcheck::experiments::{ensemble_records, stratified_kfold, Method};
use oilcheck::metrics::detect_rate;
use oilcheck::synthgen::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rounds = args.first().map_or(Ok(200), |s| s.parse())?;
    let seed = args.get(1).map_or(Ok(7), |s| s.parse())?;

    let dataset = generate(&GeneratorConfig::table1(seed))?;
    let split = stratified_kfold(&dataset, 5, seed)?.remove(0);
    let train = dataset.subset(&split.train)?;
    let test = dataset.subset(&split.test)?;

    let model = train_binary(&train, rounds)?;
    println!("training error bound after {rounds} rounds: {:.3e}", model.z_history.iter().product::<f64>());
    let records = ensemble_records(Method::BinaryBoost, &model, &test)?;
    println!("held-out accuracy: {:.4} on {} samples", detect_rate(&records), test.len());

    for stump in model.stumps.iter().take(5) {
        println!(
            "time point {:>5}  threshold {:>9.5}  below {:+.3}  above {:+.3}",
            stump.feature, stump.threshold, stump.c_below[0], stump.c_above[0]
        );
    }
    Ok(())
}
