//! Repeated stratified cross validation on the synthetic Table 1 data.
//!
//! ```text
//! cargo run --release --example cross_validation -- [method] [runs] [folds] [seed]
//! ```
//!
//! `method` is `binary-boost`, `ml-boost` or `ml-lvq` (default `ml-lvq`).

use std::time::Instant;

use oilcheck::experiments::{run_protocol, Method, ProtocolConfig};
use oilcheck::synthgen::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map_or("ml-lvq", String::as_str).parse()?;
    let runs = args.get(1).map_or(Ok(2), |s| s.parse())?;
    let folds = args.get(2).map_or(Ok(5), |s| s.parse())?;
    let seed = args.get(3).map_or(Ok(7), |s| s.parse())?;

    let dataset = generate(&GeneratorConfig::table1(seed))?;
    let mut config = ProtocolConfig::new(method);
    config.runs = runs;
    config.folds = folds;
    config.seed = seed;

    let started = Instant::now();
    let report = run_protocol(&dataset, &config)?;
    print!("{}", report.summary_text());
    let picked: Vec<usize> = report.fold_reports.iter().map(|f| f.selection.parameter).collect();
    println!("selected {}\t{picked:?}", method.parameter());
    if let Some(rate) = report.main_ingredient.rate() {
        println!(
            "main ingredient\t{}/{} ({rate:.4})",
            report.main_ingredient.correct, report.main_ingredient.eligible
        );
    }
    for bin in report.ratio_curve.iter() {
        println!(
            "minor fraction [{:.2}, {:.2}]\tdetect rate {:.3}\tsupport {}",
            bin.lower, bin.upper, bin.detect_rate, bin.support
        );
    }
    println!("elapsed\t{:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
