//! Binary detection accuracy with all features and with PCA projections.
//!
//! ```text
//! cargo run --release --example pca_sweep -- [runs] [seed]
//! ```

use oilcheck::experiments::{pca_sweep, Method, ProtocolConfig};
use oilcheck::pca::PcaRule;
use oilcheck::synthgen::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let runs = args.first().map_or(Ok(1), |s| s.parse())?;
    let seed = args.get(1).map_or(Ok(7), |s| s.parse())?;

    let dataset = generate(&GeneratorConfig::table1(seed))?;
    let mut config = ProtocolConfig::new(Method::BinaryBoost);
    config.runs = runs;
    config.seed = seed;
    let rules = [
        PcaRule::Variance(0.95),
        PcaRule::Variance(0.98),
        PcaRule::Variance(0.99),
        PcaRule::Positive,
    ];
    println!("rule\tdims (min..max)\taccuracy");
    for row in pca_sweep(&dataset, &config, &rules)? {
        let rule = row.rule.map_or("all features".to_string(), |r| r.to_string());
        let dims = match (row.dims.iter().min(), row.dims.iter().max()) {
            (Some(lo), Some(hi)) => format!("{lo}..{hi}"),
            _ => dataset.dim.to_string(),
        };
        println!("{rule}\t{dims}\t{:.4} ± {:.4}", row.accuracy.mean, row.accuracy.std);
    }
    Ok(())
}
