//! Detect rate of ML-LVQ against the minor component's fraction, pooled over
//! cross-validation folds, printed as plot data.
//!
//! ```text
//! cargo run --release --example detect_rate_curve -- [runs] [seed]
//! ```

use oilcheck::cli::curve_tsv;
use oilcheck::experiments::{run_protocol, Method, ProtocolConfig};
use oilcheck::metrics::detect_rate_in_range;
use oilcheck::synthgen::{generate, GeneratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let runs = args.first().map_or(Ok(1), |s| s.parse())?;
    let seed = args.get(1).map_or(Ok(7), |s| s.parse())?;

    let dataset = generate(&GeneratorConfig::table1(seed))?;
    let mut config = ProtocolConfig::new(Method::MlLvq);
    config.runs = runs;
    config.seed = seed;
    config.grid.prototypes = vec![1];
    let report = run_protocol(&dataset, &config)?;
    print!("{}", curve_tsv(&report.ratio_curve));

    let records: Vec<_> = report.records().map(|(_, r)| r.clone()).collect();
    for (lo, hi) in [(0.05, 0.15), (0.40, 0.60)] {
        let bin = detect_rate_in_range(&records, lo, hi);
        println!("minor fraction in [{lo:.2}, {hi:.2}]: {:.3} over {}", bin.detect_rate, bin.support);
    }
    Ok(())
}
