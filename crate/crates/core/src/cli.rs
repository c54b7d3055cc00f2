//! Command-line front end: generate, train, predict, cv, pca-sweep, curve.
//!
//! Settings come from a flat `key = value` file (`--config`), overridden by
//! command-line flags. The output directory can also be set through
//! `OILCHECK_OUTPUT_DIR`, which sits between the flag and the file.
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 training failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::boosting::StumpEnsemble;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::experiments::{fit_boost, nested_select, pca_sweep, run_protocol, Method, ProtocolConfig, RunManifest};
use crate::io::write_atomic;
use crate::metrics::{pool_curves, RatioBin};
use crate::mllvq::{LvqTrainConfig, MlLvqModel};
use crate::pca::PcaRule;
use crate::seed::derive_seed;
use crate::synthgen::{generate, GeneratorConfig};

/// Environment variable overriding `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "OILCHECK_OUTPUT_DIR";

const DEFAULT_OUTPUT_DIR: &str = "out";

/// Every key a configuration file may use.
pub const CONFIG_KEYS: &[&str] = &[
    "data.path",
    "generator.preset",
    "generator.config",
    "generator.d",
    "generator.noise_sigma",
    "generator.overlap",
    "method",
    "grid.t_binary",
    "grid.t_multilabel",
    "grid.s",
    "cv.runs",
    "cv.folds",
    "seed",
    "pca.rule",
    "lvq.epochs",
    "lvq.alpha",
    "lvq.meta_stumps",
    "curve.bin_width",
    "output.dir",
];

#[derive(Debug, Parser)]
#[command(name = "oilcheck", version, about = "Edible-oil adulteration detection from chromatograms")]
pub struct Cli {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic chromatogram dataset and its generator settings.
    Generate(Common),
    /// Train one model on a whole dataset.
    Train(TrainArgs),
    /// Apply a saved model to a CSV file.
    Predict(PredictArgs),
    /// Repeated stratified cross validation with nested model selection.
    Cv(Common),
    /// Binary detection accuracy with and without PCA preprocessing.
    PcaSweep(SweepArgs),
    /// Pool the detect-rate versus ratio curves of saved reports into plot data.
    Curve(CurveArgs),
}

/// Flags shared by the subcommands; each maps onto a configuration key.
#[derive(Debug, Default, Args)]
pub struct Common {
    /// Dataset CSV (`data.path`). Without it the generator settings are used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Generator preset (`generator.preset`); only `table1` exists.
    #[arg(long)]
    pub preset: Option<String>,
    /// Full generator settings file written by `generate` (`generator.config`).
    #[arg(long, value_name = "FILE")]
    pub generator_config: Option<PathBuf>,
    /// Feature dimension of generated data (`generator.d`).
    #[arg(long)]
    pub dim: Option<String>,
    /// Relative noise level of generated data (`generator.noise_sigma`).
    #[arg(long, allow_hyphen_values = true)]
    pub noise_sigma: Option<String>,
    /// Profile similarity in [0, 1] (`generator.overlap`).
    #[arg(long, allow_hyphen_values = true)]
    pub overlap: Option<String>,
    /// binary-boost, ml-boost or ml-lvq (`method`).
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated T grid of the binary detector (`grid.t_binary`).
    #[arg(long)]
    pub t_binary: Option<String>,
    /// Comma-separated T grid of multi-label boosting (`grid.t_multilabel`).
    #[arg(long)]
    pub t_multilabel: Option<String>,
    /// Comma-separated prototype-count grid of ML-LVQ (`grid.s`).
    #[arg(long)]
    pub s: Option<String>,
    /// Cross-validation repetitions (`cv.runs`).
    #[arg(long)]
    pub runs: Option<String>,
    /// Folds per repetition (`cv.folds`).
    #[arg(long)]
    pub folds: Option<String>,
    /// Base random seed (`seed`).
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Variance fraction in (0, 1] or `positive` (`pca.rule`).
    #[arg(long)]
    pub pca: Option<String>,
    /// ML-LVQ epochs (`lvq.epochs`).
    #[arg(long)]
    pub epochs: Option<String>,
    /// ML-LVQ hinge margin (`lvq.alpha`).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Rounds of the ML-LVQ label-count model (`lvq.meta_stumps`).
    #[arg(long)]
    pub meta_stumps: Option<String>,
    /// Width of the minor-fraction bins (`curve.bin_width`).
    #[arg(long)]
    pub bin_width: Option<String>,
    /// Output directory (`output.dir`, env `OILCHECK_OUTPUT_DIR`).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Fixed T or S; when absent the grid is searched on a validation split.
    #[arg(long)]
    pub param: Option<usize>,
    /// Model file (default `<output dir>/model.txt`).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Input CSV; the labels column is ignored.
    #[arg(long)]
    pub input: PathBuf,
    /// Predictions file (default `<output dir>/predictions.tsv`).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated PCA rules compared against all features.
    #[arg(long, default_value = "0.95,0.98,0.99,positive")]
    pub rules: String,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// `report.json` files written by `cv`.
    #[arg(long = "report", required = true, num_args = 1..)]
    pub reports: Vec<PathBuf>,
    /// Plot data file (default `<output dir>/curve.tsv`).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

/// Resolved `key = value` settings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses a configuration file body. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(CONFIG_KEYS.contains(&key), "unknown key {key}");
        self.values.insert(key.to_string(), value.into());
    }

    fn set_opt(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.set(key, v.to_string());
        }
    }

    /// Typed value; parse errors name the key.
    pub fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}: cannot use `{v}`: {e}")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Config(format!("{key}: `{item}` is not a count")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn apply_flags(&mut self, flags: &Common) {
        self.set_opt("data.path", flags.data.as_ref().map(|p| p.display()));
        self.set_opt("generator.preset", flags.preset.as_ref());
        self.set_opt("generator.config", flags.generator_config.as_ref().map(|p| p.display()));
        self.set_opt("generator.d", flags.dim.as_ref());
        self.set_opt("generator.noise_sigma", flags.noise_sigma.as_ref());
        self.set_opt("generator.overlap", flags.overlap.as_ref());
        self.set_opt("method", flags.method.as_ref());
        self.set_opt("grid.t_binary", flags.t_binary.as_ref());
        self.set_opt("grid.t_multilabel", flags.t_multilabel.as_ref());
        self.set_opt("grid.s", flags.s.as_ref());
        self.set_opt("cv.runs", flags.runs.as_ref());
        self.set_opt("cv.folds", flags.folds.as_ref());
        self.set_opt("seed", flags.seed.as_ref());
        self.set_opt("pca.rule", flags.pca.as_ref());
        self.set_opt("lvq.epochs", flags.epochs.as_ref());
        self.set_opt("lvq.alpha", flags.alpha.as_ref());
        self.set_opt("lvq.meta_stumps", flags.meta_stumps.as_ref());
        self.set_opt("curve.bin_width", flags.bin_width.as_ref());
    }

    /// Flag, then `OILCHECK_OUTPUT_DIR`, then `output.dir`, then `out`.
    pub fn output_dir(&self, flag: Option<&Path>, env: Option<OsString>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| self.get("output.dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.value("seed")?.unwrap_or(0))
    }

    pub fn method(&self) -> Result<Method> {
        let text = self
            .get("method")
            .ok_or_else(|| Error::Config("`method` is required (binary-boost, ml-boost, ml-lvq)".into()))?;
        text.parse()
            .map_err(|_| Error::Config(format!("method: unknown method `{text}`")))
    }

    /// Generator settings from `generator.config` or the preset, with overrides.
    pub fn generator(&self) -> Result<GeneratorConfig> {
        let seed = self.seed()?;
        let mut config = match self.get("generator.config") {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let mut config = GeneratorConfig::from_config_text(&text)?;
                if self.get("seed").is_some() {
                    config.seed = seed;
                }
                config
            }
            None => {
                let preset = self.get("generator.preset").unwrap_or("table1");
                if preset != "table1" {
                    return Err(Error::Config(format!("generator.preset: unknown preset `{preset}`")));
                }
                match self.value::<usize>("generator.d")? {
                    Some(d) => GeneratorConfig::table1_with_dim(d, seed),
                    None => GeneratorConfig::table1(seed),
                }
            }
        };
        if let Some(sigma) = self.value::<f64>("generator.noise_sigma")? {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(Error::Config(format!("generator.noise_sigma must be >= 0, got {sigma}")));
            }
            config.noise_sigma = sigma;
        }
        if let Some(overlap) = self.value::<f64>("generator.overlap")? {
            if !(0.0..=1.0).contains(&overlap) {
                return Err(Error::Config(format!("generator.overlap must lie in [0, 1], got {overlap}")));
            }
            config.overlap = overlap;
        }
        config.validate()?;
        Ok(config)
    }

    /// `data.path` when set, otherwise freshly generated data.
    pub fn dataset(&self) -> Result<Dataset> {
        match self.get("data.path") {
            Some(path) => Dataset::load_csv_infer(path),
            None => generate(&self.generator()?),
        }
    }

    pub fn protocol(&self) -> Result<ProtocolConfig> {
        let mut config = ProtocolConfig::new(self.method()?);
        config.seed = self.seed()?;
        if let Some(v) = self.list("grid.t_binary")? {
            config.grid.t_binary = v;
        }
        if let Some(v) = self.list("grid.t_multilabel")? {
            config.grid.t_multilabel = v;
        }
        if let Some(v) = self.list("grid.s")? {
            config.grid.prototypes = v;
        }
        config.grid.pca_rule = self.value::<PcaRule>("pca.rule")?;
        if let Some(v) = self.value("cv.runs")? {
            config.runs = v;
        }
        if let Some(v) = self.value("cv.folds")? {
            config.folds = v;
        }
        if let Some(v) = self.value("lvq.epochs")? {
            config.epochs = v;
        }
        if let Some(v) = self.value("lvq.alpha")? {
            config.alpha = v;
        }
        if let Some(v) = self.value("lvq.meta_stumps")? {
            config.meta_stumps = v;
        }
        if let Some(v) = self.value("curve.bin_width")? {
            config.bin_width = v;
        }
        config
            .grid
            .candidates(config.method)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("oilcheck: {e}");
            e.exit_code()
        }
    }
}

fn base_settings(config: Option<&Path>) -> Result<Settings> {
    config.map_or_else(|| Ok(Settings::default()), Settings::load)
}

fn resolve(config: Option<&Path>, flags: &Common) -> Result<(Settings, PathBuf)> {
    let mut settings = base_settings(config)?;
    settings.apply_flags(flags);
    let out = settings.output_dir(flags.output_dir.as_deref(), std::env::var_os(OUTPUT_DIR_ENV));
    Ok((settings, out))
}

pub fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Generate(flags) => {
            let (settings, out) = resolve(config, &flags)?;
            cmd_generate(&settings, &out)
        }
        Command::Train(args) => {
            let (settings, out) = resolve(config, &args.common)?;
            let model = args.model.unwrap_or_else(|| out.join("model.txt"));
            cmd_train(&settings, args.param, &model)
        }
        Command::Predict(args) => {
            let settings = base_settings(config)?;
            let out = settings.output_dir(args.output_dir.as_deref(), std::env::var_os(OUTPUT_DIR_ENV));
            let output = args.output.unwrap_or_else(|| out.join("predictions.tsv"));
            cmd_predict(&args.model, &args.input, &output)
        }
        Command::Cv(flags) => {
            let (settings, out) = resolve(config, &flags)?;
            cmd_cv(&settings, &out)
        }
        Command::PcaSweep(args) => {
            let (mut settings, out) = resolve(config, &args.common)?;
            if settings.get("method").is_none() {
                settings.set("method", Method::BinaryBoost.name());
            }
            let rules = args
                .rules
                .split(',')
                .map(|r| r.trim().parse::<PcaRule>().map_err(|e| Error::Config(format!("--rules: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            cmd_pca_sweep(&settings, &rules, &out)
        }
        Command::Curve(args) => {
            let settings = base_settings(config)?;
            let out = settings.output_dir(args.output_dir.as_deref(), std::env::var_os(OUTPUT_DIR_ENV));
            let output = args.output.unwrap_or_else(|| out.join("curve.tsv"));
            cmd_curve(&args.reports, &output)
        }
    }
}

/// Writes `data.csv` and `generator.cfg` into `out`.
pub fn cmd_generate(settings: &Settings, out: &Path) -> Result<()> {
    let config = settings.generator()?;
    let dataset = generate(&config)?;
    let data = out.join("data.csv");
    dataset.save_csv(&data)?;
    write_atomic(&out.join("generator.cfg"), config.to_config_text().as_bytes())?;
    let mixtures = dataset.examples.iter().filter(|e| e.is_mixture()).count();
    println!(
        "wrote {} examples ({} pure, {mixtures} mixtures, d = {}) to {}",
        dataset.len(),
        dataset.len() - mixtures,
        dataset.dim,
        data.display()
    );
    Ok(())
}

/// Trains on the whole dataset; without `param` the grid is searched first.
pub fn cmd_train(settings: &Settings, param: Option<usize>, model_path: &Path) -> Result<()> {
    let config = settings.protocol()?;
    if config.grid.pca_rule.is_some() {
        return Err(Error::Config("pca.rule is only used by cv and pca-sweep".into()));
    }
    let dataset = settings.dataset()?;
    let parameter = match param {
        Some(0) => return Err(Error::InvalidParameter(format!("{} must be at least 1", config.method.parameter()))),
        Some(p) => p,
        None => {
            let selection = nested_select(&dataset, &config, derive_seed(config.seed, &[u64::MAX]))?;
            log::info!("validation scores {:?}", selection.scores);
            selection.parameter
        }
    };
    let text = match config.method {
        Method::BinaryBoost | Method::MlBoost => fit_boost(config.method, &dataset, parameter)?.to_text(),
        Method::MlLvq => {
            let lvq = LvqTrainConfig {
                prototypes: parameter,
                epochs: config.epochs,
                alpha: config.alpha,
                eta0: None,
                seed: derive_seed(config.seed, &[u64::MAX, 2]),
            };
            MlLvqModel::fit(&dataset, &lvq, config.meta_stumps)?.to_text()
        }
    };
    write_atomic(model_path, text.as_bytes())?;
    println!(
        "trained {} with {} = {parameter} on {} examples; model at {}",
        config.method,
        config.method.parameter(),
        dataset.len(),
        model_path.display()
    );
    Ok(())
}

/// A model file of either format.
pub enum LoadedModel {
    Stumps(StumpEnsemble),
    Lvq(MlLvqModel),
}

impl LoadedModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let header = text.lines().next().unwrap_or("");
        match header.split('\t').next() {
            Some("oilcheck-stumps") => Ok(LoadedModel::Stumps(StumpEnsemble::from_text(&text)?)),
            Some("oilcheck-mllvq") => Ok(LoadedModel::Lvq(MlLvqModel::from_text(&text)?)),
            _ => Err(Error::ModelFormat(format!("{}: not an oilcheck model", path.display()))),
        }
    }
}

fn format_scores(names: &[String], scores: &[f64]) -> String {
    names
        .iter()
        .zip(scores)
        .map(|(n, s)| format!("{n}:{s}"))
        .collect::<Vec<_>>()
        .join("|")
}

/// Writes one TSV line per input row: id, predicted, ranked, scores, flag.
pub fn cmd_predict(model_path: &Path, input: &Path, output: &Path) -> Result<()> {
    let model = LoadedModel::load(model_path)?;
    let rows = Dataset::load_unlabeled_csv(input)?;
    let mut out = String::from("id\tpredicted\tranked\tscores\tflag\n");
    let mut empty = 0usize;
    for (id, x) in &rows {
        match &model {
            LoadedModel::Stumps(ensemble) => {
                let scores = ensemble.predict_scores(x)?;
                let names = ensemble.space.names();
                if ensemble.labels() == 1 {
                    let sign = if scores[0] > 0.0 { "+1" } else { "-1" };
                    let _ = writeln!(out, "{id}\t{sign}\t-\t{}\t", format_scores(names, &scores));
                } else {
                    let predicted = crate::boosting::labels_from_scores(&scores);
                    let flag = if predicted.is_empty() {
                        empty += 1;
                        "empty"
                    } else {
                        ""
                    };
                    let joined: Vec<&str> = predicted.iter().map(|&l| names[l].as_str()).collect();
                    let _ = writeln!(
                        out,
                        "{id}\t{}\t-\t{}\t{flag}",
                        joined.join("|"),
                        format_scores(names, &scores)
                    );
                }
            }
            LoadedModel::Lvq(lvq) => {
                let p = lvq.predict_ranked(x)?;
                let names = lvq.space().names();
                let ranked: Vec<&str> = p.ranked.iter().map(|&l| names[l].as_str()).collect();
                let predicted: Vec<&str> = p.labels.iter().map(|&l| names[l].as_str()).collect();
                let _ = writeln!(
                    out,
                    "{id}\t{}\t{}\t{}\t",
                    predicted.join("|"),
                    ranked.join(">"),
                    format_scores(names, &p.scores)
                );
            }
        }
    }
    if empty > 0 {
        log::warn!("{empty} row(s) received an empty label set");
    }
    write_atomic(output, out.as_bytes())?;
    println!("wrote {} predictions to {}", rows.len(), output.display());
    Ok(())
}

/// Writes `report.json`, `summary.tsv`, `manifest.json` and one file per fold.
pub fn cmd_cv(settings: &Settings, out: &Path) -> Result<()> {
    let config = settings.protocol()?;
    let dataset = settings.dataset()?;
    let report = run_protocol(&dataset, &config)?;
    let manifest = RunManifest::new(&dataset, &config)?;
    for f in &report.fold_reports {
        let mut text = format!(
            "run={}\nfold={}\n{}={}\nvalidation_score={}\n",
            f.run,
            f.fold,
            config.method.parameter(),
            f.selection.parameter,
            f.selection.validation_score
        );
        if let Some(m) = f.pca_dims {
            let _ = writeln!(text, "pca_dims={m}");
        }
        text.push_str(&f.report.to_key_value());
        let name = format!("run{:02}_fold{:02}.txt", f.run, f.fold);
        write_atomic(&out.join("folds").join(name), text.as_bytes())?;
    }
    write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    write_atomic(&out.join("summary.tsv"), report.summary_text().as_bytes())?;
    write_atomic(&out.join("manifest.json"), manifest.to_json().as_bytes())?;
    print!("{}", report.summary_text());
    if !report.main_ingredient_failures.is_empty() {
        println!("main ingredient misses\t{}", report.main_ingredient_failures.len());
    }
    Ok(())
}

pub fn cmd_pca_sweep(settings: &Settings, rules: &[PcaRule], out: &Path) -> Result<()> {
    let mut config = settings.protocol()?;
    config.method = Method::BinaryBoost;
    config.grid.pca_rule = None;
    let dataset = settings.dataset()?;
    let rows = pca_sweep(&dataset, &config, rules)?;
    let mut text = String::from("rule\tdims_min\tdims_max\taccuracy_mean\taccuracy_std\n");
    for row in &rows {
        let rule = row.rule.map_or_else(|| "none".to_string(), |r| r.to_string());
        let lo = row.dims.iter().min().copied().unwrap_or(dataset.dim);
        let hi = row.dims.iter().max().copied().unwrap_or(dataset.dim);
        let _ = writeln!(text, "{rule}\t{lo}\t{hi}\t{}\t{}", row.accuracy.mean, row.accuracy.std);
    }
    write_atomic(&out.join("pca_sweep.tsv"), text.as_bytes())?;
    write_atomic(&out.join("manifest.json"), RunManifest::new(&dataset, &config)?.to_json().as_bytes())?;
    print!("{text}");
    Ok(())
}

/// Plot data for the pooled curve: lower, upper, detect rate, support, low-support flag.
pub fn curve_tsv(bins: &[RatioBin]) -> String {
    let mut text = String::from("bin_lower\tbin_upper\tdetect_rate\tsupport\tlow_support\n");
    for b in bins {
        let _ = writeln!(
            text,
            "{:.4}\t{:.4}\t{}\t{}\t{}",
            b.lower,
            b.upper,
            b.detect_rate,
            b.support,
            u8::from(b.low_support)
        );
    }
    text
}

pub fn cmd_curve(reports: &[PathBuf], output: &Path) -> Result<()> {
    let mut curves = Vec::with_capacity(reports.len());
    for path in reports {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        curves.push(crate::experiments::CvReport::from_json(&text)?.ratio_curve);
    }
    let pooled = pool_curves(curves.iter().map(Vec::as_slice));
    if pooled.is_empty() {
        return Err(Error::InvalidDataset("the reports carry no ratio data".into()));
    }
    let text = curve_tsv(&pooled);
    write_atomic(output, text.as_bytes())?;
    print!("{text}");
    Ok(())
}
