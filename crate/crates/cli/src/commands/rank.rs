//! `pandora rank`: ranking meta-evaluation over a synthetic zoo or a
//! directory of per-model prediction files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use pandora_core::ranking::{
    generate_zoo, run_meta_eval, Condition, ConditionKind, MetaEvalOptions, Metric, ModelZoo,
    ModelZooSpec, RankingReport, ZooModel,
};
use pandora_core::scoring::BaseCosts;

use crate::formats::{
    read_predictions, write_predictions_jsonl, CostConfig, PredictionRecord, ZooConfig,
};
use crate::output::{sig6, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionName {
    Clinical,
    WellSpecified,
    RandomTemperature,
    DistractorTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankMetric {
    Pandora,
    LogLoss,
    Accuracy,
    MacroF1,
}

impl std::fmt::Display for RankMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl RankMetric {
    fn to_metric(self) -> Metric {
        match self {
            RankMetric::Pandora => Metric::Pandora,
            RankMetric::LogLoss => Metric::LogLoss,
            RankMetric::Accuracy => Metric::Accuracy,
            RankMetric::MacroF1 => Metric::MacroF1,
        }
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Zoo configuration (TOML); the default synthetic zoo when omitted.
    #[arg(long, conflicts_with = "models_dir")]
    pub zoo: Option<PathBuf>,
    /// Directory of per-model prediction files instead of a synthetic
    /// zoo; every file must carry identical labels.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
    /// Evaluation condition.
    #[arg(long, value_enum)]
    pub condition: ConditionName,
    /// Cost configuration for the clinical and temperature conditions;
    /// unit costs when omitted.
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Lognormal spread of the temperature conditions.
    #[arg(long, default_value_t = 0.5)]
    pub log_sigma: f64,
    /// Seed for the zoo (condition randomness derives from seed + 1).
    #[arg(long)]
    pub seed: u64,
    /// Bootstrap replicates for the confidence intervals.
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    /// Shared cost draws for the well-specified condition.
    #[arg(long, default_value_t = 10)]
    pub cost_draws: usize,
    /// Metrics to rank by (the simulated-cost sanity row is always
    /// included).
    #[arg(long, value_delimiter = ',', default_values_t = vec![
        RankMetric::Pandora,
        RankMetric::LogLoss,
        RankMetric::Accuracy,
        RankMetric::MacroF1,
    ])]
    pub metrics: Vec<RankMetric>,
    /// Write the raw per-model metric matrix as CSV to this path.
    #[arg(long)]
    pub per_model: Option<PathBuf>,
    /// Write the zoo's per-model prediction files (JSON lines) into this
    /// directory, before any condition perturbation.
    #[arg(long)]
    pub dump_zoo: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

fn zoo_from_dir(dir: &Path, seed: u64) -> Result<ModelZoo> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.len() < 2 {
        bail!("{}: need at least two model prediction files", dir.display());
    }

    let mut labels: Option<Vec<usize>> = None;
    let mut num_classes = 0;
    let mut models = Vec::with_capacity(files.len());
    for path in &files {
        let records = read_predictions(path)?;
        let file_labels: Vec<usize> = records.iter().map(|r| r.label).collect();
        match &labels {
            None => {
                labels = Some(file_labels);
                num_classes = records[0].probs.len();
            }
            Some(expected) => {
                if *expected != file_labels {
                    bail!("{}: labels differ from the first model file", path.display());
                }
                if records[0].probs.len() != num_classes {
                    bail!("{}: class count differs from the first model file", path.display());
                }
            }
        }
        let forecasts = records
            .iter()
            .map(|r| Ok(r.to_labeled_forecast()?.forecast))
            .collect::<Result<Vec<_>>>()?;
        models.push(ZooModel {
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            noise_scale: 0.0,
            temperature: 1.0,
            forecasts,
        });
    }
    let labels = labels.expect("at least two files");
    Ok(ModelZoo {
        spec: ModelZooSpec {
            n_models: models.len(),
            num_classes,
            n_instances: labels.len(),
            noise_scale_range: (0.0, 0.0),
            temperature_range: (1.0, 1.0),
            seed,
        },
        ground_truth: Vec::new(),
        labels,
        models,
    })
}

pub fn run_rank(args: &RankArgs) -> Result<i32> {
    let zoo = match (&args.models_dir, &args.zoo) {
        (Some(dir), _) => zoo_from_dir(dir, args.seed)?,
        (None, Some(path)) => {
            let config = ZooConfig::load(path)?;
            let defaults = ModelZooSpec::default();
            let spec = ModelZooSpec {
                n_models: config.n_models.unwrap_or(defaults.n_models),
                num_classes: config.num_classes.unwrap_or(defaults.num_classes),
                n_instances: config.n_instances.unwrap_or(defaults.n_instances),
                noise_scale_range: config.noise_scale_range.unwrap_or(defaults.noise_scale_range),
                temperature_range: config.temperature_range.unwrap_or(defaults.temperature_range),
                seed: args.seed,
            };
            generate_zoo(&spec)?
        }
        (None, None) => generate_zoo(&ModelZooSpec { seed: args.seed, ..Default::default() })?,
    };

    let costs = match &args.costs {
        Some(path) => {
            let config = CostConfig::load(path)?;
            if config.num_classes() != zoo.num_classes() {
                bail!(
                    "{}: cost config covers {} classes, zoo has {}",
                    path.display(),
                    config.num_classes(),
                    zoo.num_classes()
                );
            }
            config.base_costs()?
        }
        None => BaseCosts::unit(zoo.num_classes()),
    };

    let kind = match args.condition {
        ConditionName::Clinical => ConditionKind::Clinical { costs },
        ConditionName::WellSpecified => ConditionKind::WellSpecified,
        ConditionName::RandomTemperature => {
            ConditionKind::RandomTemperature { log_sigma: args.log_sigma, costs }
        }
        ConditionName::DistractorTemperature => {
            ConditionKind::DistractorTemperature { log_sigma: args.log_sigma, costs }
        }
    };
    let condition = Condition { kind, seed: args.seed.wrapping_add(1) };
    let metrics: Vec<Metric> = args.metrics.iter().map(|m| m.to_metric()).collect();
    let opts = MetaEvalOptions { bootstrap_reps: args.bootstrap, cost_draws: args.cost_draws };
    let reports = run_meta_eval(&zoo, std::slice::from_ref(&condition), &metrics, &opts)?;
    let report = &reports[0];

    if let Some(dir) = &args.dump_zoo {
        dump_zoo(&zoo, dir)?;
    }
    if let Some(path) = &args.per_model {
        let mut out = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        write_per_model_csv(&mut out, report)?;
    }

    match args.format {
        OutputFormat::Text => render_text(report),
        OutputFormat::JsonLines => println!("{}", serde_json::to_string(report)?),
        OutputFormat::Csv => render_csv(report),
    }
    Ok(0)
}

fn dump_zoo(zoo: &ModelZoo, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for model in &zoo.models {
        let records: Vec<PredictionRecord> = model
            .forecasts
            .iter()
            .zip(&zoo.labels)
            .map(|(f, &label)| PredictionRecord {
                probs: f.probs().to_vec(),
                label,
                id: None,
            })
            .collect();
        let path = dir.join(format!("{}.jsonl", model.name));
        let mut out =
            std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_predictions_jsonl(&mut out, &records)?;
    }
    Ok(())
}

fn write_per_model_csv<W: std::io::Write>(out: &mut W, report: &RankingReport) -> Result<()> {
    writeln!(out, "model,{}", report.per_model_header.join(","))?;
    for row in &report.per_model {
        let values: Vec<String> = row.values.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{}", row.model, values.join(","))?;
    }
    Ok(())
}

fn render_text(report: &RankingReport) {
    println!("condition      {}", report.condition);
    println!(
        "zoo            {} models x {} instances x {} classes (seed {})",
        report.n_models, report.n_instances, report.num_classes, report.zoo_seed
    );
    println!(
        "sampling       {} bootstrap reps, {} cost draw(s), rng {} (condition seed {})",
        report.bootstrap_reps, report.cost_draws, report.rng_algorithm, report.condition_seed
    );
    println!("intervals      {}", report.ci_method);
    println!();
    println!(
        "{:<16} {:>9} {:>21} {:>9} {:>21} {:>9}",
        "metric", "|tau|", "95% CI", "gap", "gap 95% CI", "tau"
    );
    for row in &report.rows {
        println!(
            "{:<16} {:>9} [{:>9}, {:>9}] {:>9} [{:>9}, {:>9}] {:>9}",
            row.metric,
            sig6(row.tau_abs),
            sig6(row.tau_abs_ci.0),
            sig6(row.tau_abs_ci.1),
            sig6(row.gap_vs_pandora),
            sig6(row.gap_ci.0),
            sig6(row.gap_ci.1),
            sig6(row.tau_signed),
        );
    }
}

fn render_csv(report: &RankingReport) {
    println!(
        "metric,tau_abs,tau_abs_ci_lo,tau_abs_ci_hi,gap_vs_pandora,gap_ci_lo,gap_ci_hi,tau_signed"
    );
    for row in &report.rows {
        println!(
            "{},{},{},{},{},{},{},{}",
            row.metric,
            row.tau_abs,
            row.tau_abs_ci.0,
            row.tau_abs_ci.1,
            row.gap_vs_pandora,
            row.gap_ci.0,
            row.gap_ci.1,
            row.tau_signed
        );
    }
}
