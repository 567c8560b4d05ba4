//! `pandora score`: per-instance and mean metric values for a prediction
//! file.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use pandora_core::baselines::{self, argmax_lowest_index};
use pandora_core::scoring::{self, Alpha, BaseCosts, LabeledForecast};

use crate::formats::{read_predictions, CostConfig};
use crate::output::{sig6, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreMetric {
    Pandora,
    Beta,
    Raw,
    LogLoss,
    Accuracy,
    MacroF1,
}

impl std::fmt::Display for ScoreMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl ScoreMetric {
    fn name(self) -> &'static str {
        match self {
            ScoreMetric::Pandora => "pandora_regret",
            ScoreMetric::Beta => "beta_score",
            ScoreMetric::Raw => "raw_expected_cost",
            ScoreMetric::LogLoss => "log_loss",
            ScoreMetric::Accuracy => "accuracy",
            ScoreMetric::MacroF1 => "macro_f1",
        }
    }

    fn per_instance(self) -> bool {
        self != ScoreMetric::MacroF1
    }
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Prediction file (JSON lines, or CSV when the extension is .csv).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Cost configuration (TOML); unit costs when omitted.
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Beta-family shape for beta_score and raw_expected_cost.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Metrics to report.
    #[arg(long, value_delimiter = ',', default_values_t = vec![
        ScoreMetric::Pandora,
        ScoreMetric::Beta,
        ScoreMetric::Raw,
        ScoreMetric::LogLoss,
        ScoreMetric::Accuracy,
        ScoreMetric::MacroF1,
    ])]
    pub metrics: Vec<ScoreMetric>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

pub fn run_score(args: &ScoreArgs) -> Result<i32> {
    let records = read_predictions(&args.predictions)?;
    let k = records[0].probs.len();
    let costs = match &args.costs {
        Some(path) => {
            let config = CostConfig::load(path)?;
            if config.num_classes() != k {
                bail!(
                    "{}: cost config covers {} classes, predictions have {k}",
                    path.display(),
                    config.num_classes()
                );
            }
            config.base_costs()?
        }
        None => BaseCosts::unit(k),
    };
    if args.metrics.is_empty() {
        bail!("no metrics selected");
    }

    let dataset: Vec<LabeledForecast> = records
        .iter()
        .map(|r| r.to_labeled_forecast())
        .collect::<Result<_>>()?;

    let instance_value = |metric: ScoreMetric, lf: &LabeledForecast| -> Result<f64> {
        Ok(match metric {
            ScoreMetric::Pandora => scoring::pandora_regret(lf),
            ScoreMetric::Beta => scoring::beta_score(lf, Alpha::Finite(args.alpha), &costs)?,
            ScoreMetric::Raw => {
                scoring::raw_expected_cost(lf, Alpha::Finite(args.alpha), &costs)?
            }
            ScoreMetric::LogLoss => baselines::log_loss(lf),
            ScoreMetric::Accuracy => {
                if argmax_lowest_index(lf.forecast.probs()) == lf.true_class {
                    1.0
                } else {
                    0.0
                }
            }
            ScoreMetric::MacroF1 => unreachable!("macro_f1 is dataset-level"),
        })
    };

    // Per-instance columns for instance-level metrics; dataset-level
    // values for everything selected.
    let per_instance_metrics: Vec<ScoreMetric> =
        args.metrics.iter().copied().filter(|m| m.per_instance()).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(dataset.len()); per_instance_metrics.len()];
    for lf in &dataset {
        for (col, &metric) in columns.iter_mut().zip(&per_instance_metrics) {
            col.push(instance_value(metric, lf)?);
        }
    }

    let mut summary: Vec<(&'static str, f64)> = Vec::new();
    for &metric in &args.metrics {
        let value = match metric {
            ScoreMetric::MacroF1 => baselines::macro_f1(&dataset)?,
            _ => {
                let idx = per_instance_metrics.iter().position(|&m| m == metric).unwrap();
                columns[idx].iter().sum::<f64>() / dataset.len() as f64
            }
        };
        summary.push((metric.name(), value));
    }

    match args.format {
        OutputFormat::Text => {
            println!(
                "scored {} instances, {k} classes, alpha = {}, costs = {}",
                dataset.len(),
                args.alpha,
                args.costs
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "unit".to_string()),
            );
            for (name, value) in &summary {
                println!("{name:>18}  {}", sig6(*value));
            }
        }
        OutputFormat::JsonLines => {
            for (i, record) in records.iter().enumerate() {
                let mut obj = serde_json::Map::new();
                obj.insert("record".into(), (i + 1).into());
                if let Some(id) = &record.id {
                    obj.insert("id".into(), id.clone().into());
                }
                for (c, &metric) in per_instance_metrics.iter().enumerate() {
                    obj.insert(metric.name().into(), columns[c][i].into());
                }
                println!("{}", serde_json::Value::Object(obj));
            }
            let mut obj = serde_json::Map::new();
            obj.insert("summary".into(), true.into());
            obj.insert("n_instances".into(), dataset.len().into());
            for (name, value) in &summary {
                obj.insert((*name).into(), (*value).into());
            }
            println!("{}", serde_json::Value::Object(obj));
        }
        OutputFormat::Csv => {
            let header: Vec<&str> =
                per_instance_metrics.iter().map(|m| m.name()).collect();
            println!("record,id,{}", header.join(","));
            for (i, record) in records.iter().enumerate() {
                let vals: Vec<String> =
                    columns.iter().map(|col| format!("{}", col[i])).collect();
                println!(
                    "{},{},{}",
                    i + 1,
                    record.id.clone().unwrap_or_default(),
                    vals.join(",")
                );
            }
            let means: Vec<String> = per_instance_metrics
                .iter()
                .map(|m| {
                    let (_, v) = summary.iter().find(|(n, _)| n == &m.name()).unwrap();
                    format!("{v}")
                })
                .collect();
            println!("mean,,{}", means.join(","));
            if let Some((_, v)) = summary.iter().find(|(n, _)| *n == "macro_f1") {
                println!("# macro_f1 (dataset-level),{v}");
            }
        }
    }
    Ok(0)
}
