//! `pandora simulate`: sequential-search traces and aggregate cost for a
//! prediction file under a cost configuration.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use pandora_core::search::{effective_costs, simulate_search, RealizedCosts, SearchTrace};

use crate::formats::{read_predictions, CostConfig};
use crate::output::{sig6, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostMode {
    /// Use the configured base costs as realized costs.
    Base,
    /// Transform base costs by per-class test characteristics first.
    Effective,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Prediction file (JSON lines, or CSV when the extension is .csv).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Cost configuration (TOML).
    #[arg(long)]
    pub costs: PathBuf,
    #[arg(long, value_enum, default_value_t = CostMode::Base)]
    pub mode: CostMode,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

fn mode_name(mode: CostMode) -> &'static str {
    match mode {
        CostMode::Base => "base",
        CostMode::Effective => "effective",
    }
}

pub fn run_simulate(args: &SimulateArgs) -> Result<i32> {
    let records = read_predictions(&args.predictions)?;
    let k = records[0].probs.len();
    let config = CostConfig::load(&args.costs)?;
    if config.num_classes() != k {
        bail!(
            "{}: cost config covers {} classes, predictions have {k}",
            args.costs.display(),
            config.num_classes()
        );
    }
    let base = RealizedCosts::new(config.base_costs()?.values().to_vec())?;
    let realized = match args.mode {
        CostMode::Base => base,
        CostMode::Effective => effective_costs(&base, &config.test_characteristics()?)?,
    };

    let mut traces: Vec<SearchTrace> = Vec::with_capacity(records.len());
    for record in &records {
        traces.push(simulate_search(&record.to_labeled_forecast()?, &realized)?);
    }
    let j_sim =
        traces.iter().map(|t| t.total_cost).sum::<f64>() / traces.len() as f64;
    let mean_tests = traces.iter().map(|t| (t.stop_step + 1) as f64).sum::<f64>()
        / traces.len() as f64;

    match args.format {
        OutputFormat::Text => {
            println!(
                "simulated {} instances, {k} classes, mode = {}, currency = {}",
                traces.len(),
                mode_name(args.mode),
                config.currency
            );
            println!("realized costs:");
            for (name, cost) in config.class_names().iter().zip(realized.values()) {
                println!("  {name:>24}  {}", sig6(*cost));
            }
            println!("mean tests per instance   {}", sig6(mean_tests));
            println!("aggregate cost (J_sim)    {}", sig6(j_sim));
        }
        OutputFormat::JsonLines => {
            for (i, (record, trace)) in records.iter().zip(&traces).enumerate() {
                let mut obj = serde_json::Map::new();
                obj.insert("record".into(), (i + 1).into());
                if let Some(id) = &record.id {
                    obj.insert("id".into(), id.clone().into());
                }
                obj.insert("order".into(), trace.order.clone().into());
                obj.insert("stop_step".into(), trace.stop_step.into());
                obj.insert("total_cost".into(), trace.total_cost.into());
                println!("{}", serde_json::Value::Object(obj));
            }
            let summary = serde_json::json!({
                "summary": true,
                "n_instances": traces.len(),
                "mode": mode_name(args.mode),
                "mean_tests": mean_tests,
                "j_sim": j_sim,
            });
            println!("{summary}");
        }
        OutputFormat::Csv => {
            println!("record,id,stop_step,tests,total_cost");
            for (i, (record, trace)) in records.iter().zip(&traces).enumerate() {
                println!(
                    "{},{},{},{},{}",
                    i + 1,
                    record.id.clone().unwrap_or_default(),
                    trace.stop_step,
                    trace.stop_step + 1,
                    trace.total_cost
                );
            }
            println!("mean,,,{mean_tests},{j_sim}");
        }
    }
    Ok(0)
}
