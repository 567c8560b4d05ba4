//! `pandora verify`: run the named verification suites and report
//! machine-readable PASS/FAIL lines. Exits 1 when any check fails.

use anyhow::Result;
use clap::{Args, ValueEnum};
use pandora_core::suites::{run_suite, Suite, SuiteOptions};

use crate::output::OutputFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Oracle,
    Propriety,
    Gradient,
    Amnesia,
    Decomposition,
    All,
}

impl SuiteName {
    fn to_suite(self) -> Suite {
        match self {
            SuiteName::Oracle => Suite::Oracle,
            SuiteName::Propriety => Suite::Propriety,
            SuiteName::Gradient => Suite::Gradient,
            SuiteName::Amnesia => Suite::Amnesia,
            SuiteName::Decomposition => Suite::Decomposition,
            SuiteName::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteName::All)]
    pub suite: SuiteName,
    /// Seed for every randomized check.
    #[arg(long)]
    pub seed: u64,
    /// Monte Carlo samples per oracle comparison.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

pub fn run_verify(args: &VerifyArgs) -> Result<i32> {
    let opts = SuiteOptions { seed: args.seed, mc_samples: args.samples };
    let results = run_suite(args.suite.to_suite(), opts)?;
    let mut failures = 0usize;
    for check in &results {
        if !check.passed {
            failures += 1;
        }
        match args.format {
            OutputFormat::Text => {
                println!(
                    "{} {} — {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.details
                );
            }
            OutputFormat::JsonLines => println!("{}", serde_json::to_string(check)?),
            OutputFormat::Csv => {
                println!(
                    "{},{},\"{}\"",
                    check.name,
                    if check.passed { "pass" } else { "fail" },
                    check.details.replace('"', "\"\"")
                );
            }
        }
    }
    match args.format {
        OutputFormat::Text => {
            println!(
                "{} checks, {} failed (seed {}, {} samples)",
                results.len(),
                failures,
                args.seed,
                args.samples
            );
        }
        OutputFormat::JsonLines => {
            println!(
                "{}",
                serde_json::json!({
                    "summary": true,
                    "checks": results.len(),
                    "failures": failures,
                    "seed": args.seed,
                    "samples": args.samples,
                })
            );
        }
        OutputFormat::Csv => {}
    }
    Ok(if failures > 0 { 1 } else { 0 })
}
