use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use drscreen::config::{load_config, ConfigError};
use drscreen::grid::{Analysis, RunManifest, Selection};
use drscreen::markov::{AgeGroup, Frequency, Horizon, Perspective};
use drscreen::pipeline::{execute, Overrides};
use drscreen::report::write_reports;

#[derive(Parser)]
#[command(
    name = "drscreen",
    version,
    about = "Cost-effectiveness of human-AI diabetic retinopathy screening"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sensitivity, specificity, accuracy and cost of each strategy.
    Perf(Common),
    /// Evaluate the scenario grid against the status quo.
    Run(Common),
    /// Cost-effectiveness frontiers per cell and pooled.
    Frontier(Common),
    /// One-way sensitivity and the threshold scan.
    Tornado(Common),
    /// Probabilistic sensitivity analysis.
    Psa(PsaArgs),
    /// Cost-effectiveness acceptability curves.
    Ceac(PsaArgs),
    /// Incremental results over a range of time horizons.
    Sweep(Common),
    /// Load and check the configuration without running anything.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file; later files override earlier ones.
    #[arg(long = "config", required = true)]
    config: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed; defaults to `[psa] seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "societal")]
    perspective: Perspective,
    /// Comma-separated strategy ids.
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    /// Comma-separated, e.g. `one-off,annual,every-2-years` or `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    frequencies: Vec<Frequency>,
    /// Comma-separated lower bounds or ranges, e.g. `20,40-79`.
    #[arg(long, value_delimiter = ',')]
    ages: Vec<AgeGroup>,
    /// Years to simulate; the cohort's life expectancy when absent.
    #[arg(long)]
    horizon: Option<u32>,
}

#[derive(Args)]
struct PsaArgs {
    #[command(flatten)]
    common: Common,
    /// Overrides `[psa] draws`.
    #[arg(long)]
    draws: Option<usize>,
    /// Also write every draw to psa_draws.csv.
    #[arg(long)]
    write_draws: bool,
}

fn fail(kind: &str, message: String, extra: serde_json::Value) -> ExitCode {
    let mut body = json!({ "status": "error", "kind": kind, "message": message });
    if let (Some(b), serde_json::Value::Object(e)) = (body.as_object_mut(), extra) {
        b.extend(e);
    }
    eprintln!("{body}");
    ExitCode::from(2)
}

fn config_failure(e: &ConfigError) -> ExitCode {
    let extra = match e {
        ConfigError::Invalid { location, key, .. } => json!({
            "key": key,
            "file": location.file.display().to_string(),
            "line": location.line,
        }),
        ConfigError::Io { path, .. } => json!({ "file": path.display().to_string() }),
        ConfigError::NoFiles => json!({}),
    };
    fail("config", e.to_string(), extra)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, analyses, overrides): (Common, &[Analysis], Overrides) = match cli.command {
        Command::Perf(c) => (c, &[Analysis::StrategyPerformance], Overrides::default()),
        Command::Run(c) => (
            c,
            &[Analysis::StrategyPerformance, Analysis::Grid, Analysis::Frontier],
            Overrides::default(),
        ),
        Command::Frontier(c) => (c, &[Analysis::Frontier], Overrides::default()),
        Command::Tornado(c) => (c, &[Analysis::Tornado, Analysis::Threshold], Overrides::default()),
        Command::Sweep(c) => (c, &[Analysis::HorizonSweep], Overrides::default()),
        Command::Validate(c) => (c, &[], Overrides::default()),
        Command::Psa(p) => (
            p.common,
            &[Analysis::Psa, Analysis::Ceac],
            Overrides {
                psa_draws: p.draws,
                psa_draws_report: p.write_draws,
            },
        ),
        Command::Ceac(p) => (
            p.common,
            &[Analysis::Ceac],
            Overrides {
                psa_draws: p.draws,
                psa_draws_report: false,
            },
        ),
    };
    let validate_only = analyses.is_empty();

    let config = match load_config(&common.config) {
        Ok(c) => c,
        Err(e) => return config_failure(&e),
    };
    let mut analyses: BTreeSet<Analysis> = analyses.iter().copied().collect();
    // The threshold scan runs with the tornado only when configured.
    if config.threshold.is_none() {
        analyses.remove(&Analysis::Threshold);
    }
    let defaults = Selection::default();
    let manifest = RunManifest {
        config_paths: common.config.clone(),
        selection: Selection {
            strategies: common.strategies,
            frequencies: if common.frequencies.is_empty() {
                defaults.frequencies
            } else {
                common.frequencies
            },
            age_groups: if common.ages.is_empty() {
                defaults.age_groups
            } else {
                common.ages
            },
            horizon: common.horizon.map_or(Horizon::LifeExpectancy, Horizon::Years),
            perspective: common.perspective,
        },
        seed: common.seed.unwrap_or(config.psa.seed),
        out_dir: common.out.clone(),
        workers: common.workers,
        analyses,
    };
    if let Err(e) = manifest.selection.strategy_ids(&config.model) {
        return fail("selection", e.to_string(), json!({}));
    }

    if validate_only {
        println!(
            "{}",
            json!({
                "status": "ok",
                "config_hash": config.hash,
                "files": config.files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
                "graders": config.model.registry.iter().count(),
                "strategies": config.model.strategy_ids(),
                "status_quo": config.model.status_quo,
                "scenarios": manifest.selection.cells().len() * config.model.strategies.len(),
            })
        );
        return ExitCode::SUCCESS;
    }

    let reports = match execute(&config, &manifest, &overrides) {
        Ok(r) => r,
        Err(e) => return fail("analysis", e.to_string(), json!({})),
    };
    match write_reports(&manifest.out_dir, &reports) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail("io", e.to_string(), json!({})),
    }
}
