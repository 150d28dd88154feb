//! Composes grader profiles into the nine screening strategies and checks
//! the closed form against brute-force enumeration.
//!
//!     cargo run --example strategy_performance [config.toml ...]

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::strategy::{enumerate_performance, implied_prevalence};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.is_empty() {
        paths.push(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml"));
    }
    let model = load_config(&paths)?.model;
    let prev = model.params.cohort.screening_prevalence;

    println!("prevalence among the screened: {prev}");
    println!(
        "{:<26} {:<12} {:>8} {:>8} {:>8} {:>9} {:>7} {:>7} {:>10}",
        "strategy", "expr", "Se", "Sp", "acc", "$/case", "human", "AI", "|enum|"
    );
    for s in &model.strategies {
        let p = model.performance(&s.id)?;
        let e = enumerate_performance(&model.tree(&s.id)?, &model.registry, prev)?;
        let gap = (p.sensitivity - e.sensitivity)
            .abs()
            .max((p.specificity - e.specificity).abs())
            .max((p.expected_cost_per_case - e.expected_cost_per_case).abs());
        println!(
            "{:<26} {:<12} {:>8.4} {:>8.4} {:>8.4} {:>9.2} {:>7.3} {:>7.3} {:>10.1e}",
            s.label,
            s.expr,
            p.sensitivity,
            p.specificity,
            p.accuracy(prev)?,
            p.expected_cost_per_case,
            p.human_reads_per_case,
            p.ai_reads_per_case,
            gap
        );
    }

    // Two published (accuracy, sensitivity, specificity) triples imply the
    // prevalence of the population they were measured on.
    let ai = implied_prevalence(0.8189, 0.9615, 0.8074)?;
    let triage = implied_prevalence(0.9949, 0.9485, 0.9986)?;
    println!("\nimplied prevalence: AI {ai:.4}, AI triage {triage:.4}");
    Ok(())
}
