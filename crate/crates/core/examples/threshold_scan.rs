//! Where the NMB-optimal strategy changes as one parameter moves, and where
//! it changes as WTP moves.
//!
//!     cargo run --release --example threshold_scan [parameter] [low] [high]

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::sensitivity::{threshold_scan, wtp_switches, CostEffect, BISECTION_TOLERANCE};
use drscreen::Cell;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().map_or("graders.AI.cost_per_read", String::as_str);
    let low: f64 = args.get(1).map_or(Ok(0.0), |s| s.parse())?;
    let high: f64 = args.get(2).map_or(Ok(40.0), |s| s.parse())?;

    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let model = &config.model;
    let cell = Cell::headline();
    let ids = model.strategy_ids();

    let switches = threshold_scan(model, &cell, &ids, path, (low, high), 40, model.wtp.upper())?;
    println!("{path} over [{low}, {high}] at WTP {:.0}:", model.wtp.upper());
    if switches.is_empty() {
        println!("  no change in the optimal strategy");
    }
    for s in &switches {
        println!("  {:.4}: {} -> {}", s.value, s.from, s.to);
    }

    let options = ids
        .iter()
        .map(|id| {
            let r = cell.evaluate(model, id)?;
            Ok(CostEffect {
                id: id.clone(),
                cost: r.total_cost,
                effect: r.qalys,
            })
        })
        .collect::<Result<Vec<_>, drscreen::ModelError>>()?;
    println!("\noptimal strategy by WTP:");
    for s in wtp_switches(&options, 0.0, 100_000.0, 1000, BISECTION_TOLERANCE) {
        println!("  ${:.0}/QALY: {} -> {}", s.value, s.from, s.to);
    }
    Ok(())
}
