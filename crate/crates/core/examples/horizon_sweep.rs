//! Copilot against manual grading as the time horizon grows from 5 to 30
//! years.
//!
//!     cargo run --example horizon_sweep

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::sensitivity::{crossing, default_years, horizon_sweep};
use drscreen::Cell;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let model = &config.model;
    let cell = Cell::headline();
    let rows = horizon_sweep(model, &cell, &default_years())?;
    let focus = cell.scenario_id("copilot");

    println!("{:>6} {:>10} {:>8} {:>12}  class", "years", "dCost $M", "dQALY", "ICER");
    for r in rows.iter().filter(|r| r.record.scenario_id == focus) {
        println!(
            "{:>6} {:>10.2} {:>8.1} {:>12}  {}",
            r.horizon,
            r.record.delta_cost / 1e6,
            r.record.delta_qalys,
            r.record
                .icer
                .value()
                .map_or(r.record.icer.to_string(), |v| format!("{v:.0}")),
            r.record.ce_class
        );
    }
    for w in [model.wtp.upper(), model.wtp.lower()] {
        match crossing(&rows, &focus, w).from_horizon {
            Some(h) => println!("at or under ${w:.0}/QALY from {h} years on"),
            None => println!("never settles under ${w:.0}/QALY"),
        }
    }
    Ok(())
}
