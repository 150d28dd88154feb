//! Cost-effectiveness frontier of the nine strategies under annual screening
//! of each age group.
//!
//!     cargo run --example frontier

use std::path::PathBuf;

use drscreen::cea::{frontier, FrontierPoint};
use drscreen::config::load_config;
use drscreen::markov::{AgeGroup, Frequency};
use drscreen::Cell;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let model = &config.model;
    for age_group in AgeGroup::all() {
        let cell = Cell::new(Frequency::Every(1), age_group);
        let points = model
            .strategies
            .iter()
            .map(|s| {
                let r = cell.evaluate(model, &s.id)?;
                Ok(FrontierPoint::new(s.id.clone(), r.total_cost, r.qalys))
            })
            .collect::<Result<Vec<_>, drscreen::ModelError>>()?;
        let f = frontier(&points, true)?;
        println!("annual, ages {age_group}");
        for e in f.member_entries() {
            match e.icer_from_previous {
                Some(icer) => println!("  {:<26} ${:>9.0}/QALY from the previous point", e.id, icer),
                None => println!("  {:<26} (lowest cost)", e.id),
            }
        }
    }
    Ok(())
}
