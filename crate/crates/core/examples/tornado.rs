//! One-way sensitivity of copilot versus manual grading, each parameter
//! moved 20% either way.
//!
//!     cargo run --release --example tornado

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::sensitivity::{relative_ranges, tornado, TornadoMetric};
use drscreen::Cell;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let model = &config.model;
    let ranges = relative_ranges(model, &model.parameter_paths(), 0.2)?;
    let t = tornado(
        model,
        &Cell::headline(),
        "copilot",
        "manual",
        &ranges,
        TornadoMetric::Nmb,
    )?;

    println!(
        "copilot vs manual: ICER {}, NMB at 3x GDP ${:.2}M",
        t.base_icer,
        t.base_nmb / 1e6
    );
    println!(
        "{:<40} {:>10} {:>10} {:>12} {:>12}",
        "parameter", "low", "high", "NMB low $M", "NMB high $M"
    );
    for b in t.top(12) {
        println!(
            "{:<40} {:>10.4} {:>10.4} {:>12.2} {:>12.2}",
            b.path,
            b.low,
            b.high,
            b.nmb_low / 1e6,
            b.nmb_high / 1e6
        );
    }
    for f in &t.failures {
        println!("skipped {}: {}", f.path, f.message);
    }
    Ok(())
}
