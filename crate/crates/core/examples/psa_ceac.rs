//! Probabilistic sensitivity analysis and acceptability curves for annual
//! screening of ages 20-79.
//!
//!     cargo run --release --example psa_ceac [draws]

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::sensitivity::{ceac, run_psa, summarize};
use drscreen::Cell;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let draws: usize = std::env::args().nth(1).map_or(Ok(1000), |s| s.parse())?;
    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let model = &config.model;
    let ids = model.strategy_ids();
    let psa = run_psa(
        model,
        &ids,
        &Cell::headline(),
        &config.psa.parameters,
        draws,
        config.psa.seed,
        None,
    )?;

    println!("{draws} draws, seed {}", config.psa.seed);
    for row in summarize(&psa, Some(&model.status_quo)) {
        let (dc, dq) = (row.delta_cost.unwrap(), row.delta_qalys.unwrap());
        println!(
            "{:<26} dCost ${:>7.2}M [{:>7.2}, {:>7.2}]  dQALY {:>7.0} [{:>7.0}, {:>7.0}]",
            row.strategy,
            dc.mean / 1e6,
            dc.lower / 1e6,
            dc.upper / 1e6,
            dq.mean,
            dq.lower,
            dq.upper
        );
    }

    let wtp = [model.wtp.lower(), model.wtp.upper()];
    println!("\nprobability of the highest NMB");
    for p in ceac(&psa, &wtp)? {
        if p.probability > 0.0 {
            println!("  WTP {:>6.0}: {:<26} {:.3}", p.wtp, p.strategy, p.probability);
        }
    }
    Ok(())
}
