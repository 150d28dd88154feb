//! Annual screening of ages 20-79: every strategy against manual grading.
//!
//!     cargo run --example table1_cea [config.toml ...]

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::report::Table1;
use drscreen::Cell;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.is_empty() {
        paths.push(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml"));
    }
    let config = load_config(&paths)?;
    let model = &config.model;
    let t = Table1::build(model, &Cell::headline())?;
    let (sq_id, sq) = &t.status_quo;

    println!(
        "status quo {sq_id}: cost ${:.2}M, {:.0} QALYs, {:.0} blindness-free years",
        sq.total_cost / 1e6,
        sq.qalys,
        sq.blindness_free_years
    );
    println!(
        "  screening {:.2}M  referral {:.2}M  treatment {:.2}M  blindness {:.2}M",
        sq.costs.screening / 1e6,
        sq.costs.referral / 1e6,
        sq.costs.treatment / 1e6,
        sq.costs.blindness / 1e6
    );
    println!(
        "  blind {:.0}  detected {:.0}  treated {:.0}",
        sq.blindness_cases, sq.detected_vtdr, sq.treated_vtdr
    );
    println!();
    println!(
        "{:<26} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9} {:>12} {:>10}  class",
        "strategy", "dBlind", "dScreen", "dRefer", "dTreat", "dBlindC", "dCost $M", "dQALY", "ICER", "NMB3x $M"
    );
    for (id, r, c) in &t.comparisons {
        let label = &model.strategy(id)?.label;
        println!(
            "{:<26} {:>8.0} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>9.2} {:>9.0} {:>12} {:>10.2}  {}",
            label,
            r.blindness_cases - sq.blindness_cases,
            (r.costs.screening - sq.costs.screening) / 1e6,
            (r.costs.referral - sq.costs.referral) / 1e6,
            (r.costs.treatment - sq.costs.treatment) / 1e6,
            (r.costs.blindness - sq.costs.blindness) / 1e6,
            c.delta_cost / 1e6,
            c.delta_qalys,
            c.icer.value().map_or(c.icer.to_string(), |v| format!("{v:.0}")),
            c.nmb_upper / 1e6,
            c.ce_class
        );
    }
    Ok(())
}
