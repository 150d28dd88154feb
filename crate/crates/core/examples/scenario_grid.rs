//! All 270 scenarios, each against manual grading in its own cell, written
//! as grid.csv.
//!
//!     cargo run --release --example scenario_grid [out-dir]

use std::path::PathBuf;

use drscreen::cea::CeClass;
use drscreen::config::load_config;
use drscreen::grid::{run_grid, Selection};
use drscreen::report::{grid_report, write_reports, Provenance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("out"), PathBuf::from);
    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let selection = Selection::default();
    let grid = run_grid(&config.model, &selection, None)?;

    let mut by_class = std::collections::BTreeMap::<String, usize>::new();
    for row in &grid.rows {
        let class = match &row.outcome {
            Ok((_, rec)) => rec.ce_class.to_string(),
            Err(_) => "error".into(),
        };
        *by_class.entry(class).or_default() += 1;
    }
    println!("{} scenarios", grid.rows.len());
    for (class, n) in &by_class {
        println!("  {class:<22} {n}");
    }

    let best = grid
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|(_, rec)| rec))
        .filter(|rec| {
            matches!(
                rec.ce_class,
                CeClass::VeryCostEffective | CeClass::CostEffective | CeClass::Dominant
            )
        })
        .filter(|rec| rec.delta_qalys > 0.0)
        .max_by(|a, b| a.nmb_upper.total_cmp(&b.nmb_upper));
    if let Some(rec) = best {
        println!(
            "highest NMB at 3x GDP with a QALY gain: {} (${:.2}M)",
            rec.scenario_id,
            rec.nmb_upper / 1e6
        );
    }

    let prov = Provenance {
        seed: config.psa.seed,
        config_hash: config.hash.clone(),
    };
    for p in write_reports(&out, &[grid_report(&grid, &prov)])? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
