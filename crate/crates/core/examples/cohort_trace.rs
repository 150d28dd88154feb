//! Year-by-year occupancy and flows for one scenario.
//!
//!     cargo run --example cohort_trace [strategy] [frequency] [age-group]

use std::path::PathBuf;

use drscreen::config::load_config;
use drscreen::markov::{aggregate_scenario, run_cohort, AgeGroup, Frequency, HealthState, Horizon, Perspective};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let strategy = args.first().map_or("copilot", String::as_str);
    let frequency: Frequency = args.get(1).map_or("annual", String::as_str).parse()?;
    let age_group: AgeGroup = args.get(2).map_or("20-79", String::as_str).parse()?;

    let config = load_config(&[PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/example.toml")])?;
    let model = &config.model;
    let scenario = model.scenario(
        strategy,
        frequency,
        age_group,
        Horizon::LifeExpectancy,
        Perspective::Societal,
    )?;
    let perf = model.performance(strategy)?;
    let trace = run_cohort(&scenario, &model.params, &perf)?;

    println!("{}", scenario.id());
    print!("{:>5}", "year");
    for s in HealthState::ALL {
        print!(" {:>11}", s.name());
    }
    println!(" {:>11} {:>10} {:>12}", "mass", "new blind", "cost $");
    for c in &trace.cycles {
        print!("{:>5}", c.cycle);
        for v in c.occupancy {
            print!(" {v:>11.1}");
        }
        let mass: f64 = c.occupancy.iter().sum();
        println!(
            " {mass:>11.3} {:>10.1} {:>12.0}",
            c.flow.blindness_cases,
            c.flow.cost.total(Perspective::Societal)
        );
    }

    let r = aggregate_scenario(&trace, Perspective::Societal);
    println!(
        "\ntotal cost ${:.2}M, {:.0} QALYs, {:.0} blindness-free years, {:.0} blindness cases",
        r.total_cost / 1e6,
        r.qalys,
        r.blindness_free_years,
        r.blindness_cases
    );
    Ok(())
}
