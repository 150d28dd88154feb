//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line;
//! the process exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{arb_case, example_config, rel_err, TABLE1};
use drscreen::cea::{nmb_crossing, CeClass, CeaRecord, Icer, WtpPolicy};
use drscreen::grid::{run_grid, Selection};
use drscreen::markov::{
    aggregate_scenario, run_cohort, run_cohort_from, HealthState, Horizon, LifeTable, OnsetBand, Perspective,
    StateValues,
};
use drscreen::sensitivity::{ceac, run_psa, wtp_grid, wtp_switches, CostEffect, DistributionSpec, BISECTION_TOLERANCE};
use drscreen::strategy::{closed_form_performance, enumerate_performance, implied_prevalence, DiagnosticPerformance};
use drscreen::Cell;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn same_performance(a: &DiagnosticPerformance, b: &DiagnosticPerformance) -> bool {
    let d = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
    d(a.sensitivity, b.sensitivity)
        && d(a.specificity, b.specificity)
        && d(a.expected_cost_per_case, b.expected_cost_per_case)
        && d(a.human_reads_per_case, b.human_reads_per_case)
        && d(a.ai_reads_per_case, b.ai_reads_per_case)
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let config = example_config();
    let model = &config.model;
    let prev = model.params.cohort.screening_prevalence;
    let mut worst: f64 = 0.0;
    for s in &model.strategies {
        let tree = model.tree(&s.id).map_err(|e| e.to_string())?;
        let cf = closed_form_performance(&tree, &model.registry, prev).map_err(|e| e.to_string())?;
        let en = enumerate_performance(&tree, &model.registry, prev).map_err(|e| e.to_string())?;
        check(same_performance(&cf, &en), format!("{}: {cf:?} vs {en:?}", s.id))?;
        worst = worst
            .max((cf.sensitivity - en.sensitivity).abs())
            .max((cf.specificity - en.specificity).abs());
    }
    let mut runner = TestRunner::deterministic();
    let cases = 256;
    for _ in 0..cases {
        let (registry, tree, prev) = arb_case().new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let cf = closed_form_performance(&tree, &registry, prev).map_err(|e| e.to_string())?;
        let en = enumerate_performance(&tree, &registry, prev).map_err(|e| e.to_string())?;
        check(same_performance(&cf, &en), format!("{tree}: {cf:?} vs {en:?}"))?;
        worst = worst
            .max((cf.sensitivity - en.sensitivity).abs())
            .max((cf.specificity - en.specificity).abs());
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "9 shipped strategies and {cases} random trees agree, max difference {worst:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn prevalence_consistency() -> Verdict {
    let a = implied_prevalence(0.8189, 0.9615, 0.8074).map_err(|e| e.to_string())?;
    let b = implied_prevalence(0.9949, 0.9485, 0.9986).map_err(|e| e.to_string())?;
    check((a - b).abs() <= 0.005, format!("{a} vs {b}"))?;
    check(
        (a - 0.0746).abs() < 5e-4 && (b - 0.0739).abs() < 5e-4,
        format!("{a:.4}, {b:.4}"),
    )?;
    Ok(format!("implied prevalences {a:.4} and {b:.4}"))
}

fn table1_regression() -> Verdict {
    let start = Instant::now();
    let policy = WtpPolicy::default();
    let record = |id: &str| {
        let c = TABLE1.iter().find(|c| c.id == id).unwrap();
        CeaRecord::from_deltas(
            c.id,
            "manual",
            c.delta_cost_musd * 1e6,
            c.delta_qalys,
            c.delta_bfy,
            &policy,
        )
    };
    let icer_of = |id: &str| record(id).icer.value().ok_or(format!("{id}: no ICER"));
    let copilot = icer_of("copilot")?;
    check(rel_err(copilot, 6194.0) <= 0.02, format!("copilot ICER {copilot}"))?;
    let human = icer_of("human-review")?;
    check(rel_err(human, 122.0) <= 0.02, format!("human review ICER {human}"))?;
    let by = record("copilot")
        .cost_per_blindness_year_averted
        .value()
        .unwrap_or(f64::NAN);
    check(
        rel_err(by, 2116.0) <= 0.02,
        format!("copilot cost per blindness year {by}"),
    )?;
    for (id, nmb, tol) in [
        ("ai", -23.44, 0.005),
        ("human-review", -90.53, 0.005),
        ("copilot", 4.64, 0.01),
    ] {
        let got = record(id).nmb_upper / 1e6;
        check(rel_err(got, nmb) <= tol, format!("{id} NMB {got:.3}M vs {nmb}M"))?;
    }
    for id in ["ai", "sequential-review", "ai-triage"] {
        let r = record(id);
        check(
            r.icer == Icer::Dominated && r.ce_class == CeClass::Dominated && r.ce_class.to_string() == "dominated",
            format!("{id}: {:?}", r.icer),
        )?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "ICERs {copilot:.0} and {human:.0}, cost per blindness year {by:.0}, strategies 1, 7, 8 dominated"
    ))
}

fn markov_conservation() -> Verdict {
    let start = Instant::now();
    let config = example_config();
    let model = &config.model;
    let selection = Selection::default();
    let mut scenarios = 0;
    let mut worst: f64 = 0.0;
    for cell in selection.cells() {
        for s in &model.strategies {
            let sc = model
                .scenario(&s.id, cell.frequency, cell.age_group, cell.horizon, cell.perspective)
                .map_err(|e| e.to_string())?;
            let perf = model.performance(&s.id).map_err(|e| e.to_string())?;
            let trace = run_cohort(&sc, &model.params, &perf).map_err(|e| e.to_string())?;
            for c in &trace.cycles {
                let err = (c.occupancy.iter().sum::<f64>() - trace.cohort_size).abs();
                worst = worst.max(err);
                check(
                    err <= 1e-9,
                    format!("{} cycle {}: mass error {err:e}", sc.id(), c.cycle),
                )?;
            }
            scenarios += 1;
        }
    }
    check(scenarios == 270, format!("{scenarios} scenarios"))?;
    let grid = run_grid(model, &selection, None).map_err(|e| e.to_string())?;
    check(
        grid.rows.len() == 270 && grid.failures().count() == 0,
        "grid incomplete",
    )?;

    // Frozen cohort: nothing moves, everyone in full health, no discounting.
    let mut p = model.params.clone();
    p.transitions.onset = vec![OnsetBand { from_age: 0, p: 0.0 }];
    p.transitions.p_blind_untreated = 0.0;
    p.transitions.p_blind_treated = 0.0;
    p.transitions.p_regress = 0.0;
    p.life_table = LifeTable::constant(0.0);
    p.utilities = StateValues {
        non_vtdr: 1.0,
        ..p.utilities
    };
    p.discounting.cost_rate = 0.0;
    p.discounting.effect_rate = 0.0;
    p.cohort.initial_state.non_vtdr = 1.0;
    p.cohort.initial_state.vtdr = 0.0;
    p.cohort.age_min = 18;
    p.cohort.age_max = 19;
    let cell = Cell::headline();
    let mut sc = model
        .scenario(
            "manual",
            cell.frequency,
            cell.age_group,
            Horizon::Years(10),
            Perspective::Societal,
        )
        .map_err(|e| e.to_string())?;
    sc.cohort_size = 100.0;
    let no_screen = DiagnosticPerformance {
        sensitivity: 0.0,
        specificity: 1.0,
        expected_cost_per_case: 0.0,
        human_reads_per_case: 0.0,
        ai_reads_per_case: 0.0,
    };
    let frozen = aggregate_scenario(
        &run_cohort(&sc, &p, &no_screen).map_err(|e| e.to_string())?,
        Perspective::Societal,
    );
    check(
        frozen.qalys == 1000.0 && frozen.blindness_cases == 0.0,
        format!("frozen cohort {frozen:?}"),
    )?;

    // Everyone starts dead.
    let mut dead = [0.0; 6];
    dead[HealthState::Dead.index()] = 50.0;
    let trace =
        run_cohort_from(&sc, &model.params, &no_screen, vec![(18, dead), (19, dead)]).map_err(|e| e.to_string())?;
    check(
        trace.totals() == Default::default(),
        "all-dead cohort accrued something",
    )?;

    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "270 scenarios, max mass error {worst:.1e}, frozen and all-dead cases exact, {:.2?}",
        start.elapsed()
    ))
}

fn psa_determinism() -> Verdict {
    let config = example_config();
    let model = &config.model;
    let ids = model.strategy_ids();
    let cell = Cell::headline();
    let specs = &config.psa.parameters;

    let fixed: Vec<_> = specs.iter().map(|s| DistributionSpec::fixed(&s.path)).collect();
    let point = run_psa(model, &ids, &cell, &fixed, 4, 1, None).map_err(|e| e.to_string())?;
    for (s, id) in ids.iter().enumerate() {
        let r = cell.evaluate(model, id).map_err(|e| e.to_string())?;
        check(
            point.column(s).all(|o| o.cost == r.total_cost && o.qalys == r.qalys),
            format!("{id}: point mass differs from deterministic"),
        )?;
    }

    let start = Instant::now();
    let draws = 10_000;
    let full = run_psa(model, &ids, &cell, specs, draws, config.psa.seed, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    check(
        full.draws.len() == draws && full.draws.iter().all(|d| d.len() == 9),
        "wrong PSA shape",
    )?;

    let again = run_psa(model, &ids, &cell, specs, 200, config.psa.seed, Some(1)).map_err(|e| e.to_string())?;
    let bits = |o: &drscreen::sensitivity::Outcome| (o.cost.to_bits(), o.qalys.to_bits());
    check(
        again
            .draws
            .iter()
            .zip(&full.draws)
            .all(|(a, b)| a.iter().map(bits).eq(b.iter().map(bits))),
        "seeded rerun is not bit-identical",
    )?;

    let grid = wtp_grid(
        config.psa.wtp_max,
        config.psa.wtp_step,
        &[model.wtp.lower(), model.wtp.upper()],
    );
    let points = ceac(&full, &grid).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for w in &grid {
        let total: f64 = points.iter().filter(|p| p.wtp == *w).map(|p| p.probability).sum();
        worst = worst.max((total - 1.0).abs());
    }
    check(worst <= 1e-9, format!("CEAC column sum off by {worst:e}"))?;
    Ok(format!(
        "point mass exact, reruns bit-identical, CEAC sums within {worst:.1e}, {draws} draws x 9 strategies in {elapsed:.2?}"
    ))
}

fn wtp_switch_formula() -> Verdict {
    let mut cases = vec![((0.90e6, 146.0), (-4.89e6, -816.0))];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    while cases.len() < 200 {
        let a = (rng.random_range(1e4..2e7), rng.random_range(1.0..2e3));
        let b = (rng.random_range(-2e7..0.0), rng.random_range(-4e3..0.0));
        let w = (a.0 - b.0) / (a.1 - b.1);
        if (1_000.0..100_000.0).contains(&w) {
            cases.push((a, b));
        }
    }
    let mut worst: f64 = 0.0;
    let mut headline = 0.0;
    for (i, ((ca, qa), (cb, qb))) in cases.iter().copied().enumerate() {
        let exact = nmb_crossing(ca, qa, cb, qb).ok_or("parallel NMB lines")?;
        let options = [
            CostEffect {
                id: "a".into(),
                cost: ca,
                effect: qa,
            },
            CostEffect {
                id: "b".into(),
                cost: cb,
                effect: qb,
            },
        ];
        let found = wtp_switches(&options, 0.0, 200_000.0, 200, BISECTION_TOLERANCE);
        check(found.len() == 1, format!("case {i}: {} switches", found.len()))?;
        let err = rel_err(found[0].value, exact);
        worst = worst.max(err);
        check(err <= 1e-6, format!("case {i}: {} vs {exact}", found[0].value))?;
        if i == 0 {
            headline = found[0].value;
        }
    }
    Ok(format!(
        "{} synthetic pairs, max relative error {worst:.1e}, e.g. switch at {headline:.1}",
        cases.len()
    ))
}

fn sign_pattern() -> Verdict {
    let config = example_config();
    let model = &config.model;
    let cell = Cell::headline();
    let base = cell.evaluate(model, &model.status_quo).map_err(|e| e.to_string())?;
    let mut gaining = Vec::new();
    for s in model.strategies.iter().filter(|s| s.id != model.status_quo) {
        let r = cell.evaluate(model, &s.id).map_err(|e| e.to_string())?;
        if r.qalys > base.qalys && r.blindness_free_years > base.blindness_free_years {
            gaining.push(s.id.clone());
        }
    }
    check(
        gaining == ["copilot"],
        format!("strategies gaining health: {gaining:?}"),
    )?;
    Ok("copilot is the only strategy gaining QALYs and blindness-free years".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("prevalence consistency", prevalence_consistency),
        ("Table 1 arithmetic", table1_regression),
        ("Markov conservation", markov_conservation),
        ("PSA determinism and collapse", psa_determinism),
        ("WTP switch formula", wtp_switch_formula),
        ("shipped sign pattern", sign_pattern),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
