#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;

use drscreen::config::{load_config, Config};
use drscreen::strategy::{FilterParams, GraderProfile, GraderRegistry, StrategyTree};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn example_path() -> PathBuf {
    data_dir().join("example.toml")
}

pub fn example_config() -> Config {
    load_config(&[example_path()]).expect("shipped config loads")
}

/// Ids used by generated registries: two AI systems and two human graders.
pub const AI_IDS: [&str; 2] = ["A0", "A1"];
pub const HUMAN_IDS: [&str; 2] = ["H0", "H1"];

fn arb_ai(id: &'static str) -> impl Strategy<Value = GraderProfile> {
    (
        0.01..0.99f64,
        0.01..0.99f64,
        0.0..40.0f64,
        0.0..0.2f64,
        0.0..1.0f64,
        0.0..1.0f64,
    )
        .prop_map(move |(se, sp, cost, u, leak, pass)| {
            GraderProfile::ai(id, se, sp, cost)
                .with_ungradable_rate(u)
                .with_filter(FilterParams {
                    // Any leak up to the raw miss rate is admissible.
                    p_pass_given_positive: leak * (1.0 - se),
                    p_pass_given_negative: pass,
                })
        })
}

fn arb_human(id: &'static str) -> impl Strategy<Value = GraderProfile> {
    (0.01..0.99f64, 0.01..0.99f64, 0.0..40.0f64, 0.0..0.2f64)
        .prop_map(move |(se, sp, cost, u)| GraderProfile::human(id, se, sp, cost).with_ungradable_rate(u))
}

pub fn arb_registry() -> impl Strategy<Value = GraderRegistry> {
    (
        arb_ai(AI_IDS[0]),
        arb_ai(AI_IDS[1]),
        arb_human(HUMAN_IDS[0]),
        arb_human(HUMAN_IDS[1]),
    )
        .prop_map(|(a, b, c, d)| GraderRegistry::from_profiles([a, b, c, d]).expect("generated profiles are valid"))
}

/// A leaf over the generated ids. Filtered leaves only use AI graders; their
/// filter is filled in from the registry by [`bind_filters`].
fn arb_leaf() -> BoxedStrategy<StrategyTree> {
    prop_oneof![
        3 => prop::sample::select(AI_IDS.iter().chain(&HUMAN_IDS).copied().collect::<Vec<_>>())
            .prop_map(StrategyTree::leaf),
        1 => prop::sample::select(AI_IDS.to_vec()).prop_map(|id| StrategyTree::Filtered {
            grader: id.to_string(),
            filter: FilterParams { p_pass_given_positive: 0.0, p_pass_given_negative: 0.0 },
        }),
    ]
    .boxed()
}

/// Trees with at most `budget` grader instances.
pub fn arb_tree(budget: usize) -> BoxedStrategy<StrategyTree> {
    if budget <= 1 {
        return arb_leaf();
    }
    let seq = (1..budget)
        .prop_flat_map(move |k| (arb_tree(k), arb_tree(budget - k)))
        .prop_map(|(u, r)| StrategyTree::sequential(u, r));
    if budget < 3 {
        return prop_oneof![1 => arb_leaf(), 2 => seq].boxed();
    }
    let cons = (1..budget - 1)
        .prop_flat_map(move |a| (Just(a), 1..budget - a))
        .prop_flat_map(move |(a, b)| (arb_tree(a), arb_tree(b), arb_tree(budget - a - b)))
        .prop_map(|(x, y, z)| StrategyTree::consensus(x, y, z));
    prop_oneof![1 => arb_leaf(), 2 => seq, 2 => cons].boxed()
}

/// Copies each filtered grader's registry filter into the tree.
pub fn bind_filters(tree: &StrategyTree, registry: &GraderRegistry) -> StrategyTree {
    match tree {
        StrategyTree::Leaf(_) => tree.clone(),
        StrategyTree::Filtered { grader, .. } => StrategyTree::Filtered {
            grader: grader.clone(),
            filter: registry
                .get(grader)
                .and_then(|p| p.filter)
                .expect("AI graders carry a filter"),
        },
        StrategyTree::Sequential { upstream, reviewer } => {
            StrategyTree::sequential(bind_filters(upstream, registry), bind_filters(reviewer, registry))
        }
        StrategyTree::Consensus {
            first,
            second,
            adjudicator,
        } => StrategyTree::consensus(
            bind_filters(first, registry),
            bind_filters(second, registry),
            bind_filters(adjudicator, registry),
        ),
    }
}

/// A registry, a tree over it with at most eight graders, and a prevalence.
pub fn arb_case() -> impl Strategy<Value = (GraderRegistry, StrategyTree, f64)> {
    (arb_registry(), arb_tree(8), 0.01..0.99f64).prop_map(|(r, t, p)| {
        let t = bind_filters(&t, &r);
        (r, t, p)
    })
}

/// Sum of per-read costs over every grader instance in the tree.
pub fn instance_cost(tree: &StrategyTree, registry: &GraderRegistry) -> f64 {
    tree.grader_ids()
        .iter()
        .map(|id| registry.get(id).unwrap().cost_per_read)
        .sum()
}

/// Published incremental results against manual grading for annual
/// screening of ages 20-79.
pub struct Table1Column {
    pub id: &'static str,
    pub delta_cost_musd: f64,
    pub delta_qalys: f64,
    pub delta_bfy: f64,
    /// `None` where the table prints "Dominated".
    pub icer: Option<f64>,
    pub cost_per_blindness_year: Option<f64>,
    pub nmb_musd: f64,
}

const fn col(
    id: &'static str,
    delta_cost_musd: f64,
    delta_qalys: f64,
    delta_bfy: f64,
    icer: Option<f64>,
    cost_per_blindness_year: Option<f64>,
    nmb_musd: f64,
) -> Table1Column {
    Table1Column {
        id,
        delta_cost_musd,
        delta_qalys,
        delta_bfy,
        icer,
        cost_per_blindness_year,
        nmb_musd,
    }
}

pub const TABLE1: [Table1Column; 8] = [
    col("ai", 7.57, -417.0, -1221.0, None, None, -23.44),
    col("human-review", -0.29, -2387.0, -6985.0, Some(122.0), Some(42.0), -90.53),
    col(
        "expert-review",
        -3.27,
        -1430.0,
        -4184.0,
        Some(2287.0),
        Some(781.0),
        -51.13,
    ),
    col(
        "sensitive-human-review",
        -2.19,
        -1760.0,
        -5152.0,
        Some(1244.0),
        Some(425.0),
        -64.80,
    ),
    col(
        "sensitive-expert-review",
        -4.89,
        -816.0,
        -2390.0,
        Some(5989.0),
        Some(2046.0),
        -26.18,
    ),
    col("copilot", 0.90, 146.0, 426.0, Some(6194.0), Some(2116.0), 4.64),
    col("sequential-review", 11.89, -3445.0, -10079.0, None, None, -142.97),
    col("ai-triage", 0.48, -759.0, -2221.0, None, None, -29.35),
];

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
