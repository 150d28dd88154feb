//! Brute-force evaluation of a pipeline by enumerating every joint grader
//! outcome. Used as an independent check on the closed-form composition.

use super::performance::{combine, Branch};
use super::{FilterParams, GraderKind, GraderProfile, GraderRegistry, StrategyError, StrategyTree};

/// Largest number of grader instances the enumerator accepts (3^n outcomes
/// per disease state).
pub const MAX_ENUMERATED_GRADERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Positive,
    Negative,
    Ungradable,
}

const OUTCOMES: [Outcome; 3] = [Outcome::Positive, Outcome::Negative, Outcome::Ungradable];

struct Instance<'a> {
    profile: &'a GraderProfile,
    filter: Option<FilterParams>,
}

impl Instance<'_> {
    fn probability(&self, outcome: Outcome, diseased: bool) -> f64 {
        let u = self.profile.ungradable_rate;
        // Probability of a positive call among gradable reads.
        let pos = match (self.filter, diseased) {
            (None, true) => self.profile.sensitivity,
            (None, false) => 1.0 - self.profile.specificity,
            (Some(f), true) => 1.0 - f.p_pass_given_positive,
            (Some(f), false) => 1.0 - f.p_pass_given_negative,
        };
        match outcome {
            Outcome::Ungradable => u,
            Outcome::Positive => (1.0 - u) * pos,
            Outcome::Negative => (1.0 - u) * (1.0 - pos),
        }
    }
}

fn collect<'a>(
    tree: &StrategyTree,
    registry: &'a GraderRegistry,
    out: &mut Vec<Instance<'a>>,
) -> Result<(), StrategyError> {
    match tree {
        StrategyTree::Leaf(id) => out.push(Instance {
            profile: registry.lookup(id)?,
            filter: None,
        }),
        StrategyTree::Filtered { grader, filter } => out.push(Instance {
            profile: registry.lookup(grader)?,
            filter: Some(*filter),
        }),
        StrategyTree::Sequential { upstream, reviewer } => {
            collect(upstream, registry, out)?;
            collect(reviewer, registry, out)?;
        }
        StrategyTree::Consensus {
            first,
            second,
            adjudicator,
        } => {
            collect(first, registry, out)?;
            collect(second, registry, out)?;
            collect(adjudicator, registry, out)?;
        }
    }
    Ok(())
}

/// Tally of the graders actually consulted on one routed case.
#[derive(Default)]
struct Consulted {
    cost: f64,
    human: f64,
    ai: f64,
}

/// Routes one fixed outcome vector through the tree. `offset` is the index of
/// the subtree's first leaf in depth-first order. Returns the final call.
fn route(
    tree: &StrategyTree,
    offset: usize,
    outcomes: &[Outcome],
    instances: &[Instance<'_>],
    consulted: &mut Consulted,
) -> bool {
    match tree {
        StrategyTree::Leaf(_) | StrategyTree::Filtered { .. } => {
            let inst = &instances[offset];
            consulted.cost += inst.profile.cost_per_read;
            match inst.profile.kind {
                GraderKind::Human => consulted.human += 1.0,
                GraderKind::Ai => consulted.ai += 1.0,
            }
            outcomes[offset] != Outcome::Negative
        }
        StrategyTree::Sequential { upstream, reviewer } => {
            if route(upstream, offset, outcomes, instances, consulted) {
                route(
                    reviewer,
                    offset + upstream.grader_count(),
                    outcomes,
                    instances,
                    consulted,
                )
            } else {
                false
            }
        }
        StrategyTree::Consensus {
            first,
            second,
            adjudicator,
        } => {
            let second_at = offset + first.grader_count();
            let adjudicator_at = second_at + second.grader_count();
            let a = route(first, offset, outcomes, instances, consulted);
            let b = route(second, second_at, outcomes, instances, consulted);
            if a == b {
                a
            } else {
                route(adjudicator, adjudicator_at, outcomes, instances, consulted)
            }
        }
    }
}

fn enumerate_state(tree: &StrategyTree, instances: &[Instance<'_>], diseased: bool) -> Branch {
    let n = instances.len();
    let total = 3usize.pow(n as u32);
    let mut outcomes = vec![Outcome::Positive; n];
    let mut acc = Branch::default();
    for code in 0..total {
        let mut c = code;
        let mut weight = 1.0;
        for (slot, inst) in outcomes.iter_mut().zip(instances) {
            *slot = OUTCOMES[c % 3];
            c /= 3;
            weight *= inst.probability(*slot, diseased);
        }
        if weight == 0.0 {
            continue;
        }
        let mut consulted = Consulted::default();
        let positive = route(tree, 0, &outcomes, instances, &mut consulted);
        if positive {
            acc.positive += weight;
        }
        acc.cost += weight * consulted.cost;
        acc.human_reads += weight * consulted.human;
        acc.ai_reads += weight * consulted.ai;
    }
    acc
}

/// Composed performance by exhaustive enumeration of joint grader outcomes.
/// Accepts prevalence in the closed interval [0, 1].
pub fn enumerate_performance(
    tree: &StrategyTree,
    registry: &GraderRegistry,
    prevalence: f64,
) -> Result<super::DiagnosticPerformance, StrategyError> {
    if !(0.0..=1.0).contains(&prevalence) {
        return Err(StrategyError::Domain(format!(
            "prevalence {prevalence} must lie in [0, 1]"
        )));
    }
    let n = tree.grader_count();
    if n > MAX_ENUMERATED_GRADERS {
        return Err(StrategyError::TooLarge {
            graders: n,
            limit: MAX_ENUMERATED_GRADERS,
        });
    }
    let mut instances = Vec::with_capacity(n);
    collect(tree, registry, &mut instances)?;
    let diseased = enumerate_state(tree, &instances, true);
    let healthy = enumerate_state(tree, &instances, false);
    Ok(combine(diseased, healthy, prevalence))
}
