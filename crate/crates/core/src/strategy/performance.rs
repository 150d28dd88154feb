//! Composed diagnostic performance of a screening pipeline.
//!
//! Grader verdicts are assumed conditionally independent given the true
//! disease status. No correlation between graders is modelled. Ungradable
//! images follow the positive pathway and are charged the downstream reads.

use serde::{Deserialize, Serialize};

use super::{GraderKind, GraderProfile, GraderRegistry, StrategyError, StrategyTree};

/// Composed accuracy and expected grading workload of a pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticPerformance {
    pub sensitivity: f64,
    pub specificity: f64,
    /// Prevalence-weighted expected grading cost per screened case (USD).
    pub expected_cost_per_case: f64,
    pub human_reads_per_case: f64,
    pub ai_reads_per_case: f64,
}

impl DiagnosticPerformance {
    pub fn accuracy(&self, prevalence: f64) -> Result<f64, StrategyError> {
        accuracy(self.sensitivity, self.specificity, prevalence)
    }

    /// Share of screened cases with a final positive call.
    pub fn positive_rate(&self, prevalence: f64) -> f64 {
        prevalence * self.sensitivity + (1.0 - prevalence) * (1.0 - self.specificity)
    }
}

/// Outcome of a (sub)pipeline conditioned on one true disease state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Branch {
    /// Probability the pipeline's final call is positive.
    pub positive: f64,
    pub cost: f64,
    pub human_reads: f64,
    pub ai_reads: f64,
}

impl Branch {
    fn reads(profile: &GraderProfile) -> (f64, f64) {
        match profile.kind {
            GraderKind::Human => (1.0, 0.0),
            GraderKind::Ai => (0.0, 1.0),
        }
    }

    fn single(profile: &GraderProfile, positive: f64) -> Self {
        let (human_reads, ai_reads) = Branch::reads(profile);
        Branch {
            positive,
            cost: profile.cost_per_read,
            human_reads,
            ai_reads,
        }
    }

    /// `self` runs first; `other` is consulted with probability `weight`.
    fn plus_weighted(self, other: Branch, weight: f64) -> (f64, f64, f64) {
        (
            self.cost + weight * other.cost,
            self.human_reads + weight * other.human_reads,
            self.ai_reads + weight * other.ai_reads,
        )
    }
}

/// Probability that a single grader instance calls a case positive,
/// for a diseased (`diseased = true`) or disease-free case. Ungradable mass
/// counts as positive.
pub(crate) fn leaf_positive(profile: &GraderProfile, filter: Option<&super::FilterParams>, diseased: bool) -> f64 {
    let u = profile.ungradable_rate;
    let graded_positive = match (filter, diseased) {
        (None, true) => profile.sensitivity,
        (None, false) => 1.0 - profile.specificity,
        (Some(f), true) => 1.0 - f.p_pass_given_positive,
        (Some(f), false) => 1.0 - f.p_pass_given_negative,
    };
    u + (1.0 - u) * graded_positive
}

fn branch(tree: &StrategyTree, registry: &GraderRegistry, diseased: bool) -> Result<Branch, StrategyError> {
    Ok(match tree {
        StrategyTree::Leaf(id) => {
            let p = registry.lookup(id)?;
            Branch::single(p, leaf_positive(p, None, diseased))
        }
        StrategyTree::Filtered { grader, filter } => {
            let p = registry.lookup(grader)?;
            Branch::single(p, leaf_positive(p, Some(filter), diseased))
        }
        StrategyTree::Sequential { upstream, reviewer } => {
            let u = branch(upstream, registry, diseased)?;
            let r = branch(reviewer, registry, diseased)?;
            let (cost, human_reads, ai_reads) = u.plus_weighted(r, u.positive);
            Branch {
                positive: u.positive * r.positive,
                cost,
                human_reads,
                ai_reads,
            }
        }
        StrategyTree::Consensus {
            first,
            second,
            adjudicator,
        } => {
            let a = branch(first, registry, diseased)?;
            let b = branch(second, registry, diseased)?;
            let c = branch(adjudicator, registry, diseased)?;
            let disagree = a.positive * (1.0 - b.positive) + (1.0 - a.positive) * b.positive;
            let parallel = Branch {
                positive: 0.0,
                cost: a.cost + b.cost,
                human_reads: a.human_reads + b.human_reads,
                ai_reads: a.ai_reads + b.ai_reads,
            };
            let (cost, human_reads, ai_reads) = parallel.plus_weighted(c, disagree);
            Branch {
                positive: a.positive * b.positive + disagree * c.positive,
                cost,
                human_reads,
                ai_reads,
            }
        }
    })
}

pub(crate) fn check_prevalence_open(prevalence: f64) -> Result<(), StrategyError> {
    if prevalence.is_finite() && prevalence > 0.0 && prevalence < 1.0 {
        Ok(())
    } else {
        Err(StrategyError::Domain(format!(
            "prevalence {prevalence} must lie strictly between 0 and 1"
        )))
    }
}

pub(crate) fn combine(diseased: Branch, healthy: Branch, prevalence: f64) -> DiagnosticPerformance {
    let w = |d: f64, h: f64| prevalence * d + (1.0 - prevalence) * h;
    DiagnosticPerformance {
        sensitivity: diseased.positive,
        specificity: 1.0 - healthy.positive,
        expected_cost_per_case: w(diseased.cost, healthy.cost),
        human_reads_per_case: w(diseased.human_reads, healthy.human_reads),
        ai_reads_per_case: w(diseased.ai_reads, healthy.ai_reads),
    }
}

/// Composed sensitivity, specificity and expected workload by recursive
/// closed-form rules over the tree.
pub fn closed_form_performance(
    tree: &StrategyTree,
    registry: &GraderRegistry,
    prevalence: f64,
) -> Result<DiagnosticPerformance, StrategyError> {
    check_prevalence_open(prevalence)?;
    let diseased = branch(tree, registry, true)?;
    let healthy = branch(tree, registry, false)?;
    Ok(combine(diseased, healthy, prevalence))
}

/// Prevalence-weighted accuracy.
pub fn accuracy(sensitivity: f64, specificity: f64, prevalence: f64) -> Result<f64, StrategyError> {
    check_prevalence_open(prevalence)?;
    Ok(prevalence * sensitivity + (1.0 - prevalence) * specificity)
}

/// Prevalence implied by an (accuracy, sensitivity, specificity) triple.
pub fn implied_prevalence(accuracy: f64, sensitivity: f64, specificity: f64) -> Result<f64, StrategyError> {
    if sensitivity == specificity {
        return Err(StrategyError::Domain(
            "prevalence is unidentifiable when sensitivity equals specificity".into(),
        ));
    }
    Ok((accuracy - specificity) / (sensitivity - specificity))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(profiles: Vec<GraderProfile>) -> GraderRegistry {
        GraderRegistry::from_profiles(profiles).unwrap()
    }

    #[test]
    fn leaf_returns_its_profile() {
        let r = reg(vec![GraderProfile::human("M", 0.9, 0.95, 4.0)]);
        let p = closed_form_performance(&StrategyTree::leaf("M"), &r, 0.1).unwrap();
        assert_eq!(p.sensitivity, 0.9);
        assert!((p.specificity - 0.95).abs() < 1e-15);
        assert_eq!(p.expected_cost_per_case, 4.0);
        assert_eq!(p.human_reads_per_case, 1.0);
    }

    #[test]
    fn ungradable_routes_positive() {
        let r = reg(vec![GraderProfile::ai("AI", 0.9, 0.8, 1.0).with_ungradable_rate(0.13)]);
        let p = closed_form_performance(&StrategyTree::leaf("AI"), &r, 0.1).unwrap();
        assert!((p.sensitivity - (0.9 + 0.13 * 0.1)).abs() < 1e-15);
        assert!((p.specificity - 0.8 * 0.87).abs() < 1e-15);
    }

    #[test]
    fn sequential_specificity() {
        let r = reg(vec![
            GraderProfile::ai("A", 0.95, 0.80, 1.0),
            GraderProfile::human("B", 0.9, 0.99, 5.0),
        ]);
        let t = StrategyTree::sequential(StrategyTree::leaf("A"), StrategyTree::leaf("B"));
        let p = closed_form_performance(&t, &r, 0.2).unwrap();
        assert!((p.specificity - 0.998).abs() < 1e-12);
        assert!((p.sensitivity - 0.95 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn consensus_sensitivity() {
        let r = reg(vec![
            GraderProfile::ai("A", 0.96, 0.9, 1.0),
            GraderProfile::human("B", 0.85, 0.9, 5.0),
            GraderProfile::human("C", 0.95, 0.9, 5.0),
        ]);
        let t = StrategyTree::consensus(
            StrategyTree::leaf("A"),
            StrategyTree::leaf("B"),
            StrategyTree::leaf("C"),
        );
        let p = closed_form_performance(&t, &r, 0.2).unwrap();
        assert!((p.sensitivity - 0.9851).abs() < 1e-12, "{}", p.sensitivity);
    }

    #[test]
    fn perfect_graders_compose_to_perfection() {
        let r = reg(vec![
            GraderProfile::ai("AI", 1.0, 1.0, 1.0),
            GraderProfile::human("M", 1.0, 1.0, 5.0),
        ]);
        let t = StrategyTree::sequential(
            StrategyTree::leaf("AI"),
            StrategyTree::consensus(
                StrategyTree::leaf("M"),
                StrategyTree::leaf("M"),
                StrategyTree::leaf("AI"),
            ),
        );
        let p = closed_form_performance(&t, &r, 0.3).unwrap();
        assert_eq!((p.sensitivity, p.specificity), (1.0, 1.0));
    }

    #[test]
    fn prevalence_outside_open_interval_is_rejected() {
        let r = reg(vec![GraderProfile::human("M", 0.9, 0.95, 4.0)]);
        for prev in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(closed_form_performance(&StrategyTree::leaf("M"), &r, prev).is_err());
        }
    }

    #[test]
    fn accuracy_examples() {
        assert!((accuracy(0.9615, 0.8074, 0.0746).unwrap() - 0.8189).abs() < 5e-5);
        assert!((accuracy(0.9485, 0.9986, 0.0739).unwrap() - 0.9949).abs() < 5e-5);
        assert!((accuracy(0.7, 0.7, 0.33).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn implied_prevalence_inverts_accuracy() {
        let p1 = implied_prevalence(0.8189, 0.9615, 0.8074).unwrap();
        let p8 = implied_prevalence(0.9949, 0.9485, 0.9986).unwrap();
        assert!((p1 - 0.0746).abs() < 5e-4, "{p1}");
        assert!((p8 - 0.0739).abs() < 5e-4, "{p8}");
        assert!((accuracy(0.9615, 0.8074, p1).unwrap() - 0.8189).abs() < 1e-12);
        assert_eq!(implied_prevalence(0.9, 0.95, 0.9).unwrap(), 0.0);
        assert!(implied_prevalence(0.9, 0.8, 0.8).is_err());
    }
}
