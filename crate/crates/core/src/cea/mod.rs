//! Incremental cost-effectiveness statistics against a comparator.

mod frontier;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markov::ScenarioResult;

pub use frontier::{frontier, Frontier, FrontierEntry, FrontierPoint, FrontierStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CeaError {
    #[error("frontier needs at least two scenarios, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite cost or effect for scenario '{0}'")]
    NonFinite(String),
}

/// Which side of the origin a meaningful ratio lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrant {
    /// More costly, more effective.
    NorthEast,
    /// Cheaper, less effective: the ratio is savings per unit of effect forgone.
    SouthWest,
}

/// An incremental ratio or the reason it is not reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Icer {
    Ratio { value: f64, quadrant: Quadrant },
    Dominated,
    Dominant,
    Undefined,
}

impl Icer {
    pub fn value(&self) -> Option<f64> {
        match self {
            Icer::Ratio { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl fmt::Display for Icer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Icer::Ratio { value, .. } => write!(f, "{value}"),
            Icer::Dominated => f.write_str("Dominated"),
            Icer::Dominant => f.write_str("Dominant"),
            Icer::Undefined => f.write_str("Undefined"),
        }
    }
}

fn incremental_ratio(delta_cost: f64, delta_effect: f64) -> Icer {
    if delta_effect == 0.0 || !delta_cost.is_finite() || !delta_effect.is_finite() {
        return Icer::Undefined;
    }
    match (delta_cost, delta_effect) {
        (c, e) if c >= 0.0 && e < 0.0 => Icer::Dominated,
        (c, e) if c <= 0.0 && e > 0.0 => Icer::Dominant,
        (c, e) if c > 0.0 => Icer::Ratio {
            value: c / e,
            quadrant: Quadrant::NorthEast,
        },
        (c, e) => Icer::Ratio {
            value: c / e,
            quadrant: Quadrant::SouthWest,
        },
    }
}

/// Incremental cost per QALY gained.
pub fn icer(delta_cost: f64, delta_qalys: f64) -> Icer {
    incremental_ratio(delta_cost, delta_qalys)
}

/// Incremental cost per blindness-free year gained.
pub fn cost_per_blindness_year_averted(delta_cost: f64, delta_blindness_free_years: f64) -> Icer {
    incremental_ratio(delta_cost, delta_blindness_free_years)
}

/// Net monetary benefit: `wtp * ΔQALY - Δcost`.
pub fn nmb(delta_cost: f64, delta_qalys: f64, wtp: f64) -> f64 {
    wtp * delta_qalys - delta_cost
}

/// Willingness-to-pay at which two options have equal NMB. `None` when the
/// NMB lines are parallel.
pub fn nmb_crossing(cost_a: f64, qalys_a: f64, cost_b: f64, qalys_b: f64) -> Option<f64> {
    let dq = qalys_a - qalys_b;
    (dq != 0.0).then(|| (cost_a - cost_b) / dq)
}

/// WTP benchmarks at one and three times per-capita GDP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WtpPolicy {
    pub gdp_per_capita: f64,
}

impl Default for WtpPolicy {
    fn default() -> Self {
        WtpPolicy {
            gdp_per_capita: 12_684.0,
        }
    }
}

impl WtpPolicy {
    pub fn lower(&self) -> f64 {
        self.gdp_per_capita
    }

    pub fn upper(&self) -> f64 {
        3.0 * self.gdp_per_capita
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CeClass {
    VeryCostEffective,
    CostEffective,
    NotCostEffective,
    Dominated,
    Dominant,
    /// No difference in cost or effect, e.g. a scenario against itself.
    Undefined,
}

impl CeClass {
    pub fn label(self) -> &'static str {
        match self {
            CeClass::VeryCostEffective => "very cost-effective",
            CeClass::CostEffective => "cost-effective",
            CeClass::NotCostEffective => "not cost-effective",
            CeClass::Dominated => "dominated",
            CeClass::Dominant => "dominant",
            CeClass::Undefined => "undefined",
        }
    }
}

impl fmt::Display for CeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Buckets a ratio against the 1x and 3x GDP thresholds.
///
/// North-east ratios are cost per QALY gained: below 1x is very
/// cost-effective, up to 3x cost-effective, above 3x not. South-west ratios
/// are savings per QALY forgone and are acceptable only when the savings
/// exceed the threshold: above 3x very cost-effective, above 1x
/// cost-effective, otherwise not.
pub fn classify(icer: Icer, policy: &WtpPolicy) -> CeClass {
    match icer {
        Icer::Dominated => CeClass::Dominated,
        Icer::Dominant => CeClass::Dominant,
        Icer::Undefined => CeClass::Undefined,
        Icer::Ratio {
            value,
            quadrant: Quadrant::NorthEast,
        } => {
            if value < policy.lower() {
                CeClass::VeryCostEffective
            } else if value <= policy.upper() {
                CeClass::CostEffective
            } else {
                CeClass::NotCostEffective
            }
        }
        Icer::Ratio {
            value,
            quadrant: Quadrant::SouthWest,
        } => {
            if value > policy.upper() {
                CeClass::VeryCostEffective
            } else if value > policy.lower() {
                CeClass::CostEffective
            } else {
                CeClass::NotCostEffective
            }
        }
    }
}

/// Dominance class from raw deltas: dominated when no cheaper and no more
/// effective, dominant when no costlier and no less effective (not both zero).
pub fn dominance(delta_cost: f64, delta_qalys: f64) -> Option<CeClass> {
    if delta_cost == 0.0 && delta_qalys == 0.0 {
        return Some(CeClass::Undefined);
    }
    if delta_cost >= 0.0 && delta_qalys <= 0.0 {
        Some(CeClass::Dominated)
    } else if delta_cost <= 0.0 && delta_qalys >= 0.0 {
        Some(CeClass::Dominant)
    } else {
        None
    }
}

/// Incremental economics of one scenario against its comparator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeaRecord {
    pub scenario_id: String,
    pub comparator_id: String,
    pub delta_cost: f64,
    pub delta_qalys: f64,
    pub delta_blindness_free_years: f64,
    pub icer: Icer,
    pub cost_per_blindness_year_averted: Icer,
    /// NMB at 1x GDP.
    pub nmb_lower: f64,
    /// NMB at 3x GDP.
    pub nmb_upper: f64,
    pub ce_class: CeClass,
}

impl CeaRecord {
    pub fn from_deltas(
        scenario_id: &str,
        comparator_id: &str,
        delta_cost: f64,
        delta_qalys: f64,
        delta_blindness_free_years: f64,
        policy: &WtpPolicy,
    ) -> Self {
        let ratio = icer(delta_cost, delta_qalys);
        let ce_class = dominance(delta_cost, delta_qalys).unwrap_or_else(|| classify(ratio, policy));
        CeaRecord {
            scenario_id: scenario_id.to_string(),
            comparator_id: comparator_id.to_string(),
            delta_cost,
            delta_qalys,
            delta_blindness_free_years,
            icer: ratio,
            cost_per_blindness_year_averted: cost_per_blindness_year_averted(delta_cost, delta_blindness_free_years),
            nmb_lower: nmb(delta_cost, delta_qalys, policy.lower()),
            nmb_upper: nmb(delta_cost, delta_qalys, policy.upper()),
            ce_class,
        }
    }

    pub fn compare(
        scenario_id: &str,
        scenario: &ScenarioResult,
        comparator_id: &str,
        comparator: &ScenarioResult,
        policy: &WtpPolicy,
    ) -> Self {
        CeaRecord::from_deltas(
            scenario_id,
            comparator_id,
            scenario.total_cost - comparator.total_cost,
            scenario.qalys - comparator.qalys,
            scenario.blindness_free_years - comparator.blindness_free_years,
            policy,
        )
    }
}
