//! Expected-value cohort propagation through the DR Markov model.
//!
//! Each yearly cycle runs screen -> treat -> progress -> die, in that order.
//! The cohort is stratified into one-year age bands that age together; a
//! band reaching the cohort's life expectancy leaves for Dead at the end of
//! that cycle.

use serde::{Deserialize, Serialize};

use crate::strategy::DiagnosticPerformance;

use super::{HealthState, Horizon, MarkovError, MarkovParameters, Perspective, ScenarioSpec, StateVector};

/// Discounted present value: `value * (1 + rate)^(-year)`.
pub fn discount(value: f64, year: u32, rate: f64) -> f64 {
    value * (1.0 + rate).powi(-(year as i32))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub screening: f64,
    pub referral: f64,
    pub treatment: f64,
    pub blindness: f64,
}

impl CostBreakdown {
    pub fn total(&self, perspective: Perspective) -> f64 {
        let base = self.screening + self.referral + self.treatment;
        match perspective {
            Perspective::Societal => base + self.blindness,
            Perspective::Provider => base,
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        CostBreakdown {
            screening: self.screening * factor,
            referral: self.referral * factor,
            treatment: self.treatment * factor,
            blindness: self.blindness * factor,
        }
    }

    fn add(&mut self, other: &CostBreakdown) {
        self.screening += other.screening;
        self.referral += other.referral;
        self.treatment += other.treatment;
        self.blindness += other.blindness;
    }
}

/// Running totals. Costs and effects are discounted; counts are not.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulators {
    pub cost_undiscounted: CostBreakdown,
    pub cost: CostBreakdown,
    pub qalys: f64,
    /// Discounted person-years alive and not blind.
    pub blindness_free_years: f64,
    /// Incident entries into Blind.
    pub blindness_cases: f64,
    /// True-positive screening events.
    pub detected_vtdr: f64,
    pub treated_vtdr: f64,
}

impl Accumulators {
    fn add(&mut self, other: &Accumulators) {
        self.cost_undiscounted.add(&other.cost_undiscounted);
        self.cost.add(&other.cost);
        self.qalys += other.qalys;
        self.blindness_free_years += other.blindness_free_years;
        self.blindness_cases += other.blindness_cases;
        self.detected_vtdr += other.detected_vtdr;
        self.treated_vtdr += other.treated_vtdr;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u32,
    /// Occupancy at the end of the cycle.
    pub occupancy: StateVector,
    /// What this cycle contributed.
    pub flow: Accumulators,
    /// Totals through the end of this cycle.
    pub cumulative: Accumulators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortTrace {
    pub cohort_size: f64,
    pub initial_occupancy: StateVector,
    pub cycles: Vec<CycleRecord>,
}

impl CohortTrace {
    /// A trace with no cycles (zero horizon).
    pub fn empty(cohort_size: f64, initial_occupancy: StateVector) -> Self {
        CohortTrace {
            cohort_size,
            initial_occupancy,
            cycles: Vec::new(),
        }
    }

    pub fn totals(&self) -> Accumulators {
        self.cycles.last().map(|c| c.cumulative).unwrap_or_default()
    }
}

/// Scenario-level totals under a costing perspective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub perspective: Perspective,
    pub total_cost: f64,
    /// Discounted costs by category; blindness is zero under the provider view.
    pub costs: CostBreakdown,
    pub qalys: f64,
    pub blindness_free_years: f64,
    pub blindness_cases: f64,
    pub detected_vtdr: f64,
    pub treated_vtdr: f64,
}

pub fn aggregate_scenario(trace: &CohortTrace, perspective: Perspective) -> ScenarioResult {
    let t = trace.totals();
    let mut costs = t.cost;
    if perspective == Perspective::Provider {
        costs.blindness = 0.0;
    }
    ScenarioResult {
        perspective,
        total_cost: t.cost.total(perspective),
        costs,
        qalys: t.qalys,
        blindness_free_years: t.blindness_free_years,
        blindness_cases: t.blindness_cases,
        detected_vtdr: t.detected_vtdr,
        treated_vtdr: t.treated_vtdr,
    }
}

const NV: usize = HealthState::NonVtdr.index();
const VU: usize = HealthState::VtdrUndetected.index();
const VD: usize = HealthState::VtdrDetectedUntreated.index();
const TR: usize = HealthState::TreatedDr.index();
const BL: usize = HealthState::Blind.index();
const DE: usize = HealthState::Dead.index();

/// Number of yearly cycles a scenario runs.
pub fn cycle_count(horizon: Horizon, params: &MarkovParameters) -> u32 {
    match horizon {
        Horizon::LifeExpectancy => params.cohort.life_expectancy - params.cohort.age_min,
        Horizon::Years(n) => n,
    }
}

/// Initial occupancy per age band, in age order.
pub fn initial_bands(params: &MarkovParameters, cohort_size: f64) -> Vec<(u32, StateVector)> {
    let mix = params.cohort.initial_state.as_vector();
    params
        .cohort
        .ages()
        .zip(params.cohort.age_fractions())
        .map(|(age, frac)| (age, mix.map(|m| m * frac * cohort_size)))
        .collect()
}

/// Propagates a closed cohort through the scenario's horizon.
pub fn run_cohort(
    scenario: &ScenarioSpec,
    params: &MarkovParameters,
    perf: &DiagnosticPerformance,
) -> Result<CohortTrace, MarkovError> {
    let bands = initial_bands(params, scenario.cohort_size);
    run_cohort_from(scenario, params, perf, bands)
}

/// As [`run_cohort`], starting from explicit per-age occupancy.
pub fn run_cohort_from(
    scenario: &ScenarioSpec,
    params: &MarkovParameters,
    perf: &DiagnosticPerformance,
    mut bands: Vec<(u32, StateVector)>,
) -> Result<CohortTrace, MarkovError> {
    if !(scenario.cohort_size.is_finite() && scenario.cohort_size > 0.0) {
        return Err(MarkovError::invalid("cohort.size", "cohort size must be positive"));
    }
    let cycles = cycle_count(scenario.horizon, params);
    if cycles == 0 {
        return Err(MarkovError::Horizon);
    }
    params.check_rows()?;

    let costs = &params.costs;
    let disc = &params.discounting;
    let uptake = params.transitions.treatment_uptake;
    let life_expectancy = params.cohort.life_expectancy;
    let initial_occupancy = sum_bands(&bands);

    let mut trace = CohortTrace::empty(scenario.cohort_size, initial_occupancy);
    let mut cumulative = Accumulators::default();

    for t in 0..cycles {
        let screening_year = scenario.frequency.screens_at(t);
        let mut raw = Accumulators::default();
        let mut qaly_raw = 0.0;
        let mut bfy_raw = 0.0;

        for (age0, occ) in bands.iter_mut() {
            let age = *age0 + t;
            if age >= life_expectancy {
                continue;
            }

            if screening_year && scenario.age_group.contains(age) {
                let screened = occ[NV] + occ[VU] + occ[VD];
                let tp_undetected = occ[VU] * perf.sensitivity;
                let tp_untreated = occ[VD] * perf.sensitivity;
                let true_positive = tp_undetected + tp_untreated;
                let false_positive = occ[NV] * (1.0 - perf.specificity);
                let treated = true_positive * uptake;

                occ[VU] -= tp_undetected;
                occ[VD] += tp_undetected * (1.0 - uptake) - tp_untreated * uptake;
                occ[TR] += treated;

                raw.cost_undiscounted.screening += screened * perf.expected_cost_per_case;
                raw.cost_undiscounted.referral += (true_positive + false_positive) * costs.referral;
                raw.cost_undiscounted.treatment += treated * costs.treatment_initial;
                raw.detected_vtdr += true_positive;
                raw.treated_vtdr += treated;
            }

            let start = *occ;
            raw.cost_undiscounted.treatment += start[TR] * costs.treatment_annual;
            raw.cost_undiscounted.blindness += start[BL] * costs.blindness_annual;

            let (next, incident_blind) = progress(params, age, &start);
            raw.blindness_cases += incident_blind;
            raw.cost_undiscounted.blindness += incident_blind * costs.blindness_initial;

            let mut end = next;
            if age + 1 >= life_expectancy {
                let alive: f64 = end[..DE].iter().sum();
                end = [0.0; 6];
                end[DE] = alive + next[DE];
            }

            let (q, b) = effects(params, &start);
            if disc.half_cycle_correction {
                let (q_end, b_end) = effects(params, &end);
                qaly_raw += 0.5 * (q + q_end);
                bfy_raw += 0.5 * (b + b_end);
            } else {
                qaly_raw += q;
                bfy_raw += b;
            }
            *occ = end;
        }

        raw.qalys = discount(qaly_raw, t, disc.effect_rate);
        raw.blindness_free_years = discount(bfy_raw, t, disc.effect_rate);
        raw.cost = raw.cost_undiscounted.scaled(discount(1.0, t, disc.cost_rate));
        cumulative.add(&raw);
        trace.cycles.push(CycleRecord {
            cycle: t,
            occupancy: sum_bands(&bands),
            flow: raw,
            cumulative,
        });
    }
    Ok(trace)
}

/// QALYs and blindness-free years lived by `occ` over one year, undiscounted.
fn effects(params: &MarkovParameters, occ: &StateVector) -> (f64, f64) {
    let q = HealthState::ALL
        .iter()
        .map(|s| occ[s.index()] * params.utilities.get(*s))
        .sum();
    let b = occ[NV] + occ[VU] + occ[VD] + occ[TR];
    (q, b)
}

/// Natural history for one age band. Returns the new occupancy and the
/// number of incident blindness cases.
fn progress(params: &MarkovParameters, age: u32, occ: &StateVector) -> (StateVector, f64) {
    let mut next = [0.0; 6];
    next[DE] = occ[DE];
    let mut incident_blind = 0.0;
    for state in HealthState::ALL.into_iter().filter(|s| s.is_alive()) {
        let mass = occ[state.index()];
        let mut stay = mass;
        for (to, p) in params.outflows(state, age) {
            let moved = mass * p;
            stay -= moved;
            next[to.index()] += moved;
            if to == HealthState::Blind {
                incident_blind += moved;
            }
        }
        next[state.index()] += stay;
    }
    (next, incident_blind)
}

fn sum_bands(bands: &[(u32, StateVector)]) -> StateVector {
    let mut total = [0.0; 6];
    for (_, occ) in bands {
        for (t, v) in total.iter_mut().zip(occ) {
            *t += v;
        }
    }
    total
}
