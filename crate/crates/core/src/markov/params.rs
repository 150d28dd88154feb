use std::fmt;

use serde::{Deserialize, Serialize};

use super::MarkovError;

/// Health states of the DR cohort model. The two `Vtdr*` states together
/// form the single VTDR state used for reporting; they are split so that
/// screening and treatment uptake can act on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthState {
    NonVtdr,
    VtdrUndetected,
    VtdrDetectedUntreated,
    TreatedDr,
    Blind,
    Dead,
}

impl HealthState {
    pub const ALL: [HealthState; 6] = [
        HealthState::NonVtdr,
        HealthState::VtdrUndetected,
        HealthState::VtdrDetectedUntreated,
        HealthState::TreatedDr,
        HealthState::Blind,
        HealthState::Dead,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            HealthState::NonVtdr => "non_vtdr",
            HealthState::VtdrUndetected => "vtdr_undetected",
            HealthState::VtdrDetectedUntreated => "vtdr_detected_untreated",
            HealthState::TreatedDr => "treated_dr",
            HealthState::Blind => "blind",
            HealthState::Dead => "dead",
        }
    }

    pub fn is_alive(self) -> bool {
        self != HealthState::Dead
    }
}

impl fmt::Display for HealthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Occupancy (persons) indexed by [`HealthState::index`].
pub type StateVector = [f64; 6];

/// A per-state quantity where both VTDR sub-states share one value. Dead is
/// implicit (zero utility, no further transitions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateValues {
    pub non_vtdr: f64,
    pub vtdr: f64,
    pub treated_dr: f64,
    pub blind: f64,
}

impl StateValues {
    pub const fn uniform(v: f64) -> Self {
        StateValues {
            non_vtdr: v,
            vtdr: v,
            treated_dr: v,
            blind: v,
        }
    }

    pub fn get(&self, state: HealthState) -> f64 {
        match state {
            HealthState::NonVtdr => self.non_vtdr,
            HealthState::VtdrUndetected | HealthState::VtdrDetectedUntreated => self.vtdr,
            HealthState::TreatedDr => self.treated_dr,
            HealthState::Blind => self.blind,
            HealthState::Dead => 0.0,
        }
    }

    pub const NAMES: [&'static str; 4] = ["non_vtdr", "vtdr", "treated_dr", "blind"];

    pub fn named(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.field_mut(name).map(|v| *v)
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        match name {
            "non_vtdr" => Some(&mut self.non_vtdr),
            "vtdr" => Some(&mut self.vtdr),
            "treated_dr" => Some(&mut self.treated_dr),
            "blind" => Some(&mut self.blind),
            _ => None,
        }
    }
}

/// Annual NonVTDR -> VTDR probability from `from_age` until the next band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnsetBand {
    pub from_age: u32,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transitions {
    /// Age-banded onset probabilities, sorted by `from_age`.
    pub onset: Vec<OnsetBand>,
    pub p_blind_untreated: f64,
    pub p_blind_treated: f64,
    #[serde(default)]
    pub p_regress: f64,
    /// Probability a detected VTDR case receives treatment.
    pub treatment_uptake: f64,
    /// Multipliers on life-table mortality per state.
    #[serde(default = "unit_multipliers")]
    pub mortality_multiplier: StateValues,
}

fn unit_multipliers() -> StateValues {
    StateValues::uniform(1.0)
}

impl Transitions {
    pub fn onset_at(&self, age: u32) -> f64 {
        self.onset
            .iter()
            .take_while(|b| b.from_age <= age)
            .last()
            .map_or(0.0, |b| b.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    /// Per referred case, true or false positive.
    pub referral: f64,
    /// One-off, at treatment start.
    pub treatment_initial: f64,
    /// Per person-year in TreatedDR.
    pub treatment_annual: f64,
    /// One-off, in the year blindness begins.
    pub blindness_initial: f64,
    /// Per person-year blind.
    pub blindness_annual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discounting {
    pub cost_rate: f64,
    pub effect_rate: f64,
    #[serde(default)]
    pub half_cycle_correction: bool,
}

impl Default for Discounting {
    fn default() -> Self {
        Discounting {
            cost_rate: 0.03,
            effect_rate: 0.03,
            half_cycle_correction: false,
        }
    }
}

/// Initial distribution over alive states (fractions summing to 1). VTDR
/// starts undetected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialMix {
    pub non_vtdr: f64,
    pub vtdr: f64,
    #[serde(default)]
    pub treated_dr: f64,
    #[serde(default)]
    pub blind: f64,
}

impl InitialMix {
    pub fn as_vector(&self) -> StateVector {
        [self.non_vtdr, self.vtdr, 0.0, self.treated_dr, self.blind, 0.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub age_min: u32,
    pub age_max: u32,
    /// Age at which every remaining individual exits the model.
    pub life_expectancy: u32,
    /// Relative weight of each one-year age band from `age_min` to
    /// `age_max`; uniform when absent.
    #[serde(default)]
    pub age_weights: Option<Vec<f64>>,
    pub initial_state: InitialMix,
    /// VTDR prevalence among screened cases, used to weight the expected
    /// per-case grading cost.
    pub screening_prevalence: f64,
}

impl CohortSpec {
    pub fn ages(&self) -> std::ops::RangeInclusive<u32> {
        self.age_min..=self.age_max
    }

    /// Fraction of the cohort in each age band, in age order.
    pub fn age_fractions(&self) -> Vec<f64> {
        let n = (self.age_max - self.age_min + 1) as usize;
        match &self.age_weights {
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            }
            None => vec![1.0 / n as f64; n],
        }
    }
}

/// Annual mortality probability by single year of age.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeTable {
    rows: Vec<(u32, f64)>,
}

impl LifeTable {
    pub fn new(mut rows: Vec<(u32, f64)>) -> Result<Self, MarkovError> {
        if rows.is_empty() {
            return Err(MarkovError::invalid("life_table", "no rows"));
        }
        rows.sort_by_key(|r| r.0);
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MarkovError::invalid(
                    "life_table",
                    format!("age {} listed twice", w[0].0),
                ));
            }
        }
        for &(age, q) in &rows {
            if !(q.is_finite() && (0.0..=1.0).contains(&q)) {
                return Err(MarkovError::invalid(
                    "life_table",
                    format!("mortality {q} at age {age} is not a probability"),
                ));
            }
        }
        Ok(LifeTable { rows })
    }

    /// Same probability at every age.
    pub fn constant(q: f64) -> Self {
        LifeTable { rows: vec![(0, q)] }
    }

    /// Mortality at `age`, carrying the nearest lower tabulated age forward.
    pub fn mortality(&self, age: u32) -> f64 {
        let i = self.rows.partition_point(|r| r.0 <= age);
        self.rows[i.saturating_sub(1)].1
    }

    pub fn rows(&self) -> &[(u32, f64)] {
        &self.rows
    }

    pub fn first_age(&self) -> u32 {
        self.rows[0].0
    }
}

/// Everything the cohort model needs apart from the strategy and schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovParameters {
    pub transitions: Transitions,
    pub utilities: StateValues,
    pub costs: Costs,
    pub discounting: Discounting,
    pub cohort: CohortSpec,
    pub life_table: LifeTable,
}

fn probability(path: &str, v: f64) -> Result<(), MarkovError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(MarkovError::invalid(
            path,
            format!("{v} is not a probability in [0, 1]"),
        ))
    }
}

fn non_negative(path: &str, v: f64) -> Result<(), MarkovError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(MarkovError::invalid(path, format!("{v} must be non-negative")))
    }
}

impl MarkovParameters {
    /// Checks every domain invariant, naming the offending parameter path.
    pub fn validate(&self) -> Result<(), MarkovError> {
        let t = &self.transitions;
        if t.onset.is_empty() {
            return Err(MarkovError::invalid(
                "transitions.onset",
                "at least one band is required",
            ));
        }
        for (i, band) in t.onset.iter().enumerate() {
            probability(&format!("transitions.onset.{i}.p"), band.p)?;
            if i > 0 && band.from_age <= t.onset[i - 1].from_age {
                return Err(MarkovError::invalid(
                    &format!("transitions.onset.{i}.from_age"),
                    "bands must be sorted by strictly increasing from_age",
                ));
            }
        }
        if t.onset[0].from_age > self.cohort.age_min {
            return Err(MarkovError::invalid(
                "transitions.onset.0.from_age",
                format!("first band must start at or below age_min {}", self.cohort.age_min),
            ));
        }
        probability("transitions.p_blind_untreated", t.p_blind_untreated)?;
        probability("transitions.p_blind_treated", t.p_blind_treated)?;
        probability("transitions.p_regress", t.p_regress)?;
        probability("transitions.treatment_uptake", t.treatment_uptake)?;
        for name in StateValues::NAMES {
            let m = t.mortality_multiplier.named(name).unwrap_or_default();
            non_negative(&format!("transitions.mortality_multiplier.{name}"), m)?;
        }

        let u = &self.utilities;
        for name in StateValues::NAMES {
            probability(&format!("utilities.{name}"), u.named(name).unwrap_or_default())?;
        }
        if !(u.blind <= u.treated_dr && u.treated_dr <= u.non_vtdr) {
            return Err(MarkovError::invalid(
                "utilities",
                "expected blind <= treated_dr <= non_vtdr",
            ));
        }

        let c = &self.costs;
        non_negative("costs.referral", c.referral)?;
        non_negative("costs.treatment_initial", c.treatment_initial)?;
        non_negative("costs.treatment_annual", c.treatment_annual)?;
        non_negative("costs.blindness_initial", c.blindness_initial)?;
        non_negative("costs.blindness_annual", c.blindness_annual)?;

        non_negative("discounting.cost_rate", self.discounting.cost_rate)?;
        non_negative("discounting.effect_rate", self.discounting.effect_rate)?;

        let co = &self.cohort;
        if co.age_min > co.age_max {
            return Err(MarkovError::invalid("cohort.age_min", "age_min exceeds age_max"));
        }
        if co.life_expectancy <= co.age_max {
            return Err(MarkovError::invalid(
                "cohort.life_expectancy",
                "life expectancy must exceed age_max",
            ));
        }
        if let Some(w) = &co.age_weights {
            let n = (co.age_max - co.age_min + 1) as usize;
            if w.len() != n {
                return Err(MarkovError::invalid(
                    "cohort.age_weights",
                    format!("expected {n} weights, found {}", w.len()),
                ));
            }
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(MarkovError::invalid(
                    "cohort.age_weights",
                    "weights must be non-negative with a positive sum",
                ));
            }
        }
        let mix = &co.initial_state;
        for (name, v) in [
            ("non_vtdr", mix.non_vtdr),
            ("vtdr", mix.vtdr),
            ("treated_dr", mix.treated_dr),
            ("blind", mix.blind),
        ] {
            probability(&format!("cohort.initial_state.{name}"), v)?;
        }
        let total = mix.non_vtdr + mix.vtdr + mix.treated_dr + mix.blind;
        if (total - 1.0).abs() > 1e-9 {
            return Err(MarkovError::invalid(
                "cohort.initial_state",
                format!("fractions sum to {total}, expected 1"),
            ));
        }
        if !(co.screening_prevalence > 0.0 && co.screening_prevalence < 1.0) {
            return Err(MarkovError::invalid(
                "cohort.screening_prevalence",
                "must lie strictly between 0 and 1",
            ));
        }
        if self.life_table.first_age() > co.age_min {
            return Err(MarkovError::invalid(
                "life_table",
                format!(
                    "table starts at age {}, after age_min {}",
                    self.life_table.first_age(),
                    co.age_min
                ),
            ));
        }
        self.check_rows()
    }

    /// Verifies that every annual transition row, after adding mortality,
    /// sums to at most one for each age the model visits.
    pub fn check_rows(&self) -> Result<(), MarkovError> {
        for age in self.cohort.age_min..self.cohort.life_expectancy {
            for state in HealthState::ALL {
                let sum: f64 = self.outflows(state, age).map(|(_, p)| p).sum();
                if sum > 1.0 + 1e-12 {
                    return Err(MarkovError::RowSum { state, age, sum });
                }
            }
        }
        Ok(())
    }

    /// Annual outflow probabilities from `state` at `age`, including death.
    /// The remainder is the probability of staying.
    pub fn outflows(&self, state: HealthState, age: u32) -> impl Iterator<Item = (HealthState, f64)> {
        let t = &self.transitions;
        let mut out = [(HealthState::Dead, 0.0); 3];
        let n = match state {
            HealthState::Dead => 0,
            HealthState::NonVtdr => {
                out[1] = (HealthState::VtdrUndetected, t.onset_at(age));
                2
            }
            HealthState::VtdrUndetected | HealthState::VtdrDetectedUntreated => {
                out[1] = (HealthState::Blind, t.p_blind_untreated);
                out[2] = (HealthState::NonVtdr, t.p_regress);
                3
            }
            HealthState::TreatedDr => {
                out[1] = (HealthState::Blind, t.p_blind_treated);
                2
            }
            HealthState::Blind => 1,
        };
        if n > 0 {
            out[0].1 = self.life_table.mortality(age) * t.mortality_multiplier.get(state);
        }
        out.into_iter().take(n)
    }
}
