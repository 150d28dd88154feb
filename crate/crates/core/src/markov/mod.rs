//! Five-state diabetic-retinopathy Markov cohort model with periodic
//! screening.

mod cohort;
mod params;
mod scenario;

use thiserror::Error;

pub use cohort::{
    aggregate_scenario, cycle_count, discount, initial_bands, run_cohort, run_cohort_from, Accumulators, CohortTrace,
    CostBreakdown, CycleRecord, ScenarioResult,
};
pub use params::{
    CohortSpec, Costs, Discounting, HealthState, InitialMix, LifeTable, MarkovParameters, OnsetBand, StateValues,
    StateVector, Transitions,
};
pub use scenario::{scenario_id, AgeGroup, Frequency, Horizon, Perspective, ScenarioSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("invalid parameter {path}: {message}")]
    InvalidParameter { path: String, message: String },
    #[error("transition probabilities out of {state} at age {age} sum to {sum} > 1")]
    RowSum { state: HealthState, age: u32, sum: f64 },
    #[error("horizon must be at least one cycle")]
    Horizon,
}

impl MarkovError {
    pub(crate) fn invalid(path: &str, message: impl Into<String>) -> Self {
        MarkovError::InvalidParameter {
            path: path.to_string(),
            message: message.into(),
        }
    }
}
