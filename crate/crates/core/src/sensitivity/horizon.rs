use serde::{Deserialize, Serialize};

use crate::cea::{CeaRecord, Icer, Quadrant};
use crate::markov::{Horizon, Perspective, ScenarioResult};
use crate::model::{Cell, Model};

use super::SensitivityError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonRow {
    pub horizon: u32,
    pub record: CeaRecord,
}

/// Shortest horizon from which a strategy stays at or under a WTP threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonCrossing {
    pub strategy: String,
    pub threshold: f64,
    /// `None` when the strategy never settles under the threshold.
    pub from_horizon: Option<u32>,
}

fn evaluate_at(model: &Model, cell: &Cell, id: &str, years: u32) -> Result<ScenarioResult, SensitivityError> {
    if years == 0 {
        // Nothing happens in a zero-year window.
        return Ok(ScenarioResult {
            perspective: cell.perspective,
            ..ScenarioResult::default()
        });
    }
    Ok(cell.with_horizon(Horizon::Years(years)).evaluate(model, id)?)
}

/// Reruns every non-comparator strategy against the status quo at each
/// horizon in `years`.
pub fn horizon_sweep(model: &Model, cell: &Cell, years: &[u32]) -> Result<Vec<HorizonRow>, SensitivityError> {
    let mut rows = Vec::new();
    for &h in years {
        let base = evaluate_at(model, cell, &model.status_quo, h)?;
        for s in model.strategies.iter().filter(|s| s.id != model.status_quo) {
            let r = evaluate_at(model, cell, &s.id, h)?;
            rows.push(HorizonRow {
                horizon: h,
                record: CeaRecord::compare(
                    &cell.scenario_id(&s.id),
                    &r,
                    &cell.scenario_id(&model.status_quo),
                    &base,
                    &model.wtp,
                ),
            });
        }
    }
    Ok(rows)
}

fn acceptable(icer: Icer, threshold: f64) -> bool {
    match icer {
        Icer::Dominant => true,
        Icer::Ratio {
            value,
            quadrant: Quadrant::NorthEast,
        } => value <= threshold,
        _ => false,
    }
}

/// Horizon band where `strategy` becomes and stays acceptable at
/// `threshold`, given sweep rows for ascending horizons.
pub fn crossing(rows: &[HorizonRow], strategy_scenario: &str, threshold: f64) -> HorizonCrossing {
    let mut series: Vec<(u32, Icer)> = rows
        .iter()
        .filter(|r| r.record.scenario_id == strategy_scenario)
        .map(|r| (r.horizon, r.record.icer))
        .collect();
    series.sort_by_key(|s| s.0);
    let mut from = None;
    for (h, icer) in series.iter().rev() {
        if acceptable(*icer, threshold) {
            from = Some(*h);
        } else {
            break;
        }
    }
    HorizonCrossing {
        strategy: strategy_scenario.to_string(),
        threshold,
        from_horizon: from,
    }
}

/// Sweep years used by default: 5 through 30.
pub fn default_years() -> Vec<u32> {
    (5..=30).collect()
}

pub fn provider_cell(cell: &Cell) -> Cell {
    cell.with_perspective(Perspective::Provider)
}
