//! The strategy x frequency x age-group scenario grid.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cea::{frontier, CeaRecord, Frontier, FrontierPoint};
use crate::markov::{AgeGroup, Frequency, Horizon, Perspective, ScenarioResult};
use crate::model::{Cell, Model, ModelError};
use crate::sensitivity::{worker_pool, SensitivityError};

/// Analyses a run can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    StrategyPerformance,
    Grid,
    Frontier,
    Tornado,
    Threshold,
    Psa,
    Ceac,
    HorizonSweep,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::StrategyPerformance => "strategy-performance",
            Analysis::Grid => "grid",
            Analysis::Frontier => "frontier",
            Analysis::Tornado => "tornado",
            Analysis::Threshold => "threshold",
            Analysis::Psa => "psa",
            Analysis::Ceac => "ceac",
            Analysis::HorizonSweep => "horizon-sweep",
        }
    }
}

/// Which scenarios to run. Empty strategy selection means all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub strategies: Vec<String>,
    pub frequencies: Vec<Frequency>,
    pub age_groups: Vec<AgeGroup>,
    pub horizon: Horizon,
    pub perspective: Perspective,
}

impl Default for Selection {
    fn default() -> Self {
        Selection {
            strategies: Vec::new(),
            frequencies: Frequency::ALL.to_vec(),
            age_groups: AgeGroup::all().to_vec(),
            horizon: Horizon::LifeExpectancy,
            perspective: Perspective::Societal,
        }
    }
}

impl Selection {
    pub fn strategy_ids(&self, model: &Model) -> Result<Vec<String>, ModelError> {
        if self.strategies.is_empty() {
            return Ok(model.strategy_ids());
        }
        for id in &self.strategies {
            model.strategy(id)?;
        }
        // Keep configuration order.
        Ok(model
            .strategies
            .iter()
            .filter(|s| self.strategies.contains(&s.id))
            .map(|s| s.id.clone())
            .collect())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &age_group in &self.age_groups {
            for &frequency in &self.frequencies {
                out.push(Cell {
                    frequency,
                    age_group,
                    horizon: self.horizon,
                    perspective: self.perspective,
                });
            }
        }
        out
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_paths: Vec<PathBuf>,
    pub selection: Selection,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    pub analyses: BTreeSet<Analysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub scenario_id: String,
    pub strategy: String,
    pub cell: Cell,
    /// A failed scenario keeps its row with the error message.
    pub outcome: Result<(ScenarioResult, CeaRecord), String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
}

impl GridResult {
    pub fn row(&self, scenario_id: &str) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.scenario_id == scenario_id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &GridRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

/// Evaluates every selected scenario and compares each with the status quo
/// in its own cell. The comparator is evaluated even when not selected.
pub fn run_grid(model: &Model, selection: &Selection, workers: Option<usize>) -> Result<GridResult, SensitivityError> {
    let strategies = selection.strategy_ids(model)?;
    let cells = selection.cells();

    let mut jobs: Vec<(Cell, String)> = Vec::new();
    for cell in &cells {
        for id in &strategies {
            jobs.push((*cell, id.clone()));
        }
        if !strategies.contains(&model.status_quo) {
            jobs.push((*cell, model.status_quo.clone()));
        }
    }

    let pool = worker_pool(workers)?;
    let results: Vec<Result<ScenarioResult, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|(cell, id)| cell.evaluate(model, id).map_err(|e| e.to_string()))
            .collect()
    });
    let lookup = |cell: &Cell, id: &str| jobs.iter().position(|(c, s)| c == cell && s == id).map(|i| &results[i]);

    let mut rows = Vec::with_capacity(cells.len() * strategies.len());
    for cell in &cells {
        let comparator_id = cell.scenario_id(&model.status_quo);
        let base = lookup(cell, &model.status_quo).expect("comparator is always scheduled");
        for id in &strategies {
            let scenario_id = cell.scenario_id(id);
            let own = lookup(cell, id).expect("every selected scenario is scheduled");
            let outcome = match (own, base) {
                (Ok(r), Ok(b)) => Ok((*r, CeaRecord::compare(&scenario_id, r, &comparator_id, b, &model.wtp))),
                (Err(e), _) => Err(e.clone()),
                (Ok(_), Err(e)) => Err(format!("comparator {comparator_id} failed: {e}")),
            };
            rows.push(GridRow {
                scenario_id,
                strategy: id.clone(),
                cell: *cell,
                outcome,
            });
        }
    }
    Ok(GridResult { rows })
}

/// A frontier over one view of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierView {
    /// Cell label such as `annual|20-79`, or `pooled`.
    pub view: String,
    pub frontier: Frontier,
}

fn points<'a>(rows: impl Iterator<Item = &'a GridRow>) -> Vec<FrontierPoint> {
    rows.filter_map(|r| {
        r.outcome
            .as_ref()
            .ok()
            .map(|(s, _)| FrontierPoint::new(r.scenario_id.clone(), s.total_cost, s.qalys))
    })
    .collect()
}

/// Frontiers for each cell and for all scenarios pooled. Views with fewer
/// than two successful scenarios are skipped.
pub fn grid_frontiers(grid: &GridResult, cells: &[Cell], extended: bool) -> Vec<FrontierView> {
    let mut out = Vec::new();
    for cell in cells {
        let pts = points(grid.rows.iter().filter(|r| r.cell == *cell));
        if let Ok(f) = frontier(&pts, extended) {
            out.push(FrontierView {
                view: format!("{}|{}", cell.frequency, cell.age_group),
                frontier: f,
            });
        }
    }
    if cells.len() > 1 {
        if let Ok(f) = frontier(&points(grid.rows.iter()), extended) {
            out.push(FrontierView {
                view: "pooled".into(),
                frontier: f,
            });
        }
    }
    out
}
