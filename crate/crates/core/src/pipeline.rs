//! Runs the analyses named in a manifest and renders their reports.

use thiserror::Error;

use crate::config::Config;
use crate::grid::{grid_frontiers, run_grid, Analysis, GridResult, RunManifest, Selection};
use crate::markov::{AgeGroup, Frequency};
use crate::model::{Cell, ModelError};
use crate::report::{self, Provenance, Report, ReportError, Table1};
use crate::sensitivity::{
    ceac, crossing, horizon_sweep, relative_ranges, run_psa, summarize, threshold_scan, tornado, wtp_grid,
    wtp_switches, CostEffect, PsaResult, SensitivityError, BISECTION_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("analysis '{analysis}' needs a [{section}] section in the configuration")]
    MissingSection {
        analysis: &'static str,
        section: &'static str,
    },
}

/// The cell used by single-cell analyses: the selected frequency and age
/// group when exactly one of each is selected, otherwise annual screening
/// of ages 20-79.
pub fn focus_cell(selection: &Selection) -> Cell {
    let frequency = match selection.frequencies.as_slice() {
        [f] => *f,
        _ => Frequency::Every(1),
    };
    let age_group = match selection.age_groups.as_slice() {
        [a] => *a,
        _ => AgeGroup::all()[0],
    };
    Cell {
        frequency,
        age_group,
        horizon: selection.horizon,
        perspective: selection.perspective,
    }
}

/// Optional knobs that are not part of the scenario selection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// Replaces `[psa] draws`.
    pub psa_draws: Option<usize>,
    /// Also write every PSA draw.
    pub psa_draws_report: bool,
}

/// Produces every report for the manifest's analyses, in a fixed order.
/// The manifest echo is always first.
pub fn execute(config: &Config, manifest: &RunManifest, overrides: &Overrides) -> Result<Vec<Report>, PipelineError> {
    let model = &config.model;
    let sel = &manifest.selection;
    let prov = Provenance {
        seed: manifest.seed,
        config_hash: config.hash.clone(),
    };
    let wants = |a: Analysis| manifest.analyses.contains(&a);
    let cell = focus_cell(sel);
    let strategies = sel.strategy_ids(model)?;
    let mut out = vec![report::manifest_report(manifest, &prov)];

    if wants(Analysis::StrategyPerformance) {
        out.push(report::strategy_performance_report(model, &prov)?);
    }

    if wants(Analysis::Grid) || wants(Analysis::Frontier) {
        let grid: GridResult = run_grid(model, sel, manifest.workers)?;
        if wants(Analysis::Grid) {
            out.push(report::grid_report(&grid, &prov));
            let t = Table1::build(model, &cell)?;
            out.push(report::table1_report(&t, model, &prov));
        }
        if wants(Analysis::Frontier) {
            let views = grid_frontiers(&grid, &sel.cells(), true);
            out.push(report::frontier_report(&views, &prov));
        }
    }

    if wants(Analysis::Tornado) {
        let t = config.tornado.as_ref().ok_or(PipelineError::MissingSection {
            analysis: "tornado",
            section: "tornado",
        })?;
        let mut ranges = t.ranges.clone();
        let paths = if t.parameters.is_empty() && t.ranges.is_empty() {
            model.parameter_paths()
        } else {
            t.parameters.clone()
        };
        ranges.extend(relative_ranges(model, &paths, t.relative)?);
        let comparator = t.comparator.clone().unwrap_or_else(|| model.status_quo.clone());
        let result = tornado(model, &cell, &t.strategy, &comparator, &ranges, t.metric)?;
        out.push(report::tornado_report(&result, &prov));
    }

    if wants(Analysis::Threshold) {
        let t = config.threshold.as_ref().ok_or(PipelineError::MissingSection {
            analysis: "threshold",
            section: "threshold",
        })?;
        let competing = t.strategies.clone().unwrap_or_else(|| strategies.clone());
        let wtp = t.wtp.unwrap_or(model.wtp.upper());
        let points = threshold_scan(model, &cell, &competing, &t.path, (t.low, t.high), t.steps, wtp)?;
        out.push(report::threshold_report(&t.path, &points, &prov));
    }

    if wants(Analysis::Psa) || wants(Analysis::Ceac) {
        let draws = overrides.psa_draws.unwrap_or(config.psa.draws);
        let psa = run_psa(
            model,
            &strategies,
            &cell,
            &config.psa.parameters,
            draws,
            manifest.seed,
            manifest.workers,
        )?;
        if wants(Analysis::Psa) {
            let comparator = strategies
                .contains(&model.status_quo)
                .then_some(model.status_quo.as_str());
            out.push(report::psa_summary_report(&summarize(&psa, comparator), &prov));
            if overrides.psa_draws_report {
                out.push(report::psa_draws_report(&psa, &prov));
            }
        }
        if wants(Analysis::Ceac) {
            let grid = wtp_grid(
                config.psa.wtp_max,
                config.psa.wtp_step,
                &[model.wtp.lower(), model.wtp.upper()],
            );
            out.push(report::ceac_report(&ceac(&psa, &grid)?, &prov));
            out.push(report::wtp_switch_report(
                &mean_switches(&psa, config.psa.wtp_max),
                &prov,
            ));
        }
    }

    if wants(Analysis::HorizonSweep) {
        let rows = horizon_sweep(model, &cell, &config.sweep.years)?;
        out.push(report::horizon_report(&rows, &prov));
        let focus: Vec<String> = match &config.sweep.focus {
            Some(id) => vec![id.clone()],
            None => model
                .strategies
                .iter()
                .filter(|s| s.id != model.status_quo)
                .map(|s| s.id.clone())
                .collect(),
        };
        let crossings: Vec<_> = focus
            .iter()
            .flat_map(|id| {
                let scenario = cell.scenario_id(id);
                [model.wtp.upper(), model.wtp.lower()].map(|w| crossing(&rows, &scenario, w))
            })
            .collect();
        out.push(report::horizon_crossing_report(&crossings, &prov));
    }

    Ok(out)
}

/// WTP values at which the strategy with the highest expected NMB changes.
pub fn mean_switches(psa: &PsaResult, wtp_max: f64) -> Vec<crate::sensitivity::SwitchPoint> {
    let n = psa.draws.len() as f64;
    let options: Vec<CostEffect> = psa
        .strategies
        .iter()
        .enumerate()
        .map(|(s, id)| CostEffect {
            id: id.clone(),
            cost: psa.column(s).map(|o| o.cost).sum::<f64>() / n,
            effect: psa.column(s).map(|o| o.qalys).sum::<f64>() / n,
        })
        .collect();
    // Expected NMB is linear in WTP, so the grid only needs to be fine
    // enough to separate successive switches.
    let steps = (wtp_max / 100.0).ceil().max(1.0) as usize;
    wtp_switches(&options, 0.0, wtp_max, steps, BISECTION_TOLERANCE)
}
