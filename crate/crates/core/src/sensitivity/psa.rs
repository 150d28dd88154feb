//! Probabilistic sensitivity analysis and acceptability curves.
//!
//! Draw `d` seeds a ChaCha8 stream from `(master_seed, d)` and samples every
//! spec once; all strategies in the draw share that parameter world. Draws run
//! on a worker pool and are collected in index order, so results do not
//! depend on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cea::nmb;
use crate::model::{Cell, Model};

use super::{resolve, DistributionSpec, Sampler, SensitivityError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub cost: f64,
    pub qalys: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsaResult {
    pub seed: u64,
    pub n_draws: usize,
    pub strategies: Vec<String>,
    /// `draws[d][s]` is strategy `s` in draw `d`.
    pub draws: Vec<Vec<Outcome>>,
}

impl PsaResult {
    pub fn strategy_index(&self, id: &str) -> Option<usize> {
        self.strategies.iter().position(|s| s == id)
    }

    pub fn column(&self, s: usize) -> impl Iterator<Item = Outcome> + '_ {
        self.draws.iter().map(move |d| d[s])
    }
}

/// Builds a rayon pool with `workers` threads, or the default size.
pub fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, SensitivityError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| SensitivityError::Pool(e.to_string()))
}

fn draw_rng(seed: u64, draw: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    rng
}

/// Samples one parameter world.
pub fn sample_world(
    model: &Model,
    samplers: &[(String, Sampler)],
    seed: u64,
    draw: usize,
) -> Result<Model, SensitivityError> {
    let mut rng = draw_rng(seed, draw);
    let mut world = model.clone();
    for (path, sampler) in samplers {
        let v = sampler.sample(&mut rng);
        world.set_param(path, v).map_err(|e| SensitivityError::Draw {
            draw,
            message: format!("{path} = {v}: {e}"),
        })?;
    }
    world.validate().map_err(|e| SensitivityError::Draw {
        draw,
        message: e.to_string(),
    })?;
    Ok(world)
}

fn evaluate_world(
    world: &Model,
    strategies: &[String],
    cell: &Cell,
    draw: usize,
) -> Result<Vec<Outcome>, SensitivityError> {
    strategies
        .iter()
        .map(|id| {
            let r = cell.evaluate(world, id).map_err(|e| SensitivityError::Draw {
                draw,
                message: format!("{id}: {e}"),
            })?;
            Ok(Outcome {
                cost: r.total_cost,
                qalys: r.qalys,
            })
        })
        .collect()
}

/// Runs `n_draws` parameter worlds and evaluates every strategy in `cell`
/// within each.
pub fn run_psa(
    model: &Model,
    strategies: &[String],
    cell: &Cell,
    specs: &[DistributionSpec],
    n_draws: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<PsaResult, SensitivityError> {
    if n_draws == 0 {
        return Err(SensitivityError::EmptyPsa);
    }
    for id in strategies {
        model.strategy(id)?;
    }
    let samplers = specs
        .iter()
        .map(|s| Ok((s.path.clone(), resolve(s, model)?)))
        .collect::<Result<Vec<_>, SensitivityError>>()?;

    let pool = worker_pool(workers)?;
    let draws = pool.install(|| {
        (0..n_draws)
            .into_par_iter()
            .map(|d| {
                let world = sample_world(model, &samplers, seed, d)?;
                evaluate_world(&world, strategies, cell, d)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(PsaResult {
        seed,
        n_draws,
        strategies: strategies.to_vec(),
        draws,
    })
}

/// Mean and central 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.collect();
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        Interval {
            mean,
            lower: quantile(&v, 0.025),
            upper: quantile(&v, 0.975),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsaSummaryRow {
    pub strategy: String,
    pub cost: Interval,
    pub qalys: Interval,
    /// Against the comparator within each draw; `None` without one.
    pub delta_cost: Option<Interval>,
    pub delta_qalys: Option<Interval>,
}

pub fn summarize(psa: &PsaResult, comparator: Option<&str>) -> Vec<PsaSummaryRow> {
    let comp = comparator.and_then(|c| psa.strategy_index(c));
    psa.strategies
        .iter()
        .enumerate()
        .map(|(s, id)| PsaSummaryRow {
            strategy: id.clone(),
            cost: Interval::of(psa.column(s).map(|o| o.cost)),
            qalys: Interval::of(psa.column(s).map(|o| o.qalys)),
            delta_cost: comp.map(|c| Interval::of(psa.draws.iter().map(|d| d[s].cost - d[c].cost))),
            delta_qalys: comp.map(|c| Interval::of(psa.draws.iter().map(|d| d[s].qalys - d[c].qalys))),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeacPoint {
    pub wtp: f64,
    pub strategy: String,
    pub probability: f64,
}

/// Probability each strategy has the highest NMB at each WTP. Exact ties
/// split the draw equally.
pub fn ceac(psa: &PsaResult, wtp_grid: &[f64]) -> Result<Vec<CeacPoint>, SensitivityError> {
    if psa.draws.is_empty() {
        return Err(SensitivityError::EmptyPsa);
    }
    if wtp_grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        || wtp_grid.iter().any(|w| !(w.is_finite() && *w >= 0.0))
    {
        return Err(SensitivityError::InvalidGrid(
            "WTP grid must be ascending and non-negative".into(),
        ));
    }
    let n = psa.strategies.len();
    let mut out = Vec::with_capacity(wtp_grid.len() * n);
    for &wtp in wtp_grid {
        let mut wins = vec![0.0; n];
        for draw in &psa.draws {
            let values: Vec<f64> = draw.iter().map(|o| nmb(o.cost, o.qalys, wtp)).collect();
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<usize> = (0..n).filter(|&s| values[s] == best).collect();
            let share = 1.0 / tied.len() as f64;
            for s in tied {
                wins[s] += share;
            }
        }
        let total = psa.draws.len() as f64;
        out.extend(psa.strategies.iter().zip(wins).map(|(id, w)| CeacPoint {
            wtp,
            strategy: id.clone(),
            probability: w / total,
        }));
    }
    Ok(out)
}

/// Evenly spaced WTP grid from 0 to `max`, with the policy thresholds
/// inserted.
pub fn wtp_grid(max: f64, step: f64, extra: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|w| *w <= max + 1e-9)
        .collect();
    grid.extend_from_slice(extra);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}
