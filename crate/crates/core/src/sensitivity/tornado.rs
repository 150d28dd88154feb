use serde::{Deserialize, Serialize};

use crate::cea::{icer, nmb, Icer};
use crate::model::{Cell, Model, ModelError, ParamKind};

use super::SensitivityError;

/// Low and high values for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub path: String,
    pub low: f64,
    pub high: f64,
}

/// Which comparison statistic sets the bar width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TornadoMetric {
    #[default]
    Icer,
    /// NMB at the upper WTP threshold.
    Nmb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TornadoBar {
    pub path: String,
    pub base: f64,
    pub low: f64,
    pub high: f64,
    pub icer_low: Icer,
    pub icer_high: Icer,
    pub nmb_low: f64,
    pub nmb_high: f64,
    /// Spread of the metric between the two ends. Infinite for ICER bars
    /// whose ends are not both ratios.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TornadoFailure {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tornado {
    pub strategy: String,
    pub comparator: String,
    pub metric: TornadoMetric,
    pub base_icer: Icer,
    pub base_nmb: f64,
    /// Sorted by descending width, ties by path.
    pub bars: Vec<TornadoBar>,
    pub failures: Vec<TornadoFailure>,
}

impl Tornado {
    pub fn top(&self, n: usize) -> &[TornadoBar] {
        &self.bars[..n.min(self.bars.len())]
    }
}

/// `base * (1 - rel)` to `base * (1 + rel)` per path, clipped to the
/// parameter's domain.
pub fn relative_ranges(model: &Model, paths: &[String], rel: f64) -> Result<Vec<RangeSpec>, ModelError> {
    paths
        .iter()
        .map(|path| {
            let base = model.get_param(path)?;
            let (mut low, mut high) = (base * (1.0 - rel), base * (1.0 + rel));
            if model.param_kind(path)? == ParamKind::Probability {
                low = low.clamp(0.0, 1.0);
                high = high.clamp(0.0, 1.0);
            }
            Ok(RangeSpec {
                path: path.clone(),
                low: low.max(0.0),
                high,
            })
        })
        .collect()
}

fn compare(model: &Model, cell: &Cell, strategy: &str, comparator: &str) -> Result<(Icer, f64), ModelError> {
    let a = cell.evaluate(model, strategy)?;
    let b = cell.evaluate(model, comparator)?;
    let (dc, dq) = (a.total_cost - b.total_cost, a.qalys - b.qalys);
    Ok((icer(dc, dq), nmb(dc, dq, model.wtp.upper())))
}

/// One-way sensitivity of the `strategy` versus `comparator` comparison.
/// A range that breaks a model invariant is reported as a failure for that
/// parameter; the remaining parameters still run.
pub fn tornado(
    model: &Model,
    cell: &Cell,
    strategy: &str,
    comparator: &str,
    ranges: &[RangeSpec],
    metric: TornadoMetric,
) -> Result<Tornado, SensitivityError> {
    let (base_icer, base_nmb) = compare(model, cell, strategy, comparator)?;
    let mut bars = Vec::new();
    let mut failures = Vec::new();
    for r in ranges {
        let run = |v: f64| -> Result<(Icer, f64), ModelError> {
            let m = model.with_param(&r.path, v)?;
            compare(&m, cell, strategy, comparator)
        };
        let outcome = model
            .get_param(&r.path)
            .and_then(|base| Ok((base, run(r.low)?, run(r.high)?)));
        match outcome {
            Ok((base, (icer_low, nmb_low), (icer_high, nmb_high))) => {
                let width = match metric {
                    TornadoMetric::Nmb => (nmb_high - nmb_low).abs(),
                    TornadoMetric::Icer => match (icer_low, icer_high) {
                        (a, b) if a == b => 0.0,
                        (Icer::Ratio { value: a, .. }, Icer::Ratio { value: b, .. }) => (b - a).abs(),
                        _ => f64::INFINITY,
                    },
                };
                bars.push(TornadoBar {
                    path: r.path.clone(),
                    base,
                    low: r.low,
                    high: r.high,
                    icer_low,
                    icer_high,
                    nmb_low,
                    nmb_high,
                    width,
                });
            }
            Err(e) => failures.push(TornadoFailure {
                path: r.path.clone(),
                message: e.to_string(),
            }),
        }
    }
    bars.sort_by(|a, b| b.width.total_cmp(&a.width).then_with(|| a.path.cmp(&b.path)));
    Ok(Tornado {
        strategy: strategy.to_string(),
        comparator: comparator.to_string(),
        metric,
        base_icer,
        base_nmb,
        bars,
        failures,
    })
}
