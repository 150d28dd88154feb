use serde::{Deserialize, Serialize};

use crate::cea::nmb;
use crate::model::{Cell, Model};

use super::SensitivityError;

/// Default bisection tolerance, in parameter units.
pub const BISECTION_TOLERANCE: f64 = 1e-4;

/// A value at which the optimal option changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchPoint {
    pub value: f64,
    /// Optimal just below `value`.
    pub from: String,
    /// Optimal just above `value`.
    pub to: String,
}

/// Scans `[lo, hi]` on a grid of `steps` intervals for changes in the label
/// returned by `optimum`, then bisects each change to `tol`. All changes are
/// returned in ascending order.
pub fn find_switches<F, E>(lo: f64, hi: f64, steps: usize, tol: f64, mut optimum: F) -> Result<Vec<SwitchPoint>, E>
where
    F: FnMut(f64) -> Result<String, E>,
{
    let steps = steps.max(1);
    let at = |i: usize| {
        if i == steps {
            hi
        } else {
            lo + (hi - lo) * i as f64 / steps as f64
        }
    };
    let mut out = Vec::new();
    let mut prev = optimum(lo)?;
    for i in 1..=steps {
        let x = at(i);
        let cur = optimum(x)?;
        if cur != prev {
            let (mut a, mut b) = (at(i - 1), x);
            let mut to = cur.clone();
            while b - a > tol {
                let mid = 0.5 * (a + b);
                let m = optimum(mid)?;
                if m == prev {
                    a = mid;
                } else {
                    b = mid;
                    to = m;
                }
            }
            out.push(SwitchPoint {
                value: 0.5 * (a + b),
                from: prev.clone(),
                to,
            });
        }
        prev = cur;
    }
    Ok(out)
}

/// Index of the highest value; the earliest wins ties.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Switch points in the NMB-optimal strategy as one parameter moves over
/// `[lo, hi]`, holding WTP fixed.
pub fn threshold_scan(
    model: &Model,
    cell: &Cell,
    strategies: &[String],
    path: &str,
    (lo, hi): (f64, f64),
    steps: usize,
    wtp: f64,
) -> Result<Vec<SwitchPoint>, SensitivityError> {
    find_switches(lo, hi, steps, BISECTION_TOLERANCE, |x| {
        let m = model.with_param(path, x)?;
        let results = strategies
            .iter()
            .map(|id| cell.evaluate(&m, id))
            .collect::<Result<Vec<_>, _>>()?;
        let best = argmax(results.iter().map(|r| nmb(r.total_cost, r.qalys, wtp)));
        Ok(strategies[best].clone())
    })
}

/// An option with fixed cost and effect, absolute or incremental.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEffect {
    pub id: String,
    pub cost: f64,
    pub effect: f64,
}

/// Switch points in the NMB-optimal option as WTP moves over `[lo, hi]`.
pub fn wtp_switches(options: &[CostEffect], lo: f64, hi: f64, steps: usize, tol: f64) -> Vec<SwitchPoint> {
    let Ok(points) = find_switches::<_, std::convert::Infallible>(lo, hi, steps, tol, |w| {
        Ok(options[argmax(options.iter().map(|o| nmb(o.cost, o.effect, w)))]
            .id
            .clone())
    });
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cea::nmb_crossing;

    #[test]
    fn flat_comparison_has_no_switch() {
        let s = find_switches(0.0, 1.0, 10, 1e-4, |_| Ok::<_, ()>("a".to_string())).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn multiple_switches_are_ordered() {
        let s = find_switches(0.0, 1.0, 20, 1e-6, |x| {
            Ok::<_, ()>(if (0.3..0.6).contains(&x) { "b" } else { "a" }.to_string())
        })
        .unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].value - 0.3).abs() < 1e-6 && s[0].to == "b");
        assert!((s[1].value - 0.6).abs() < 1e-6 && s[1].to == "a");
    }

    #[test]
    fn wtp_switch_matches_crossing() {
        let opts = [
            CostEffect {
                id: "s5".into(),
                cost: -4.89e6,
                effect: -816.0,
            },
            CostEffect {
                id: "s6".into(),
                cost: 0.90e6,
                effect: 146.0,
            },
        ];
        let s = wtp_switches(&opts, 0.0, 50_000.0, 50, BISECTION_TOLERANCE);
        assert_eq!(s.len(), 1);
        let exact = nmb_crossing(0.90e6, 146.0, -4.89e6, -816.0).unwrap();
        assert!(((s[0].value - exact) / exact).abs() < 1e-6);
        assert_eq!((s[0].from.as_str(), s[0].to.as_str()), ("s5", "s6"));
    }
}
