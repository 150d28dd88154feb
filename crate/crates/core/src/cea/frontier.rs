//! Cost-effectiveness frontier with strict and extended dominance.

use serde::{Deserialize, Serialize};

use super::CeaError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub id: String,
    pub cost: f64,
    pub effect: f64,
}

impl FrontierPoint {
    pub fn new(id: impl Into<String>, cost: f64, effect: f64) -> Self {
        FrontierPoint {
            id: id.into(),
            cost,
            effect,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontierStatus {
    Frontier,
    /// Another point is no costlier and no less effective, one strictly.
    StrictlyDominated,
    /// A mix of two frontier neighbours is cheaper for the same effect.
    ExtendedlyDominated,
    /// Identical cost and effect to an earlier-listed point.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierEntry {
    pub id: String,
    pub cost: f64,
    pub effect: f64,
    pub status: FrontierStatus,
    /// ICER from the previous frontier member; `None` off the frontier and
    /// for the cheapest member.
    pub icer_from_previous: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    /// One entry per input point, in input order.
    pub entries: Vec<FrontierEntry>,
    /// Indices into `entries` of frontier members, by ascending cost.
    pub members: Vec<usize>,
}

impl Frontier {
    pub fn member_entries(&self) -> impl Iterator<Item = &FrontierEntry> {
        self.members.iter().map(|&i| &self.entries[i])
    }

    pub fn status_of(&self, id: &str) -> Option<FrontierStatus> {
        self.entries.iter().find(|e| e.id == id).map(|e| e.status)
    }
}

fn ratio(points: &[FrontierPoint], from: usize, to: usize) -> f64 {
    (points[to].cost - points[from].cost) / (points[to].effect - points[from].effect)
}

/// Builds the frontier over absolute (cost, effect) points. With
/// `extended = false` only strict dominance is removed.
pub fn frontier(points: &[FrontierPoint], extended: bool) -> Result<Frontier, CeaError> {
    if points.len() < 2 {
        return Err(CeaError::TooFewPoints(points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.cost.is_finite() && p.effect.is_finite())) {
        return Err(CeaError::NonFinite(p.id.clone()));
    }

    let mut status = vec![FrontierStatus::Frontier; points.len()];
    let mut order: Vec<usize> = (0..points.len()).collect();
    // Input position breaks exact ties, so the first-listed duplicate survives.
    order.sort_by(|&a, &b| {
        points[a]
            .cost
            .total_cmp(&points[b].cost)
            .then(points[b].effect.total_cmp(&points[a].effect))
            .then(a.cmp(&b))
    });

    let mut kept: Vec<usize> = Vec::with_capacity(points.len());
    let mut best_effect = f64::NEG_INFINITY;
    let mut previous: Option<usize> = None;
    for &i in &order {
        let p = &points[i];
        if let Some(j) = previous {
            if points[j].cost == p.cost && points[j].effect == p.effect {
                status[i] = FrontierStatus::Duplicate;
                continue;
            }
        }
        previous = Some(i);
        if best_effect >= p.effect {
            status[i] = FrontierStatus::StrictlyDominated;
        } else {
            best_effect = p.effect;
            kept.push(i);
        }
    }

    if extended {
        // Kept points have strictly increasing cost and effect. Drop any
        // point whose incoming ICER is not below its outgoing ICER until the
        // sequence of ICERs is strictly increasing.
        let mut k = 1;
        while k + 1 < kept.len() {
            let incoming = ratio(points, kept[k - 1], kept[k]);
            let outgoing = ratio(points, kept[k], kept[k + 1]);
            if incoming >= outgoing {
                status[kept[k]] = FrontierStatus::ExtendedlyDominated;
                kept.remove(k);
                k = k.saturating_sub(1).max(1);
            } else {
                k += 1;
            }
        }
    }

    let mut icers = vec![None; points.len()];
    for w in kept.windows(2) {
        icers[w[1]] = Some(ratio(points, w[0], w[1]));
    }

    let entries = points
        .iter()
        .enumerate()
        .map(|(i, p)| FrontierEntry {
            id: p.id.clone(),
            cost: p.cost,
            effect: p.effect,
            status: status[i],
            icer_from_previous: icers[i],
        })
        .collect();
    Ok(Frontier { entries, members: kept })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<FrontierPoint> {
        v.iter()
            .enumerate()
            .map(|(i, &(c, e))| FrontierPoint::new(format!("s{i}"), c, e))
            .collect()
    }

    #[test]
    fn strict_dominance() {
        let f = frontier(&pts(&[(10.0, 5.0), (8.0, 6.0)]), true).unwrap();
        assert_eq!(f.entries[0].status, FrontierStatus::StrictlyDominated);
        assert_eq!(f.members, vec![1]);
    }

    #[test]
    fn extended_dominance() {
        let f = frontier(&pts(&[(0.0, 0.0), (10.0, 10.0), (11.0, 10.1), (12.0, 20.0)]), true).unwrap();
        assert_eq!(f.entries[2].status, FrontierStatus::ExtendedlyDominated);
        // Once (11, 10.1) goes, (10, 10) enters at ICER 1 and leaves at 0.2.
        assert_eq!(f.entries[1].status, FrontierStatus::ExtendedlyDominated);
        assert_eq!(f.members, vec![0, 3]);
        assert!((f.entries[3].icer_from_previous.unwrap() - 0.6).abs() < 1e-12);

        let strict_only = frontier(&pts(&[(0.0, 0.0), (10.0, 10.0), (11.0, 10.1), (12.0, 20.0)]), false).unwrap();
        assert_eq!(strict_only.members, vec![0, 1, 2, 3]);
    }

    #[test]
    fn duplicates_kept_once() {
        let f = frontier(&pts(&[(5.0, 5.0), (1.0, 1.0), (5.0, 5.0)]), true).unwrap();
        assert_eq!(f.entries[0].status, FrontierStatus::Frontier);
        assert_eq!(f.entries[2].status, FrontierStatus::Duplicate);
    }

    #[test]
    fn needs_two_points() {
        assert_eq!(frontier(&pts(&[(1.0, 1.0)]), true), Err(CeaError::TooFewPoints(1)));
    }
}
