use std::fmt;

use serde::{Deserialize, Serialize};

use super::FilterParams;

/// Screening pipeline as a decision tree over graders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StrategyTree {
    /// A single grader reads every case that reaches it.
    Leaf(String),
    /// A threshold-filtered AI: confidently negative cases stop here as
    /// negatives, everything else is flagged positive.
    Filtered { grader: String, filter: FilterParams },
    /// `reviewer` re-grades only the cases `upstream` calls positive.
    Sequential {
        upstream: Box<StrategyTree>,
        reviewer: Box<StrategyTree>,
    },
    /// `first` and `second` grade every case independently; agreement is
    /// final and `adjudicator` resolves disagreements.
    Consensus {
        first: Box<StrategyTree>,
        second: Box<StrategyTree>,
        adjudicator: Box<StrategyTree>,
    },
}

impl StrategyTree {
    pub fn leaf(id: &str) -> Self {
        StrategyTree::Leaf(id.to_string())
    }

    pub fn sequential(upstream: StrategyTree, reviewer: StrategyTree) -> Self {
        StrategyTree::Sequential {
            upstream: Box::new(upstream),
            reviewer: Box::new(reviewer),
        }
    }

    pub fn consensus(first: StrategyTree, second: StrategyTree, adjudicator: StrategyTree) -> Self {
        StrategyTree::Consensus {
            first: Box::new(first),
            second: Box::new(second),
            adjudicator: Box::new(adjudicator),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            StrategyTree::Leaf(_) | StrategyTree::Filtered { .. } => 1,
            StrategyTree::Sequential { upstream, reviewer } => 1 + upstream.depth().max(reviewer.depth()),
            StrategyTree::Consensus {
                first,
                second,
                adjudicator,
            } => 1 + first.depth().max(second.depth()).max(adjudicator.depth()),
        }
    }

    /// Number of grader instances (leaves). `M·M` counts twice.
    pub fn grader_count(&self) -> usize {
        match self {
            StrategyTree::Leaf(_) | StrategyTree::Filtered { .. } => 1,
            StrategyTree::Sequential { upstream, reviewer } => upstream.grader_count() + reviewer.grader_count(),
            StrategyTree::Consensus {
                first,
                second,
                adjudicator,
            } => first.grader_count() + second.grader_count() + adjudicator.grader_count(),
        }
    }

    /// Grader ids in depth-first leaf order.
    pub fn grader_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            StrategyTree::Leaf(id) => out.push(id),
            StrategyTree::Filtered { grader, .. } => out.push(grader),
            StrategyTree::Sequential { upstream, reviewer } => {
                upstream.collect_ids(out);
                reviewer.collect_ids(out);
            }
            StrategyTree::Consensus {
                first,
                second,
                adjudicator,
            } => {
                first.collect_ids(out);
                second.collect_ids(out);
                adjudicator.collect_ids(out);
            }
        }
    }
}

// Canonical text form. Stages are joined with `+`; a consensus prints its
// two parallel graders joined with `·` followed by its adjudicator stage.
// A filtered AI followed by a single reviewer uses the conventional
// `AI+M[Se]` spelling.
impl fmt::Display for StrategyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyTree::Leaf(id) => write!(f, "{id}"),
            StrategyTree::Filtered { grader, .. } => write!(f, "{grader}[Se]"),
            StrategyTree::Sequential { upstream, reviewer } => match (upstream.as_ref(), reviewer.as_ref()) {
                (StrategyTree::Filtered { grader, .. }, StrategyTree::Leaf(r)) => {
                    write!(f, "{grader}+{r}[Se]")
                }
                _ => write!(f, "{upstream}+{reviewer}"),
            },
            StrategyTree::Consensus {
                first,
                second,
                adjudicator,
            } => write!(f, "{first}·{second}+{adjudicator}"),
        }
    }
}
