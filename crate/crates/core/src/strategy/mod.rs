//! Screening-strategy algebra: grader profiles, the strategy expression
//! language and composed diagnostic performance.

mod enumerate;
mod grader;
mod parse;
mod performance;
mod tree;

use thiserror::Error;

pub use enumerate::{enumerate_performance, MAX_ENUMERATED_GRADERS};
pub use grader::{FilterParams, GraderKind, GraderProfile, GraderRegistry};
pub use parse::{canonical_form, parse_strategy, MAX_DEPTH};
pub use performance::{accuracy, closed_form_performance, implied_prevalence, DiagnosticPerformance};
pub use tree::StrategyTree;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("cannot parse strategy at '{token}': {message}")]
    Parse { token: String, message: String },
    #[error("unknown grader id '{0}'")]
    UnknownGrader(String),
    #[error("duplicate grader id '{0}'")]
    DuplicateGrader(String),
    #[error("grader '{id}': invalid {field}: {message}")]
    InvalidProfile { id: String, field: String, message: String },
    #[error("{0}")]
    Domain(String),
    #[error("tree has {graders} grader instances; enumeration is limited to {limit}")]
    TooLarge { graders: usize, limit: usize },
}

impl StrategyError {
    pub(crate) fn parse(token: &str, message: impl Into<String>) -> Self {
        StrategyError::Parse {
            token: token.to_string(),
            message: message.into(),
        }
    }
}
