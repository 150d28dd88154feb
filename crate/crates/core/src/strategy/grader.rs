use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StrategyError;

/// Whether a grader is a person or the AI system. Only AI graders can be
/// threshold-filtered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraderKind {
    Human,
    Ai,
}

/// Pass-through probabilities induced by thresholding the AI score so that
/// only confidently negative images skip human review.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// A truly positive case is confidently called negative and leaks past review.
    pub p_pass_given_positive: f64,
    /// A truly negative case is confidently called negative and avoids review.
    pub p_pass_given_negative: f64,
}

/// Conditional accuracy and per-read cost of one grader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraderProfile {
    pub id: String,
    pub kind: GraderKind,
    pub sensitivity: f64,
    pub specificity: f64,
    /// USD per image set.
    pub cost_per_read: f64,
    #[serde(default)]
    pub ungradable_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterParams>,
}

fn check_probability(id: &str, field: &str, value: f64) -> Result<(), StrategyError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(StrategyError::InvalidProfile {
            id: id.to_string(),
            field: field.to_string(),
            message: format!("{value} is not a probability in [0, 1]"),
        })
    }
}

impl GraderProfile {
    pub fn human(id: &str, sensitivity: f64, specificity: f64, cost_per_read: f64) -> Self {
        GraderProfile {
            id: id.to_string(),
            kind: GraderKind::Human,
            sensitivity,
            specificity,
            cost_per_read,
            ungradable_rate: 0.0,
            filter: None,
        }
    }

    pub fn ai(id: &str, sensitivity: f64, specificity: f64, cost_per_read: f64) -> Self {
        GraderProfile {
            kind: GraderKind::Ai,
            ..GraderProfile::human(id, sensitivity, specificity, cost_per_read)
        }
    }

    pub fn with_filter(mut self, filter: FilterParams) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn with_ungradable_rate(mut self, rate: f64) -> Self {
        self.ungradable_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        check_probability(&self.id, "sensitivity", self.sensitivity)?;
        check_probability(&self.id, "specificity", self.specificity)?;
        check_probability(&self.id, "ungradable_rate", self.ungradable_rate)?;
        if !(self.cost_per_read.is_finite() && self.cost_per_read >= 0.0) {
            return Err(StrategyError::InvalidProfile {
                id: self.id.clone(),
                field: "cost_per_read".into(),
                message: format!("{} must be a non-negative amount", self.cost_per_read),
            });
        }
        if let Some(filter) = &self.filter {
            if self.kind != GraderKind::Ai {
                return Err(StrategyError::InvalidProfile {
                    id: self.id.clone(),
                    field: "filter".into(),
                    message: "threshold filtering is only defined for AI graders".into(),
                });
            }
            check_probability(&self.id, "filter.p_pass_given_positive", filter.p_pass_given_positive)?;
            check_probability(&self.id, "filter.p_pass_given_negative", filter.p_pass_given_negative)?;
            // Filtering can only tighten the negative channel.
            if filter.p_pass_given_positive > 1.0 - self.sensitivity + 1e-12 {
                return Err(StrategyError::InvalidProfile {
                    id: self.id.clone(),
                    field: "filter.p_pass_given_positive".into(),
                    message: format!(
                        "{} exceeds the raw miss rate 1 - sensitivity = {}",
                        filter.p_pass_given_positive,
                        1.0 - self.sensitivity
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Set of grader profiles keyed by unique id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraderRegistry {
    profiles: BTreeMap<String, GraderProfile>,
}

impl GraderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and inserts a profile. Duplicate ids are rejected.
    pub fn insert(&mut self, profile: GraderProfile) -> Result<(), StrategyError> {
        profile.validate()?;
        if self.profiles.contains_key(&profile.id) {
            return Err(StrategyError::DuplicateGrader(profile.id));
        }
        self.profiles.insert(profile.id.clone(), profile);
        Ok(())
    }

    pub fn from_profiles<I>(profiles: I) -> Result<Self, StrategyError>
    where
        I: IntoIterator<Item = GraderProfile>,
    {
        let mut registry = GraderRegistry::new();
        for p in profiles {
            registry.insert(p)?;
        }
        Ok(registry)
    }

    pub fn get(&self, id: &str) -> Option<&GraderProfile> {
        self.profiles.get(id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut GraderProfile> {
        self.profiles.get_mut(id)
    }

    pub fn lookup(&self, id: &str) -> Result<&GraderProfile, StrategyError> {
        self.get(id).ok_or_else(|| StrategyError::UnknownGrader(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &GraderProfile> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        self.profiles.values().try_for_each(GraderProfile::validate)
    }

    /// Sum of every grader's per-read cost; an upper bound on any pipeline's
    /// expected cost per case when each grader appears once.
    pub fn total_cost_per_read(&self) -> f64 {
        self.profiles.values().map(|p| p.cost_per_read).sum()
    }
}
