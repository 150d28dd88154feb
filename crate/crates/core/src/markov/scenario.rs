use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::strategy::StrategyTree;

use super::MarkovError;

/// How often the target age group is screened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Frequency {
    /// A single screen at scenario start.
    OneOff,
    /// Every `n` years starting at scenario start (`n` in 1..=5).
    Every(u32),
}

impl Frequency {
    pub const ALL: [Frequency; 6] = [
        Frequency::OneOff,
        Frequency::Every(1),
        Frequency::Every(2),
        Frequency::Every(3),
        Frequency::Every(4),
        Frequency::Every(5),
    ];

    pub fn screens_at(self, cycle: u32) -> bool {
        match self {
            Frequency::OneOff => cycle == 0,
            Frequency::Every(n) => cycle.is_multiple_of(n),
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frequency::OneOff => f.write_str("one-off"),
            Frequency::Every(1) => f.write_str("annual"),
            Frequency::Every(n) => write!(f, "every-{n}-years"),
        }
    }
}

impl FromStr for Frequency {
    type Err = MarkovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let freq = match t.as_str() {
            "one-off" | "oneoff" | "once" | "0" => Frequency::OneOff,
            "annual" | "yearly" => Frequency::Every(1),
            other => {
                let n = other
                    .strip_prefix("every-")
                    .map(|r| r.trim_end_matches("-years").trim_end_matches("-year"))
                    .unwrap_or(other);
                match n.parse::<u32>() {
                    Ok(n) if (1..=5).contains(&n) => Frequency::Every(n),
                    _ => return Err(MarkovError::invalid("frequency", format!("unknown frequency '{s}'"))),
                }
            }
        };
        Ok(freq)
    }
}

/// Target age group for screening: from `lower` through 79 inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgeGroup {
    lower: u32,
}

impl AgeGroup {
    pub const UPPER: u32 = 79;
    pub const LOWER_BOUNDS: [u32; 5] = [20, 30, 40, 50, 60];

    pub fn new(lower: u32) -> Result<Self, MarkovError> {
        if Self::LOWER_BOUNDS.contains(&lower) {
            Ok(AgeGroup { lower })
        } else {
            Err(MarkovError::invalid(
                "age_group",
                format!("age group must start at one of {:?}, got {lower}", Self::LOWER_BOUNDS),
            ))
        }
    }

    pub fn all() -> [AgeGroup; 5] {
        Self::LOWER_BOUNDS.map(|lower| AgeGroup { lower })
    }

    pub fn lower(self) -> u32 {
        self.lower
    }

    pub fn contains(self, age: u32) -> bool {
        (self.lower..=Self::UPPER).contains(&age)
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lower, Self::UPPER)
    }
}

impl FromStr for AgeGroup {
    type Err = MarkovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let lower = t.split(['-', '–']).next().unwrap_or(t);
        if let Some(upper) = t.split(['-', '–']).nth(1) {
            if upper.trim() != "79" {
                return Err(MarkovError::invalid(
                    "age_group",
                    format!("age groups end at 79, got '{s}'"),
                ));
            }
        }
        let lower = lower
            .trim()
            .parse::<u32>()
            .map_err(|_| MarkovError::invalid("age_group", format!("unknown age group '{s}'")))?;
        AgeGroup::new(lower)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Horizon {
    /// Run until the youngest band reaches the cohort's life expectancy.
    LifeExpectancy,
    Years(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    #[default]
    Societal,
    /// Excludes blindness care costs.
    Provider,
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perspective::Societal => "societal",
            Perspective::Provider => "provider",
        })
    }
}

impl FromStr for Perspective {
    type Err = MarkovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "societal" => Ok(Perspective::Societal),
            "provider" => Ok(Perspective::Provider),
            _ => Err(MarkovError::invalid(
                "perspective",
                format!("unknown perspective '{s}'"),
            )),
        }
    }
}

/// One screening scenario: a strategy applied on a schedule to an age group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub strategy_id: String,
    pub strategy: StrategyTree,
    pub frequency: Frequency,
    pub age_group: AgeGroup,
    pub cohort_size: f64,
    pub horizon: Horizon,
    pub perspective: Perspective,
}

impl ScenarioSpec {
    /// Stable identifier, e.g. `copilot|annual|20-79`.
    pub fn id(&self) -> String {
        scenario_id(&self.strategy_id, self.frequency, self.age_group)
    }
}

pub fn scenario_id(strategy_id: &str, frequency: Frequency, age_group: AgeGroup) -> String {
    format!("{strategy_id}|{frequency}|{age_group}")
}
