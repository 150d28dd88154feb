//! Complete model inputs, parameter addressing by dotted path, and scenario
//! evaluation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cea::WtpPolicy;
use crate::markov::{
    aggregate_scenario, run_cohort, AgeGroup, Frequency, Horizon, MarkovError, MarkovParameters, Perspective,
    ScenarioResult, ScenarioSpec, StateValues,
};
use crate::strategy::{
    closed_form_performance, parse_strategy, DiagnosticPerformance, GraderRegistry, StrategyError, StrategyTree,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("unknown parameter path '{0}'")]
    UnknownParameter(String),
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
    #[error("invalid value for {path}: {message}")]
    InvalidValue { path: String, message: String },
}

/// A named screening strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDef {
    pub id: String,
    pub label: String,
    /// Expression as written, e.g. `AI·M+M2`.
    pub expr: String,
}

/// What values a parameter may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Probability,
    NonNegative,
}

/// Grader profiles, model parameters, strategies and economic settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub registry: GraderRegistry,
    pub params: MarkovParameters,
    pub strategies: Vec<StrategyDef>,
    /// Id of the comparator strategy.
    pub status_quo: String,
    pub wtp: WtpPolicy,
    pub cohort_size: f64,
}

pub const DEFAULT_COHORT_SIZE: f64 = 100_000.0;

/// A (frequency, age group) cell of the scenario grid, with the horizon and
/// costing perspective used to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub frequency: Frequency,
    pub age_group: AgeGroup,
    pub horizon: Horizon,
    pub perspective: Perspective,
}

impl Cell {
    pub fn new(frequency: Frequency, age_group: AgeGroup) -> Self {
        Cell {
            frequency,
            age_group,
            horizon: Horizon::LifeExpectancy,
            perspective: Perspective::Societal,
        }
    }

    /// Annual screening of ages 20-79 over a lifetime, the headline cell.
    pub fn headline() -> Self {
        Cell::new(Frequency::Every(1), AgeGroup::all()[0])
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_perspective(mut self, perspective: Perspective) -> Self {
        self.perspective = perspective;
        self
    }

    pub fn scenario_id(&self, strategy_id: &str) -> String {
        crate::markov::scenario_id(strategy_id, self.frequency, self.age_group)
    }

    pub fn evaluate(&self, model: &Model, strategy_id: &str) -> Result<ScenarioResult, ModelError> {
        model.evaluate_strategy(
            strategy_id,
            self.frequency,
            self.age_group,
            self.horizon,
            self.perspective,
        )
    }
}

const GRADER_FIELDS: [&str; 6] = [
    "sensitivity",
    "specificity",
    "cost_per_read",
    "ungradable_rate",
    "filter.p_pass_given_positive",
    "filter.p_pass_given_negative",
];

const TRANSITION_FIELDS: [&str; 4] = ["p_blind_untreated", "p_blind_treated", "p_regress", "treatment_uptake"];

const COST_FIELDS: [&str; 5] = [
    "referral",
    "treatment_initial",
    "treatment_annual",
    "blindness_initial",
    "blindness_annual",
];

impl Model {
    pub fn strategy(&self, id: &str) -> Result<&StrategyDef, ModelError> {
        self.strategies
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| ModelError::UnknownStrategy(id.to_string()))
    }

    pub fn strategy_ids(&self) -> Vec<String> {
        self.strategies.iter().map(|s| s.id.clone()).collect()
    }

    /// Parses a strategy against the current profiles. Filter parameters are
    /// copied into the tree, so trees are rebuilt whenever profiles change.
    pub fn tree(&self, id: &str) -> Result<StrategyTree, ModelError> {
        Ok(parse_strategy(&self.strategy(id)?.expr, &self.registry)?)
    }

    pub fn performance(&self, id: &str) -> Result<DiagnosticPerformance, ModelError> {
        let tree = self.tree(id)?;
        Ok(closed_form_performance(
            &tree,
            &self.registry,
            self.params.cohort.screening_prevalence,
        )?)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.registry.validate()?;
        self.params.validate()?;
        if self.strategies.is_empty() {
            return Err(ModelError::InvalidValue {
                path: "strategies".into(),
                message: "at least one strategy is required".into(),
            });
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].iter().any(|o| o.id == s.id) {
                return Err(ModelError::InvalidValue {
                    path: format!("strategies.{}", s.id),
                    message: "duplicate strategy id".into(),
                });
            }
            parse_strategy(&s.expr, &self.registry)?;
        }
        self.strategy(&self.status_quo)?;
        if !(self.wtp.gdp_per_capita.is_finite() && self.wtp.gdp_per_capita > 0.0) {
            return Err(ModelError::InvalidValue {
                path: "wtp.gdp_per_capita".into(),
                message: "must be positive".into(),
            });
        }
        if !(self.cohort_size.is_finite() && self.cohort_size > 0.0) {
            return Err(ModelError::InvalidValue {
                path: "cohort.size".into(),
                message: "must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn scenario(
        &self,
        strategy_id: &str,
        frequency: Frequency,
        age_group: AgeGroup,
        horizon: Horizon,
        perspective: Perspective,
    ) -> Result<ScenarioSpec, ModelError> {
        Ok(ScenarioSpec {
            strategy_id: strategy_id.to_string(),
            strategy: self.tree(strategy_id)?,
            frequency,
            age_group,
            cohort_size: self.cohort_size,
            horizon,
            perspective,
        })
    }

    /// Runs one scenario end to end: composed performance, cohort trace and
    /// aggregation.
    pub fn evaluate(&self, scenario: &ScenarioSpec) -> Result<ScenarioResult, ModelError> {
        let perf = closed_form_performance(
            &scenario.strategy,
            &self.registry,
            self.params.cohort.screening_prevalence,
        )?;
        let trace = run_cohort(scenario, &self.params, &perf)?;
        Ok(aggregate_scenario(&trace, scenario.perspective))
    }

    pub fn evaluate_strategy(
        &self,
        strategy_id: &str,
        frequency: Frequency,
        age_group: AgeGroup,
        horizon: Horizon,
        perspective: Perspective,
    ) -> Result<ScenarioResult, ModelError> {
        let sc = self.scenario(strategy_id, frequency, age_group, horizon, perspective)?;
        self.evaluate(&sc)
    }

    /// Every addressable scalar parameter path.
    pub fn parameter_paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in self.registry.iter() {
            for f in GRADER_FIELDS {
                if f.starts_with("filter.") && g.filter.is_none() {
                    continue;
                }
                out.push(format!("graders.{}.{f}", g.id));
            }
        }
        for (i, _) in self.params.transitions.onset.iter().enumerate() {
            out.push(format!("transitions.onset.{i}.p"));
        }
        out.extend(TRANSITION_FIELDS.iter().map(|f| format!("transitions.{f}")));
        out.extend(
            StateValues::NAMES
                .iter()
                .map(|f| format!("transitions.mortality_multiplier.{f}")),
        );
        out.extend(StateValues::NAMES.iter().map(|f| format!("utilities.{f}")));
        out.extend(COST_FIELDS.iter().map(|f| format!("costs.{f}")));
        out.push("discounting.cost_rate".into());
        out.push("discounting.effect_rate".into());
        out.push("cohort.screening_prevalence".into());
        out
    }

    pub fn param_kind(&self, path: &str) -> Result<ParamKind, ModelError> {
        self.get_param(path)?;
        let parts: Vec<&str> = path.split('.').collect();
        let kind = match parts.as_slice() {
            ["graders", _, "cost_per_read"] => ParamKind::NonNegative,
            ["transitions", "mortality_multiplier", _] => ParamKind::NonNegative,
            ["costs", _] | ["discounting", _] => ParamKind::NonNegative,
            _ => ParamKind::Probability,
        };
        Ok(kind)
    }

    pub fn get_param(&self, path: &str) -> Result<f64, ModelError> {
        let mut copy = self.clone();
        copy.slot(path).map(|v| *v)
    }

    /// Sets a parameter without validating the model as a whole.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<(), ModelError> {
        if !value.is_finite() {
            return Err(ModelError::InvalidValue {
                path: path.into(),
                message: format!("{value} is not finite"),
            });
        }
        *self.slot(path)? = value;
        Ok(())
    }

    /// Copy of the model with one parameter changed and the result validated.
    pub fn with_param(&self, path: &str, value: f64) -> Result<Model, ModelError> {
        let mut m = self.clone();
        m.set_param(path, value)?;
        m.validate()?;
        Ok(m)
    }

    fn slot(&mut self, path: &str) -> Result<&mut f64, ModelError> {
        let unknown = || ModelError::UnknownParameter(path.to_string());
        let parts: Vec<&str> = path.split('.').collect();
        let p = &mut self.params;
        let slot = match parts.as_slice() {
            ["graders", id, rest @ ..] => {
                let g = self.registry.get_mut(id).ok_or_else(unknown)?;
                match rest {
                    ["sensitivity"] => &mut g.sensitivity,
                    ["specificity"] => &mut g.specificity,
                    ["cost_per_read"] => &mut g.cost_per_read,
                    ["ungradable_rate"] => &mut g.ungradable_rate,
                    ["filter", f] => {
                        let filter = g.filter.as_mut().ok_or_else(unknown)?;
                        match *f {
                            "p_pass_given_positive" => &mut filter.p_pass_given_positive,
                            "p_pass_given_negative" => &mut filter.p_pass_given_negative,
                            _ => return Err(unknown()),
                        }
                    }
                    _ => return Err(unknown()),
                }
            }
            ["transitions", "onset", i, "p"] => {
                let i: usize = i.parse().map_err(|_| unknown())?;
                &mut p.transitions.onset.get_mut(i).ok_or_else(unknown)?.p
            }
            ["transitions", "mortality_multiplier", s] => {
                p.transitions.mortality_multiplier.field_mut(s).ok_or_else(unknown)?
            }
            ["transitions", "p_blind_untreated"] => &mut p.transitions.p_blind_untreated,
            ["transitions", "p_blind_treated"] => &mut p.transitions.p_blind_treated,
            ["transitions", "p_regress"] => &mut p.transitions.p_regress,
            ["transitions", "treatment_uptake"] => &mut p.transitions.treatment_uptake,
            ["utilities", s] => p.utilities.field_mut(s).ok_or_else(unknown)?,
            ["costs", "referral"] => &mut p.costs.referral,
            ["costs", "treatment_initial"] => &mut p.costs.treatment_initial,
            ["costs", "treatment_annual"] => &mut p.costs.treatment_annual,
            ["costs", "blindness_initial"] => &mut p.costs.blindness_initial,
            ["costs", "blindness_annual"] => &mut p.costs.blindness_annual,
            ["discounting", "cost_rate"] => &mut p.discounting.cost_rate,
            ["discounting", "effect_rate"] => &mut p.discounting.effect_rate,
            ["cohort", "screening_prevalence"] => &mut p.cohort.screening_prevalence,
            _ => return Err(unknown()),
        };
        Ok(slot)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::markov::{CohortSpec, Costs, Discounting, InitialMix, LifeTable, OnsetBand, Transitions};
    use crate::strategy::{FilterParams, GraderProfile};

    /// Small but complete model used by unit tests across modules.
    pub fn small_model() -> Model {
        let registry = GraderRegistry::from_profiles([
            GraderProfile::ai("AI", 0.96, 0.81, 2.0).with_filter(FilterParams {
                p_pass_given_positive: 0.01,
                p_pass_given_negative: 0.4,
            }),
            GraderProfile::human("M", 0.91, 0.95, 6.0),
            GraderProfile::human("M2", 0.97, 0.97, 9.0),
        ])
        .unwrap();
        let params = MarkovParameters {
            transitions: Transitions {
                onset: vec![OnsetBand { from_age: 0, p: 0.02 }],
                p_blind_untreated: 0.05,
                p_blind_treated: 0.01,
                p_regress: 0.0,
                treatment_uptake: 0.7,
                mortality_multiplier: StateValues::uniform(1.0),
            },
            utilities: StateValues {
                non_vtdr: 0.9,
                vtdr: 0.8,
                treated_dr: 0.75,
                blind: 0.5,
            },
            costs: Costs {
                referral: 50.0,
                treatment_initial: 1000.0,
                treatment_annual: 200.0,
                blindness_initial: 3000.0,
                blindness_annual: 2000.0,
            },
            discounting: Discounting::default(),
            cohort: CohortSpec {
                age_min: 60,
                age_max: 69,
                life_expectancy: 80,
                age_weights: None,
                initial_state: InitialMix {
                    non_vtdr: 0.9,
                    vtdr: 0.1,
                    treated_dr: 0.0,
                    blind: 0.0,
                },
                screening_prevalence: 0.07,
            },
            life_table: LifeTable::constant(0.02),
        };
        let strategies = [
            ("manual", "M·M+M2"),
            ("ai", "AI"),
            ("copilot", "AI·M+M2"),
            ("sensitive-expert", "AI+M2[Se]"),
        ]
        .into_iter()
        .map(|(id, expr)| StrategyDef {
            id: id.into(),
            label: id.into(),
            expr: expr.into(),
        })
        .collect();
        Model {
            registry,
            params,
            strategies,
            status_quo: "manual".into(),
            wtp: WtpPolicy::default(),
            cohort_size: 1000.0,
        }
    }
}
