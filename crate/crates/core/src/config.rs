//! TOML configuration and life-table loading with file/line diagnostics.
//!
//! Several files may be given; later files override earlier ones key by
//! key, with tables merged recursively. The life table is a two-column CSV
//! (`age,mortality`) named by `cohort.life_table`, relative to the file that
//! names it.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::de::{DeTable, DeValue};
use toml::Spanned;

use crate::cea::WtpPolicy;
use crate::markov::{
    CohortSpec, Costs, Discounting, InitialMix, LifeTable, MarkovError, MarkovParameters, StateValues, Transitions,
};
use crate::model::{Model, ModelError, StrategyDef, DEFAULT_COHORT_SIZE};
use crate::sensitivity::{resolve, DistributionSpec, RangeSpec, SensitivityError, TornadoMetric};
use crate::strategy::{parse_strategy, FilterParams, GraderKind, GraderProfile, GraderRegistry, StrategyError};

/// Where a problem was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Location {
    pub file: PathBuf,
    pub line: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{line}", self.file.display()),
            None => write!(f, "{}", self.file.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{location}: {key}: {message}")]
    Invalid {
        location: Location,
        /// Dotted path of the offending key.
        key: String,
        message: String,
    },
    #[error("no configuration file given")]
    NoFiles,
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrader {
    kind: GraderKind,
    sensitivity: f64,
    specificity: f64,
    cost_per_read: f64,
    #[serde(default)]
    ungradable_rate: f64,
    #[serde(default)]
    filter: Option<FilterParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    id: String,
    #[serde(default)]
    label: Option<String>,
    expr: String,
}

fn default_size() -> f64 {
    DEFAULT_COHORT_SIZE
}

fn default_life_expectancy() -> u32 {
    80
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCohort {
    #[serde(default = "default_size")]
    size: f64,
    age_min: u32,
    age_max: u32,
    #[serde(default = "default_life_expectancy")]
    life_expectancy: u32,
    #[serde(default)]
    age_weights: Option<Vec<f64>>,
    initial_state: InitialMix,
    screening_prevalence: f64,
    life_table: PathBuf,
}

fn default_draws() -> usize {
    10_000
}

fn default_seed() -> u64 {
    20_240_417
}

fn default_wtp_max() -> f64 {
    100_000.0
}

fn default_wtp_step() -> f64 {
    1_000.0
}

/// `[psa]`: draws, seed, CEAC grid and per-parameter distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsaSettings {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_wtp_max")]
    pub wtp_max: f64,
    #[serde(default = "default_wtp_step")]
    pub wtp_step: f64,
    #[serde(default)]
    pub parameters: Vec<DistributionSpec>,
}

impl Default for PsaSettings {
    fn default() -> Self {
        PsaSettings {
            draws: default_draws(),
            seed: default_seed(),
            wtp_max: default_wtp_max(),
            wtp_step: default_wtp_step(),
            parameters: Vec::new(),
        }
    }
}

fn default_relative() -> f64 {
    0.2
}

fn default_top() -> usize {
    5
}

/// `[tornado]`: the comparison and the parameters to vary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TornadoSettings {
    pub strategy: String,
    /// Defaults to the status quo.
    #[serde(default)]
    pub comparator: Option<String>,
    #[serde(default)]
    pub metric: TornadoMetric,
    /// Symmetric relative range for `parameters`.
    #[serde(default = "default_relative")]
    pub relative: f64,
    /// Paths varied by `relative`; every parameter when empty and no
    /// explicit ranges are given.
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub ranges: Vec<RangeSpec>,
    #[serde(default = "default_top")]
    pub top: usize,
}

fn default_steps() -> usize {
    50
}

/// `[threshold]`: a one-parameter scan for switches in the optimal strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSettings {
    pub path: String,
    pub low: f64,
    pub high: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Strategies competing; all when absent.
    #[serde(default)]
    pub strategies: Option<Vec<String>>,
    /// WTP per QALY; the upper threshold when absent.
    #[serde(default)]
    pub wtp: Option<f64>,
}

fn default_years() -> Vec<u32> {
    crate::sensitivity::default_years()
}

/// `[sweep]`: horizons to evaluate and the strategy whose crossings are
/// reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    #[serde(default = "default_years")]
    pub years: Vec<u32>,
    #[serde(default)]
    pub focus: Option<String>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            years: default_years(),
            focus: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    status_quo: String,
    graders: BTreeMap<String, RawGrader>,
    strategies: Vec<RawStrategy>,
    transitions: Transitions,
    utilities: StateValues,
    costs: Costs,
    #[serde(default)]
    discounting: Discounting,
    cohort: RawCohort,
    #[serde(default)]
    wtp: WtpPolicy,
    #[serde(default)]
    psa: PsaSettings,
    #[serde(default)]
    tornado: Option<TornadoSettings>,
    #[serde(default)]
    threshold: Option<ThresholdSettings>,
    #[serde(default)]
    sweep: SweepSettings,
}

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: Model,
    pub psa: PsaSettings,
    pub tornado: Option<TornadoSettings>,
    pub threshold: Option<ThresholdSettings>,
    pub sweep: SweepSettings,
    pub files: Vec<PathBuf>,
    pub life_table_file: PathBuf,
    /// SHA-256 of the canonicalized configuration and life table.
    pub hash: String,
}

/// One source file, kept for locating keys.
struct Source {
    path: PathBuf,
    text: String,
}

impl Source {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn span_of(&self, key: &str) -> Option<Range<usize>> {
        let doc = DeTable::parse(&self.text).ok()?;
        locate(doc.get_ref(), key)
    }
}

/// Span of the deepest existing prefix of `key`.
fn locate(table: &DeTable<'_>, key: &str) -> Option<Range<usize>> {
    let mut parts = key.split('.');
    let first = parts.next()?;
    let (k, v) = table.iter().find(|(k, _)| k.get_ref() == first)?;
    let mut best = k.span().start..v.span().end;
    let mut value: &Spanned<DeValue<'_>> = v;
    for part in parts {
        let next = match value.get_ref() {
            DeValue::Table(t) => t
                .iter()
                .find(|(k, _)| k.get_ref() == part)
                .map(|(k, v)| (k.span().start, v)),
            DeValue::Array(a) => part
                .parse::<usize>()
                .ok()
                .and_then(|i| a.get(i))
                .map(|v| (v.span().start, v)),
            _ => None,
        };
        match next {
            Some((start, v)) => {
                best = start..v.span().end;
                value = v;
            }
            None => break,
        }
    }
    Some(best)
}

fn dotted(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .map(|s| match s {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } | Segment::Enum { variant: key } => key.clone(),
            Segment::Unknown => "?".into(),
        })
        .collect::<Vec<_>>()
        .join(".")
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Parses and validates configuration files.
pub fn load_config<P: AsRef<Path>>(paths: &[P]) -> Result<Config, ConfigError> {
    if paths.is_empty() {
        return Err(ConfigError::NoFiles);
    }
    let mut sources = Vec::new();
    let mut merged = toml::Table::new();
    let mut life_table_origin = None;
    for p in paths {
        let path = p.as_ref().to_path_buf();
        let text = fs::read_to_string(&path).map_err(|e| ConfigError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let table: toml::Table = toml::from_str(&text).map_err(|e| {
            let src = Source {
                path: path.clone(),
                text: text.clone(),
            };
            ConfigError::Invalid {
                location: Location {
                    file: path.clone(),
                    line: e.span().map(|s| src.line_of(s.start)),
                },
                key: String::new(),
                message: e.message().trim().to_string(),
            }
        })?;
        if table.get("cohort").and_then(|c| c.get("life_table")).is_some() {
            life_table_origin = Some(path.clone());
        }
        merge(&mut merged, table);
        sources.push(Source { path, text });
    }
    let ctx = Context { sources: &sources };

    let raw: RawConfig = serde_path_to_error::deserialize(toml::Value::Table(merged.clone()))
        .map_err(|e| ctx.invalid(&dotted(e.path()), e.inner().message().trim()))?;

    let base_dir = life_table_origin
        .as_deref()
        .and_then(Path::parent)
        .unwrap_or_else(|| Path::new("."));
    let life_table_file = base_dir.join(&raw.cohort.life_table);
    let (life_table, life_table_text) = load_life_table(&life_table_file)?;

    let mut hasher = Sha256::new();
    hasher.update(toml::to_string(&merged).unwrap_or_default().as_bytes());
    hasher.update(b"\0");
    hasher.update(life_table_text.as_bytes());
    let hash = hex::encode(hasher.finalize());

    let model = ctx.build_model(&raw, life_table)?;
    ctx.check_analyses(&raw, &model)?;

    Ok(Config {
        model,
        psa: raw.psa,
        tornado: raw.tornado,
        threshold: raw.threshold,
        sweep: raw.sweep,
        files: sources.into_iter().map(|s| s.path).collect(),
        life_table_file,
        hash,
    })
}

struct Context<'a> {
    sources: &'a [Source],
}

impl Context<'_> {
    /// An error at `key`, located in the last file that mentions it.
    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let found = self
            .sources
            .iter()
            .rev()
            .find_map(|s| s.span_of(key).map(|span| (s, span)));
        let location = match found {
            Some((s, span)) => Location {
                file: s.path.clone(),
                line: Some(s.line_of(span.start)),
            },
            None => Location {
                file: self.sources.last().map(|s| s.path.clone()).unwrap_or_default(),
                line: None,
            },
        };
        ConfigError::Invalid {
            location,
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn model_error(&self, e: ModelError) -> ConfigError {
        let key = match &e {
            ModelError::Strategy(StrategyError::InvalidProfile { id, field, .. }) => format!("graders.{id}.{field}"),
            ModelError::Strategy(_) => "strategies".into(),
            ModelError::Markov(MarkovError::InvalidParameter { path, .. }) => path.clone(),
            ModelError::Markov(MarkovError::RowSum { .. }) => "transitions".into(),
            ModelError::Markov(MarkovError::Horizon) => "cohort".into(),
            ModelError::UnknownParameter(p) => p.clone(),
            ModelError::UnknownStrategy(_) => "status_quo".into(),
            ModelError::InvalidValue { path, .. } => path.clone(),
        };
        let message = match &e {
            ModelError::Markov(MarkovError::InvalidParameter { message, .. }) => message.clone(),
            ModelError::Strategy(StrategyError::InvalidProfile { message, .. }) => message.clone(),
            ModelError::InvalidValue { message, .. } => message.clone(),
            other => other.to_string(),
        };
        self.invalid(&key, message)
    }

    fn build_model(&self, raw: &RawConfig, life_table: LifeTable) -> Result<Model, ConfigError> {
        let mut registry = GraderRegistry::new();
        for (id, g) in &raw.graders {
            let profile = GraderProfile {
                id: id.clone(),
                kind: g.kind,
                sensitivity: g.sensitivity,
                specificity: g.specificity,
                cost_per_read: g.cost_per_read,
                ungradable_rate: g.ungradable_rate,
                filter: g.filter,
            };
            registry
                .insert(profile)
                .map_err(|e| self.model_error(ModelError::Strategy(e)))?;
        }
        let mut strategies: Vec<StrategyDef> = Vec::new();
        for (i, s) in raw.strategies.iter().enumerate() {
            if strategies.iter().any(|o| o.id == s.id) {
                return Err(self.invalid(
                    &format!("strategies.{i}.id"),
                    format!("duplicate strategy id '{}'", s.id),
                ));
            }
            parse_strategy(&s.expr, &registry)
                .map_err(|e| self.invalid(&format!("strategies.{i}.expr"), e.to_string()))?;
            strategies.push(StrategyDef {
                id: s.id.clone(),
                label: s.label.clone().unwrap_or_else(|| s.id.clone()),
                expr: s.expr.clone(),
            });
        }
        if !strategies.iter().any(|s| s.id == raw.status_quo) {
            return Err(self.invalid("status_quo", format!("'{}' is not a listed strategy", raw.status_quo)));
        }
        let c = &raw.cohort;
        let params = MarkovParameters {
            transitions: raw.transitions.clone(),
            utilities: raw.utilities,
            costs: raw.costs,
            discounting: raw.discounting,
            cohort: CohortSpec {
                age_min: c.age_min,
                age_max: c.age_max,
                life_expectancy: c.life_expectancy,
                age_weights: c.age_weights.clone(),
                initial_state: c.initial_state,
                screening_prevalence: c.screening_prevalence,
            },
            life_table,
        };
        let model = Model {
            registry,
            params,
            strategies,
            status_quo: raw.status_quo.clone(),
            wtp: raw.wtp,
            cohort_size: c.size,
        };
        model.validate().map_err(|e| self.model_error(e))?;
        Ok(model)
    }

    fn check_analyses(&self, raw: &RawConfig, model: &Model) -> Result<(), ConfigError> {
        let psa = &raw.psa;
        if psa.draws == 0 {
            return Err(self.invalid("psa.draws", "must be at least 1"));
        }
        if !(psa.wtp_step > 0.0 && psa.wtp_max >= 0.0) {
            return Err(self.invalid(
                "psa.wtp_step",
                "WTP grid needs a positive step and non-negative maximum",
            ));
        }
        for (i, spec) in psa.parameters.iter().enumerate() {
            resolve(spec, model).map_err(|e| {
                let message = match e {
                    SensitivityError::Distribution { message, .. } => message,
                    other => other.to_string(),
                };
                self.invalid(&format!("psa.parameters.{i}"), message)
            })?;
        }
        if let Some(t) = &raw.tornado {
            for id in std::iter::once(&t.strategy).chain(t.comparator.as_ref()) {
                if model.strategy(id).is_err() {
                    return Err(self.invalid("tornado", format!("unknown strategy '{id}'")));
                }
            }
            for (i, p) in t.parameters.iter().enumerate() {
                model
                    .get_param(p)
                    .map_err(|e| self.invalid(&format!("tornado.parameters.{i}"), e.to_string()))?;
            }
            for (i, r) in t.ranges.iter().enumerate() {
                model
                    .get_param(&r.path)
                    .map_err(|e| self.invalid(&format!("tornado.ranges.{i}.path"), e.to_string()))?;
            }
        }
        if let Some(t) = &raw.threshold {
            model
                .get_param(&t.path)
                .map_err(|e| self.invalid("threshold.path", e.to_string()))?;
            if t.low.partial_cmp(&t.high) != Some(std::cmp::Ordering::Less) {
                return Err(self.invalid("threshold.low", "low must be below high"));
            }
            for id in t.strategies.iter().flatten() {
                if model.strategy(id).is_err() {
                    return Err(self.invalid("threshold.strategies", format!("unknown strategy '{id}'")));
                }
            }
        }
        if let Some(f) = &raw.sweep.focus {
            if model.strategy(f).is_err() {
                return Err(self.invalid("sweep.focus", format!("unknown strategy '{f}'")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct LifeTableRow {
    age: u32,
    mortality: f64,
}

/// Reads an `age,mortality` CSV. Returns the table and a canonical text
/// form used for hashing.
pub fn load_life_table(path: &Path) -> Result<(LifeTable, String), ConfigError> {
    let invalid = |line: Option<usize>, message: String| ConfigError::Invalid {
        location: Location {
            file: path.to_path_buf(),
            line,
        },
        key: "cohort.life_table".into(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let mut rows = Vec::new();
    for record in reader.deserialize::<LifeTableRow>() {
        let row = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            invalid(line, e.to_string())
        })?;
        rows.push((row.age, row.mortality));
    }
    let canonical: String = rows.iter().map(|(a, q)| format!("{a},{q}\n")).collect();
    let table = LifeTable::new(rows).map_err(|e| invalid(None, e.to_string()))?;
    Ok((table, canonical))
}
