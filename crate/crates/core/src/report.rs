//! CSV reports. Every file starts with a `# seed=... config_hash=...` line,
//! then a header row.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cea::{CeaRecord, FrontierStatus, Icer};
use crate::grid::{FrontierView, GridResult, RunManifest};
use crate::markov::ScenarioResult;
use crate::model::{Cell, Model, ModelError};
use crate::sensitivity::{CeacPoint, HorizonCrossing, HorizonRow, PsaResult, PsaSummaryRow, SwitchPoint, Tornado};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Identifies the run that produced a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn line(&self) -> String {
        format!("# seed={} config_hash={}\n", self.seed, self.config_hash)
    }
}

/// A rendered CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub contents: String,
}

impl Report {
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, ReportError> {
        let path = dir.join(&self.name);
        fs::write(&path, &self.contents).map_err(|e| ReportError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(path)
    }
}

/// Creates `dir` if needed and writes the reports in order.
pub fn write_reports(dir: &Path, reports: &[Report]) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|e| ReportError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    reports.iter().map(|r| r.write_to(dir)).collect()
}

fn render(name: &str, prov: &Provenance, header: &[&str], rows: Vec<Vec<String>>) -> Report {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    // Writing to memory cannot fail.
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8");
    Report {
        name: name.to_string(),
        contents: prov.line() + &body,
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn manifest_report(manifest: &RunManifest, prov: &Provenance) -> Report {
    let sel = &manifest.selection;
    let join = |items: Vec<String>| items.join(";");
    let rows = vec![
        (
            "config",
            join(manifest.config_paths.iter().map(|p| p.display().to_string()).collect()),
        ),
        (
            "strategies",
            if sel.strategies.is_empty() {
                "all".to_string()
            } else {
                join(sel.strategies.clone())
            },
        ),
        (
            "frequencies",
            join(sel.frequencies.iter().map(|f| f.to_string()).collect()),
        ),
        (
            "age_groups",
            join(sel.age_groups.iter().map(|a| a.to_string()).collect()),
        ),
        (
            "horizon",
            match sel.horizon {
                crate::markov::Horizon::LifeExpectancy => "life-expectancy".to_string(),
                crate::markov::Horizon::Years(n) => n.to_string(),
            },
        ),
        ("perspective", sel.perspective.to_string()),
        ("seed", manifest.seed.to_string()),
        ("out", manifest.out_dir.display().to_string()),
        (
            "analyses",
            join(manifest.analyses.iter().map(|a| a.name().to_string()).collect()),
        ),
    ];
    render(
        "manifest.csv",
        prov,
        &["key", "value"],
        rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect(),
    )
}

pub fn strategy_performance_report(model: &Model, prov: &Provenance) -> Result<Report, ReportError> {
    let prev = model.params.cohort.screening_prevalence;
    let mut rows = Vec::new();
    for s in &model.strategies {
        let p = model.performance(&s.id)?;
        let acc = p.accuracy(prev).map_err(ModelError::from)?;
        rows.push(vec![
            s.id.clone(),
            s.label.clone(),
            s.expr.clone(),
            num(p.sensitivity),
            num(p.specificity),
            num(acc),
            num(p.expected_cost_per_case),
            num(p.human_reads_per_case),
            num(p.ai_reads_per_case),
        ]);
    }
    Ok(render(
        "strategy_performance.csv",
        prov,
        &[
            "strategy",
            "label",
            "expr",
            "sensitivity",
            "specificity",
            "accuracy",
            "cost_per_case",
            "human_reads_per_case",
            "ai_reads_per_case",
        ],
        rows,
    ))
}

const GRID_HEADER: &[&str] = &[
    "scenario_id",
    "strategy",
    "frequency",
    "age_group",
    "status",
    "error",
    "total_cost",
    "screening_cost",
    "referral_cost",
    "treatment_cost",
    "blindness_cost",
    "qalys",
    "blindness_free_years",
    "blindness_cases",
    "detected_vtdr",
    "treated_vtdr",
    "comparator_id",
    "delta_cost",
    "delta_qalys",
    "delta_blindness_free_years",
    "icer",
    "cost_per_blindness_year_averted",
    "nmb_1gdp",
    "nmb_3gdp",
    "ce_class",
];

fn result_fields(r: &ScenarioResult) -> Vec<String> {
    vec![
        num(r.total_cost),
        num(r.costs.screening),
        num(r.costs.referral),
        num(r.costs.treatment),
        num(r.costs.blindness),
        num(r.qalys),
        num(r.blindness_free_years),
        num(r.blindness_cases),
        num(r.detected_vtdr),
        num(r.treated_vtdr),
    ]
}

fn record_fields(c: &CeaRecord) -> Vec<String> {
    vec![
        c.comparator_id.clone(),
        num(c.delta_cost),
        num(c.delta_qalys),
        num(c.delta_blindness_free_years),
        c.icer.to_string(),
        c.cost_per_blindness_year_averted.to_string(),
        num(c.nmb_lower),
        num(c.nmb_upper),
        c.ce_class.to_string(),
    ]
}

pub fn grid_report(grid: &GridResult, prov: &Provenance) -> Report {
    let rows = grid
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.scenario_id.clone(),
                r.strategy.clone(),
                r.cell.frequency.to_string(),
                r.cell.age_group.to_string(),
            ];
            match &r.outcome {
                Ok((res, rec)) => {
                    row.extend(["ok".to_string(), String::new()]);
                    row.extend(result_fields(res));
                    row.extend(record_fields(rec));
                }
                Err(e) => {
                    row.extend(["error".to_string(), e.clone()]);
                    row.resize(GRID_HEADER.len(), String::new());
                }
            }
            row
        })
        .collect();
    render("grid.csv", prov, GRID_HEADER, rows)
}

fn status_name(s: FrontierStatus) -> &'static str {
    match s {
        FrontierStatus::Frontier => "frontier",
        FrontierStatus::StrictlyDominated => "strictly-dominated",
        FrontierStatus::ExtendedlyDominated => "extendedly-dominated",
        FrontierStatus::Duplicate => "duplicate",
    }
}

/// All points of every view, in input order, with their frontier status.
pub fn frontier_report(views: &[FrontierView], prov: &Provenance) -> Report {
    let mut rows = Vec::new();
    for v in views {
        for e in &v.frontier.entries {
            rows.push(vec![
                v.view.clone(),
                e.id.clone(),
                num(e.cost),
                num(e.effect),
                status_name(e.status).to_string(),
                opt(e.icer_from_previous),
            ]);
        }
    }
    render(
        "frontier.csv",
        prov,
        &["view", "scenario_id", "cost", "qalys", "status", "icer_from_previous"],
        rows,
    )
}

/// Status quo plus each other strategy against it, in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub cell: Cell,
    pub status_quo: (String, ScenarioResult),
    pub comparisons: Vec<(String, ScenarioResult, CeaRecord)>,
}

impl Table1 {
    pub fn build(model: &Model, cell: &Cell) -> Result<Self, ModelError> {
        let sq_id = model.status_quo.clone();
        let sq = cell.evaluate(model, &sq_id)?;
        let sq_scenario = cell.scenario_id(&sq_id);
        let mut comparisons = Vec::new();
        for s in &model.strategies {
            if s.id == sq_id {
                continue;
            }
            let r = cell.evaluate(model, &s.id)?;
            let rec = CeaRecord::compare(&cell.scenario_id(&s.id), &r, &sq_scenario, &sq, &model.wtp);
            comparisons.push((s.id.clone(), r, rec));
        }
        Ok(Table1 {
            cell: *cell,
            status_quo: (sq_id, sq),
            comparisons,
        })
    }

    pub fn comparison(&self, strategy: &str) -> Option<&(String, ScenarioResult, CeaRecord)> {
        self.comparisons.iter().find(|c| c.0 == strategy)
    }
}

fn icer_cell(i: &Icer) -> String {
    match i {
        Icer::Ratio { value, .. } => num(*value),
        other => other.to_string(),
    }
}

/// Table-shaped report: one column for the status quo (absolute values),
/// then one per strategy (differences from the status quo). Costs in US$
/// million.
pub fn table1_report(t: &Table1, model: &Model, prov: &Provenance) -> Report {
    type Field = fn(&ScenarioResult) -> f64;
    type Summary = fn(&CeaRecord) -> String;
    const MILLION: f64 = 1e6;
    let outcome_rows: [(&str, &str, Field, f64); 10] = [
        ("VTDR cases", "Blindness cases", |r| r.blindness_cases, 1.0),
        ("VTDR cases", "Detected VTDR cases", |r| r.detected_vtdr, 1.0),
        ("VTDR cases", "Treated VTDR cases", |r| r.treated_vtdr, 1.0),
        ("Costs (US$ million)", "Screening cost", |r| r.costs.screening, MILLION),
        ("Costs (US$ million)", "Referral cost", |r| r.costs.referral, MILLION),
        ("Costs (US$ million)", "Treatment cost", |r| r.costs.treatment, MILLION),
        ("Costs (US$ million)", "Blindness cost", |r| r.costs.blindness, MILLION),
        ("Costs (US$ million)", "Total cost", |r| r.total_cost, MILLION),
        ("Effectiveness", "QALYs", |r| r.qalys, 1.0),
        (
            "Effectiveness",
            "Years without blindness",
            |r| r.blindness_free_years,
            1.0,
        ),
    ];
    let sq = &t.status_quo.1;
    let mut rows = Vec::new();
    for (group, label, f, scale) in outcome_rows {
        let mut row = vec![group.to_string(), label.to_string(), num(f(sq) / scale)];
        row.extend(t.comparisons.iter().map(|(_, r, _)| num((f(r) - f(sq)) / scale)));
        rows.push(row);
    }
    let evaluation: [(&str, Summary); 3] = [
        ("ICER (US$ per QALY)", |c| icer_cell(&c.icer)),
        ("Cost per blindness year averted", |c| {
            icer_cell(&c.cost_per_blindness_year_averted)
        }),
        ("NMB at 3x GDP (US$ million)", |c| num(c.nmb_upper / MILLION)),
    ];
    for (label, f) in evaluation {
        let mut row = vec![
            "Cost-effectiveness evaluation".to_string(),
            label.to_string(),
            String::new(),
        ];
        row.extend(t.comparisons.iter().map(|(_, _, c)| f(c)));
        rows.push(row);
    }
    let mut row = vec![
        "Cost-effectiveness evaluation".to_string(),
        "CE class".to_string(),
        String::new(),
    ];
    row.extend(t.comparisons.iter().map(|(_, _, c)| c.ce_class.to_string()));
    rows.push(row);

    let label_of = |id: &str| model.strategy(id).map(|s| s.label.clone()).unwrap_or_default();
    let mut header: Vec<String> = vec!["group".into(), "row".into(), t.status_quo.0.clone()];
    header.extend(t.comparisons.iter().map(|(id, _, _)| id.clone()));
    // Second row carries the display labels.
    let mut labels = vec![String::new(), "label".to_string(), label_of(&t.status_quo.0)];
    labels.extend(t.comparisons.iter().map(|(id, _, _)| label_of(id)));
    rows.insert(0, labels);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    render("table1.csv", prov, &header, rows)
}

fn interval_fields(i: Option<&crate::sensitivity::Interval>) -> [String; 3] {
    match i {
        Some(i) => [num(i.mean), num(i.lower), num(i.upper)],
        None => Default::default(),
    }
}

pub fn psa_summary_report(rows: &[PsaSummaryRow], prov: &Provenance) -> Report {
    let out = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.strategy.clone()];
            row.extend(interval_fields(Some(&r.cost)));
            row.extend(interval_fields(Some(&r.qalys)));
            row.extend(interval_fields(r.delta_cost.as_ref()));
            row.extend(interval_fields(r.delta_qalys.as_ref()));
            row
        })
        .collect();
    render(
        "psa_summary.csv",
        prov,
        &[
            "strategy",
            "cost_mean",
            "cost_lower",
            "cost_upper",
            "qalys_mean",
            "qalys_lower",
            "qalys_upper",
            "delta_cost_mean",
            "delta_cost_lower",
            "delta_cost_upper",
            "delta_qalys_mean",
            "delta_qalys_lower",
            "delta_qalys_upper",
        ],
        out,
    )
}

pub fn psa_draws_report(psa: &PsaResult, prov: &Provenance) -> Report {
    let mut rows = Vec::with_capacity(psa.draws.len() * psa.strategies.len());
    for (d, draw) in psa.draws.iter().enumerate() {
        for (s, o) in psa.strategies.iter().zip(draw) {
            rows.push(vec![d.to_string(), s.clone(), num(o.cost), num(o.qalys)]);
        }
    }
    render("psa_draws.csv", prov, &["draw", "strategy", "cost", "qalys"], rows)
}

pub fn ceac_report(points: &[CeacPoint], prov: &Provenance) -> Report {
    let rows = points
        .iter()
        .map(|p| vec![num(p.wtp), p.strategy.clone(), num(p.probability)])
        .collect();
    render("ceac.csv", prov, &["wtp", "strategy", "probability"], rows)
}

pub fn wtp_switch_report(points: &[SwitchPoint], prov: &Provenance) -> Report {
    let rows = points
        .iter()
        .map(|p| vec![num(p.value), p.from.clone(), p.to.clone()])
        .collect();
    render("ceac_switches.csv", prov, &["wtp", "from", "to"], rows)
}

pub fn tornado_report(t: &Tornado, prov: &Provenance) -> Report {
    let mut rows: Vec<Vec<String>> = t
        .bars
        .iter()
        .map(|b| {
            vec![
                b.path.clone(),
                num(b.base),
                num(b.low),
                num(b.high),
                b.icer_low.to_string(),
                b.icer_high.to_string(),
                num(b.nmb_low),
                num(b.nmb_high),
                num(b.width),
                String::new(),
            ]
        })
        .collect();
    for f in &t.failures {
        let mut row = vec![f.path.clone()];
        row.resize(9, String::new());
        row.push(f.message.clone());
        rows.push(row);
    }
    render(
        "tornado.csv",
        prov,
        &[
            "parameter",
            "base",
            "low",
            "high",
            "icer_low",
            "icer_high",
            "nmb_low",
            "nmb_high",
            "width",
            "error",
        ],
        rows,
    )
}

pub fn threshold_report(path: &str, points: &[SwitchPoint], prov: &Provenance) -> Report {
    let rows = points
        .iter()
        .map(|p| vec![path.to_string(), num(p.value), p.from.clone(), p.to.clone()])
        .collect();
    render("threshold.csv", prov, &["parameter", "value", "from", "to"], rows)
}

pub fn horizon_report(rows: &[HorizonRow], prov: &Provenance) -> Report {
    let out = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.horizon.to_string(), r.record.scenario_id.clone()];
            row.extend(record_fields(&r.record));
            row
        })
        .collect();
    render(
        "horizon.csv",
        prov,
        &[
            "horizon_years",
            "scenario_id",
            "comparator_id",
            "delta_cost",
            "delta_qalys",
            "delta_blindness_free_years",
            "icer",
            "cost_per_blindness_year_averted",
            "nmb_1gdp",
            "nmb_3gdp",
            "ce_class",
        ],
        out,
    )
}

pub fn horizon_crossing_report(crossings: &[HorizonCrossing], prov: &Provenance) -> Report {
    let rows = crossings
        .iter()
        .map(|c| {
            vec![
                c.strategy.clone(),
                num(c.threshold),
                c.from_horizon.map(|h| h.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    render(
        "horizon_crossings.csv",
        prov,
        &["scenario_id", "threshold", "from_horizon"],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{run_grid, Selection};
    use crate::markov::{AgeGroup, Frequency};
    use crate::model::fixtures::small_model;

    fn prov() -> Provenance {
        Provenance {
            seed: 7,
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn every_report_starts_with_provenance_then_header() {
        let m = small_model();
        let sel = Selection {
            age_groups: vec![AgeGroup::new(60).unwrap()],
            frequencies: vec![Frequency::Every(1)],
            ..Selection::default()
        };
        let g = run_grid(&m, &sel, Some(1)).unwrap();
        let r = grid_report(&g, &prov());
        let mut lines = r.contents.lines();
        assert_eq!(lines.next(), Some("# seed=7 config_hash=abc"));
        assert!(lines.next().unwrap().starts_with("scenario_id,strategy,"));
        assert_eq!(lines.count(), m.strategies.len());
    }

    #[test]
    fn error_rows_keep_all_columns() {
        let m = small_model();
        let mut g = run_grid(
            &m,
            &Selection {
                age_groups: vec![AgeGroup::new(60).unwrap()],
                frequencies: vec![Frequency::OneOff],
                ..Selection::default()
            },
            None,
        )
        .unwrap();
        g.rows[1].outcome = Err("boom, with comma".into());
        let r = grid_report(&g, &prov());
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(r.contents.as_bytes());
        let recs: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(recs[1].len(), GRID_HEADER.len());
        assert_eq!(&recs[1][4], "error");
        assert_eq!(&recs[1][5], "boom, with comma");
    }

    #[test]
    fn table1_has_one_column_per_strategy() {
        let m = small_model();
        let cell = Cell::new(Frequency::Every(1), AgeGroup::new(60).unwrap());
        let t = Table1::build(&m, &cell).unwrap();
        let r = table1_report(&t, &m, &prov());
        let header = r.contents.lines().nth(1).unwrap();
        assert_eq!(header.split(',').count(), 2 + m.strategies.len());
        assert!(r.contents.contains("Cost-effectiveness evaluation,ICER"));
    }
}
