mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{example_config, example_path};
use drscreen::config::load_config;
use drscreen::grid::{run_grid, Analysis, RunManifest, Selection};
use drscreen::markov::{AgeGroup, Frequency};
use drscreen::pipeline::{execute, Overrides};
use drscreen::StrategyDef;

fn drscreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drscreen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn overlay(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("overlay.toml");
    fs::write(&p, text).unwrap();
    p
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

/// Names of files whose contents differ, ignoring `skip`.
fn differing(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>, skip: &[&str]) -> Vec<String> {
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    a.iter()
        .filter(|(k, v)| !skip.contains(&k.as_str()) && b[*k] != **v)
        .map(|(k, _)| k.clone())
        .collect()
}

/// Data rows of a report, skipping the provenance line.
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let body = text.split_once('\n').unwrap().1;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn shipped_config_describes_nine_strategies() {
    let c = example_config();
    assert_eq!(c.model.strategies.len(), 9);
    assert_eq!(c.model.status_quo, "manual");
    assert_eq!(c.model.strategy("manual").unwrap().expr, "M·M+M2");
    assert_eq!(c.model.strategy("copilot").unwrap().expr, "AI·M+M2");
    assert_eq!(c.model.wtp.upper(), 38_052.0);
    assert_eq!(c.hash, load_config(&[example_path()]).unwrap().hash);
}

#[test]
fn overlays_change_values_and_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let o = overlay(dir.path(), "[graders.M2]\nsensitivity = 0.98\n");
    let base = example_config();
    let c = load_config(&[example_path(), o]).unwrap();
    assert_eq!(c.model.registry.get("M2").unwrap().sensitivity, 0.98);
    assert_eq!(c.model.registry.get("M2").unwrap().cost_per_read, 26.4);
    assert_ne!(c.hash, base.hash);
}

#[test]
fn filter_leaking_more_than_the_miss_rate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = overlay(dir.path(), "[graders.AI]\nsensitivity = 0.99\n");
    let e = load_config(&[example_path(), o]).unwrap_err();
    assert_eq!(e.key(), Some("graders.AI.filter.p_pass_given_positive"), "{e}");
}

#[test]
fn unknown_status_quo_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = overlay(dir.path(), "status_quo = \"nobody\"\n");
    let e = load_config(&[example_path(), o]).unwrap_err();
    assert_eq!(e.key(), Some("status_quo"), "{e}");
}

#[test]
fn validate_reports_the_loaded_configuration() {
    let out = drscreen(&["validate", "--config", example_path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["scenarios"], 270);
    assert_eq!(v["graders"], 3);
    assert_eq!(v["config_hash"], example_config().hash);
}

#[test]
fn invalid_configuration_exits_nonzero_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = overlay(dir.path(), "[utilities]\nblind = 1.5\n");
    let out = drscreen(&[
        "validate",
        "--config",
        example_path().to_str().unwrap(),
        "--config",
        o.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["status"], "error");
    assert_eq!(v["kind"], "config");
    assert_eq!(v["key"], "utilities.blind");
    assert_eq!(v["line"], 2);
}

#[test]
fn unknown_filters_exit_nonzero() {
    let cfg = example_path();
    let cfg = cfg.to_str().unwrap();
    for args in [
        vec!["run", "--config", cfg, "--strategies", "nope"],
        vec!["run", "--config", cfg, "--ages", "25"],
        vec!["run", "--config", cfg, "--frequencies", "every-9-years"],
        vec!["run", "--config", "/no/such/file.toml"],
    ] {
        let out = drscreen(&args);
        assert!(!out.status.success(), "{args:?}");
    }
}

#[test]
fn run_writes_the_full_grid_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example_path();
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        let _ = fs::remove_dir_all(&out_dir);
        let out = drscreen(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read_dir(&out_dir)
    };
    let files_a = run("a", "1");
    assert_eq!(differing(&files_a, &run("a", "1"), &[]), Vec::<String>::new());
    // Only the manifest echoes the worker count and output directory.
    assert_eq!(
        differing(&files_a, &run("b", "2"), &["manifest.csv"]),
        Vec::<String>::new()
    );
    let a = dir.path().join("a");
    for name in [
        "manifest.csv",
        "strategy_performance.csv",
        "grid.csv",
        "table1.csv",
        "frontier.csv",
    ] {
        assert!(files_a.contains_key(name), "{name}");
    }

    let hash = example_config().hash;
    for (name, bytes) in &files_a {
        let first = String::from_utf8_lossy(bytes).lines().next().unwrap().to_string();
        assert_eq!(first, format!("# seed=20240417 config_hash={hash}"), "{name}");
    }

    let (header, rows) = csv_rows(&a.join("grid.csv"));
    assert_eq!(rows.len(), 270);
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    let (freq, age, comp, status) = (col("frequency"), col("age_group"), col("comparator_id"), col("status"));
    for r in &rows {
        assert_eq!(r[status], "ok", "{r:?}");
        assert_eq!(r[comp], format!("manual|{}|{}", r[freq], r[age]));
    }
}

#[test]
fn psa_output_is_seeded_and_normalised() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example_path();
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let _ = fs::remove_dir_all(&out_dir);
        let out = drscreen(&[
            "psa",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--draws",
            "16",
            "--seed",
            seed,
            "--write-draws",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read_dir(&out_dir)
    };
    let a = run("a", "11");
    assert_eq!(differing(&a, &run("a", "11"), &[]), Vec::<String>::new());
    assert_eq!(differing(&a, &run("b", "11"), &["manifest.csv"]), Vec::<String>::new());
    assert_ne!(a["psa_draws.csv"], run("c", "12")["psa_draws.csv"]);

    let (header, rows) = csv_rows(&dir.path().join("a/ceac.csv"));
    let (w, p) = (
        header.iter().position(|h| h == "wtp").unwrap(),
        header.iter().position(|h| h == "probability").unwrap(),
    );
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for r in &rows {
        *sums.entry(r[w].clone()).or_default() += r[p].parse::<f64>().unwrap();
    }
    assert!(!sums.is_empty());
    for (wtp, s) in sums {
        assert!((s - 1.0).abs() <= 1e-9, "{wtp}: {s}");
    }
}

#[test]
fn subcommands_write_their_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = example_path();
    let cfg = cfg.to_str().unwrap();
    for (cmd, expected) in [
        ("perf", vec!["strategy_performance.csv"]),
        ("frontier", vec!["frontier.csv"]),
        ("tornado", vec!["tornado.csv", "threshold.csv"]),
        ("sweep", vec!["horizon.csv", "horizon_crossings.csv"]),
        ("ceac", vec!["ceac.csv", "ceac_switches.csv"]),
    ] {
        let out_dir = dir.path().join(cmd);
        let mut args = vec![cmd, "--config", cfg, "--out", out_dir.to_str().unwrap()];
        if cmd == "ceac" {
            args.extend(["--draws", "8"]);
        }
        let out = drscreen(&args);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let files = read_dir(&out_dir);
        for f in expected {
            assert!(files.contains_key(f), "{cmd}: {f}");
        }
    }
}

fn manifest(analyses: &[Analysis]) -> RunManifest {
    RunManifest {
        config_paths: vec![example_path()],
        selection: Selection::default(),
        seed: 1,
        out_dir: PathBuf::from("unused"),
        workers: Some(1),
        analyses: analyses.iter().copied().collect(),
    }
}

#[test]
fn no_analyses_writes_only_the_manifest() {
    let config = example_config();
    let reports = execute(&config, &manifest(&[]), &Overrides::default()).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].name, "manifest.csv");
}

#[test]
fn failing_scenarios_become_error_rows() {
    let mut model = example_config().model;
    // Bypasses load-time validation to force an evaluation failure.
    model.strategies.push(StrategyDef {
        id: "broken".into(),
        label: "broken".into(),
        expr: "AI+ZZ".into(),
    });
    let sel = Selection {
        frequencies: vec![Frequency::Every(1), Frequency::OneOff],
        age_groups: vec![AgeGroup::new(50).unwrap()],
        ..Selection::default()
    };
    let grid = run_grid(&model, &sel, Some(1)).unwrap();
    assert_eq!(grid.rows.len(), 20);
    let failures: Vec<_> = grid.failures().collect();
    assert_eq!(failures.len(), 2);
    assert!(failures.iter().all(|r| r.strategy == "broken"));
    assert!(grid.row("broken|annual|50-79").unwrap().outcome.is_err());
}
