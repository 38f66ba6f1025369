use std::path::Path;

use serde_json::json;
use tempfile::TempDir;

use wdnd_core::experiment::{gain_pct, run_experiment, summarize, ExperimentPlan, Seeds, SummaryError};
use wdnd_core::io::write_instance;
use wdnd_core::{synth, RunRecord, RunStatus};

fn instance_dir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut file = std::fs::File::create(dir.path().join("grid.inp")).unwrap();
    write_instance(&synth::grid(60.0, 2, 3, 150.0, 0.002), &mut file).unwrap();
    dir
}

fn plan(dir: &Path, extra: serde_json::Value) -> ExperimentPlan {
    let mut value = json!({
        "instances": [dir.join("grid.inp")],
        "time_limits": [60.0],
        "max_iterations": 5,
        "jobs": 1,
    });
    value
        .as_object_mut()
        .unwrap()
        .extend(extra.as_object().unwrap().clone());
    serde_json::from_value(value).unwrap()
}

#[test]
fn plan_defaults() {
    let p: ExperimentPlan = serde_json::from_value(json!({ "instances": ["a.inp"] })).unwrap();
    assert_eq!(p.time_limits, [60.0, 180.0, 300.0, 600.0]);
    assert_eq!(p.seeds, Seeds::Count(10));
    assert_eq!((p.alpha, p.factor, p.pool), (0.05, 4, 3));
    assert!(serde_json::from_value::<ExperimentPlan>(json!({ "instances": [], "bogus": 1 })).is_err());
}

#[test]
fn one_record_per_seed_in_order() {
    let dir = instance_dir();
    let records = run_experiment(&plan(dir.path(), json!({}))).unwrap();
    assert_eq!(records.len(), 10);
    for (seed, r) in records.iter().enumerate() {
        assert_eq!(
            (r.instance_id.as_str(), r.seed, r.variant.as_str()),
            ("grid", seed as u64, "full")
        );
        assert_eq!(r.status, RunStatus::Ok);
        assert_eq!(r.iterations, 5);
        assert!(r.best_cost.unwrap() > 0.0);
        assert!(r.simulator_calls >= r.tested_solutions);
    }
}

#[test]
fn capped_runs_are_reproducible_across_thread_counts() {
    let dir = instance_dir();
    let extra = json!({ "seeds": [3, 7], "variants": ["full", "base"] });
    let strip = |mut rs: Vec<RunRecord>| {
        rs.iter_mut().for_each(|r| r.time_to_best_s = 0.0);
        rs
    };
    let a = strip(run_experiment(&plan(dir.path(), extra.clone())).unwrap());
    let mut threaded = plan(dir.path(), extra);
    threaded.jobs = 3;
    let b = strip(run_experiment(&threaded).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
}

#[test]
fn unreadable_instance_gives_an_error_record() {
    let dir = instance_dir();
    let mut p = plan(dir.path(), json!({ "seeds": 2 }));
    p.instances.insert(0, dir.path().join("missing.inp"));
    let records = run_experiment(&p).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0].instance_id, "missing");
    assert_eq!(records[0].status, RunStatus::Error);
    assert!(records[0].error.is_some());
    assert!(records[1..].iter().all(|r| r.status == RunStatus::Ok));
}

#[test]
fn empty_plan_is_rejected() {
    let dir = instance_dir();
    assert!(run_experiment(&plan(dir.path(), json!({ "seeds": [] }))).is_err());
    assert!(run_experiment(&plan(dir.path(), json!({ "catalog": dir.path().join("none.csv") }))).is_err());
}

fn rec(inst: &str, seed: u64, variant: &str, cost: Option<f64>) -> RunRecord {
    RunRecord {
        instance_id: inst.into(),
        seed,
        time_limit_s: 60.0,
        variant: variant.into(),
        best_cost: cost,
        time_to_best_s: 1.0,
        iterations: 10,
        simulator_calls: 100,
        tested_solutions: 20,
        feasible_fraction: 0.5,
        status: if cost.is_some() {
            RunStatus::Ok
        } else {
            RunStatus::Error
        },
        error: None,
    }
}

#[test]
fn summary_of_two_variants() {
    let records = vec![
        rec("a", 0, "base", Some(100.0)),
        rec("a", 1, "base", Some(120.0)),
        rec("a", 0, "full", Some(95.0)),
        rec("a", 1, "full", Some(105.0)),
        rec("a", 2, "full", None),
    ];
    let s = summarize(&records, None).unwrap();
    assert_eq!(s.notes, ["1 failed runs skipped"]);
    let full = s.cells.iter().find(|c| c.variant == "full").unwrap();
    assert_eq!((full.runs, full.best_cost, full.average_cost), (2, 95.0, 100.0));
    assert!((full.average_deviation_pct - 100.0 * 5.0 / 95.0).abs() < 1e-12);
    let base = s.cells.iter().find(|c| c.variant == "base").unwrap();
    assert!((base.average_deviation_pct - (100.0 * 5.0 / 95.0 + 100.0 * 25.0 / 95.0) / 2.0).abs() < 1e-12);
    assert_eq!(s.gains.len(), 1);
    let g = &s.gains[0];
    assert_eq!((g.variant.as_str(), g.baseline.as_str()), ("full", "base"));
    assert!((g.best_gain_pct - 5.0).abs() < 1e-12);
    assert!((g.average_gain_pct - gain_pct(100.0, 110.0)).abs() < 1e-12);
}

#[test]
fn summary_errors() {
    assert!(matches!(
        summarize(&[rec("a", 0, "full", None)], None),
        Err(SummaryError::Empty)
    ));
    let two = [rec("a", 0, "base", Some(1.0)), rec("a", 0, "full", Some(1.0))];
    assert!(matches!(
        summarize(&two, Some("pool-only")),
        Err(SummaryError::MissingBaseline(_))
    ));
    let unpaired = [rec("a", 0, "base", Some(1.0)), rec("a", 1, "full", Some(1.0))];
    assert!(matches!(summarize(&unpaired, None), Err(SummaryError::Pairing(_))));
    let lonely = [rec("a", 0, "base", Some(1.0)), rec("b", 0, "full", Some(1.0))];
    assert!(matches!(summarize(&lonely, None), Err(SummaryError::Pairing(_))));
}
