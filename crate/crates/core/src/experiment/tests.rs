use super::*;
use crate::capacity::SelectionSpec;
use crate::channel::SystemDims;
use crate::genetic::GaConfig;
use crate::ser::Combining;

fn tiny(name: &str, method: Method, mode: TransmissionMode) -> Scenario {
    Scenario {
        name: name.into(),
        dims: SystemDims::uniform(4, 4, 2).unwrap(),
        spec: SelectionSpec::uniform(2, 2, 2),
        ga: GaConfig::paper_4t4r_2t2r(),
        snr_grid_db: vec![0.0, 10.0],
        trials: 5,
        mode,
        method,
        master_seed: 17,
        enumeration_cap: 1_000,
        ser: None,
    }
}

#[test]
fn capacity_accounting_and_dominance() {
    let s = tiny("t", Method::Both, TransmissionMode::Asynchronous);
    let rep = run_capacity_experiment(&s).unwrap();
    let per_method = s.trials * s.snr_grid_db.len() * s.dims.num_receivers();
    assert_eq!(rep.rows.len(), 2 * per_method);
    assert_eq!(rep.rows.iter().filter(|r| r.method == SelectionMethod::Ga).count(), per_method);
    assert_eq!(rep.summaries.len(), 4);
    assert_eq!(rep.gaps.len(), 2);
    for g in &rep.gaps {
        assert_eq!(g.dominance_violations, 0);
        assert!(g.mean_ratio <= 1.0 + 1e-12 && g.mean_ratio > 0.8);
    }
    // Exhaustive: C(4,2)·(C(4,2)+C(4,2)) per draw.
    assert_eq!(rep.exhaustive_evaluations, 72 * 10);
    let ga: Vec<_> = rep.rows.iter().filter(|r| r.method == SelectionMethod::Ga).collect();
    let ex: Vec<_> = rep.rows.iter().filter(|r| r.method == SelectionMethod::Exhaustive).collect();
    for (g, e) in ga.iter().zip(&ex) {
        assert_eq!((g.snr_db, g.trial, g.receiver), (e.snr_db, e.trial, e.receiver));
        assert!(g.capacity <= e.capacity + 1e-12);
    }
}

#[test]
fn asynchronous_min_rate_dominates_synchronous_per_trial() {
    let a = run_capacity_experiment(&tiny("x", Method::Exhaustive, TransmissionMode::Asynchronous)).unwrap();
    let s = run_capacity_experiment(&tiny("x", Method::Exhaustive, TransmissionMode::Synchronous)).unwrap();
    let min_by_trial = |rep: &CapacityReport| {
        rep.rows.chunks(2).map(|c| c[0].capacity.min(c[1].capacity)).collect::<Vec<_>>()
    };
    for (x, y) in min_by_trial(&a).iter().zip(min_by_trial(&s)) {
        assert!(*x >= y - 1e-12);
    }
}

#[test]
fn results_are_deterministic_and_scenario_local() {
    let s = tiny("alpha", Method::Ga, TransmissionMode::Synchronous);
    let a = run_capacity_experiment(&s).unwrap();
    let b = run_capacity_experiment(&s).unwrap();
    assert_eq!(a.rows, b.rows);
    let both = run_scenarios(&[tiny("beta", Method::Ga, TransmissionMode::Asynchronous), s.clone()]).unwrap();
    assert_eq!(both.scenarios[1].capacity.as_ref().unwrap().rows, a.rows);
    let other_seed = Scenario { master_seed: 18, ..s };
    assert_ne!(run_capacity_experiment(&other_seed).unwrap().rows, a.rows);
}

#[test]
fn enumeration_cap_is_enforced() {
    let s = Scenario {
        enumeration_cap: 71,
        ..tiny("cap", Method::Both, TransmissionMode::Asynchronous)
    };
    let err = run_capacity_experiment(&s).unwrap_err();
    assert!(matches!(err, Error::EnumerationCap { required: 72, cap: 71 }));
    assert!(err.to_string().contains("71"));
    let ga_only = Scenario {
        method: Method::Ga,
        ..s
    };
    assert!(run_capacity_experiment(&ga_only).is_ok());
}

#[test]
fn ser_experiment_rows_and_limits() {
    let s = Scenario {
        snr_grid_db: vec![0.0, 10.0, 20.0, 200.0],
        trials: 1,
        ..tiny("ser", Method::Both, TransmissionMode::Asynchronous)
    };
    let link = LinkSimConfig {
        symbols_per_block: 500,
        num_blocks: 40,
        combining: Combining::Selection,
        seed: 0,
    };
    let rep = run_ser_experiment(&s, &link, 16, None).unwrap();
    assert_eq!(rep.rows.len(), 4 * 3);
    assert_eq!(rep.analytic_branches, 2);
    let ga: Vec<&SerRow> = rep.rows.iter().filter(|r| r.method == "ga").collect();
    assert!(ga.iter().all(|r| r.symbols == 500 * 40 * 2));
    assert_eq!(ga[3].errors, 0);
    for w in ga.windows(2) {
        assert!(w[1].ser <= w[0].ser + w[0].ci_halfwidth + w[1].ci_halfwidth);
    }
    let analytic: Vec<&SerRow> = rep.rows.iter().filter(|r| r.method == "analytic").collect();
    assert!(analytic.windows(2).all(|w| w[1].ser < w[0].ser));
    assert_eq!(rep.rows, run_ser_experiment(&s, &link, 16, None).unwrap().rows);
}

#[test]
fn csv_files_are_byte_identical_and_schema_conformant() {
    let mut s = tiny("csv test", Method::Both, TransmissionMode::Asynchronous);
    s.ser = Some(SerExperiment {
        order: 16,
        symbols_per_block: 100,
        num_blocks: 4,
        combining: Combining::Selection,
        analytic_branches: None,
        variant: Default::default(),
    });
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let f1 = emit_csv(&run_scenarios(std::slice::from_ref(&s)).unwrap(), d1.path()).unwrap();
    let f2 = emit_csv(&run_scenarios(std::slice::from_ref(&s)).unwrap(), d2.path()).unwrap();
    assert_eq!(f1.len(), 2);
    for (a, b) in f1.iter().zip(&f2) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
    let cap = std::fs::read_to_string(&f1[0]).unwrap();
    let mut lines = cap.lines();
    assert_eq!(lines.next(), Some(CAPACITY_HEADER));
    assert_eq!(lines.count(), 2 * 5 * 2 * 2);
    let ser = std::fs::read_to_string(&f1[1]).unwrap();
    assert_eq!(ser.lines().next(), Some(SER_HEADER));
    assert!(f1[0].ends_with("csv_test_capacity.csv"));
}

#[test]
fn empty_report_writes_header_only_files() {
    let s = tiny("empty", Method::Ga, TransmissionMode::Asynchronous);
    let report = RunReport {
        scenarios: vec![ScenarioReport {
            scenario: s,
            capacity: Some(CapacityReport {
                mode: TransmissionMode::Asynchronous,
                rows: vec![],
                summaries: vec![],
                gaps: vec![],
                ga_evaluations: 0,
                exhaustive_evaluations: 0,
                wall_clock_s: 0.0,
            }),
            ser: Some(SerReport {
                rows: vec![],
                analytic_branches: 1,
                wall_clock_s: 0.0,
            }),
        }],
    };
    let dir = tempfile::tempdir().unwrap();
    let files = emit_csv(&report, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(&files[0]).unwrap(), format!("{CAPACITY_HEADER}\n"));
    assert_eq!(std::fs::read_to_string(&files[1]).unwrap(), format!("{SER_HEADER}\n"));
    let manifest = write_manifest(&report, dir.path(), "schema_version = 1", Some(4), 0.5, &files).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(v["master_seed_override"], 4);
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);
}
