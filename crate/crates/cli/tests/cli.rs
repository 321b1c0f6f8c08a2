use std::process::Command;

use ambient_cli::{
    bundled, load_scenario, parse_scenario, verify, RunOptions, ScenarioError, Suite,
    ToleranceSource, VerificationReport,
};
use ambient_core::GeomError;

const FLAT_ZERO: &str = r#"
name = "flat_zero"
[manifold]
coordinates = ["x", "y"]
bounds = [[-1, 1], [-1, 1]]
metric = [["1", "0"], ["0", "1"]]
[alpha]
components = [["1", "0"], ["0", "1"]]
epsilon = 1.0
[scale]
u = ["0"]
[suites]
run = ["ambient_axioms", "connection", "ricci_Q", "weingarten", "recovery", "cotton", "gauss", "fibers"]
[sampling]
seed = 3
points = 30
points_per_scale = 30
[expectations]
flat_moebius = true
ricci_flat = true
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ambient"))
}

fn quick() -> RunOptions {
    RunOptions {
        samples: Some(12),
        ..RunOptions::default()
    }
}

#[test]
fn sphere_example_loads_with_expected_shape() {
    let s = load_scenario("sphere_example").unwrap();
    assert_eq!(s.dim(), 2);
    assert_eq!(s.alpha.epsilon(), 2.0);
    assert_eq!(s.scales.len(), 5);
    assert!(s.embedding.is_some() && s.gauss_bonnet.is_some());
}

#[test]
fn every_bundled_scenario_parses() {
    for (name, text) in bundled::BUNDLED {
        let s = parse_scenario(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(&s.name, name);
        assert_eq!(s.scales.len(), 5, "{name}");
    }
}

#[test]
fn zero_epsilon_is_an_input_error() {
    let text = FLAT_ZERO.replace("epsilon = 1.0", "epsilon = 0");
    assert!(
        matches!(parse_scenario(&text), Err(ScenarioError::Invalid { key, .. }) if key == "alpha.epsilon")
    );
}

#[test]
fn parse_errors_carry_location() {
    let text = FLAT_ZERO.replace(
        r#"metric = [["1", "0"], ["0", "1"]]"#,
        r#"metric = [["1", "0"], ["0", "x +"]]"#,
    );
    match parse_scenario(&text) {
        Err(ScenarioError::Geometry {
            key,
            source: GeomError::Syntax { line, column, .. },
        }) => {
            assert_eq!(key, "manifold.metric");
            assert_eq!((line, column), (1, 4));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let text = FLAT_ZERO.replace(
        r#"components = [["1", "0"], ["0", "1"]]"#,
        r#"components = [["1"]]"#,
    );
    assert!(
        matches!(parse_scenario(&text), Err(ScenarioError::Invalid { key, .. }) if key == "alpha.components")
    );
}

#[test]
fn flat_scenario_with_zero_scale_is_essentially_exact() {
    let r = verify(&parse_scenario(FLAT_ZERO).unwrap(), &RunOptions::default()).unwrap();
    assert!(!r.checks.is_empty());
    for c in &r.checks {
        assert!(c.pass, "{}", c.id);
        assert!(c.max_defect <= 1e-9, "{} {}", c.id, c.max_defect);
        assert!(c.witness.is_none());
    }
}

#[test]
fn report_is_sorted_and_consistent() {
    let r = verify(&load_scenario("nonflat_moebius").unwrap(), &quick()).unwrap();
    let ids: Vec<&str> = r.checks.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for c in &r.checks {
        assert_eq!(c.pass, c.max_defect <= c.tolerance);
        assert_eq!(c.witness.is_some(), !c.pass);
        assert_eq!(c.samples, c.rows.len());
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let spec = load_scenario("nonflat_moebius").unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| verify(&spec, &quick()).unwrap())
            .canonical_json()
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
}

#[test]
fn seed_changes_samples() {
    let spec = load_scenario("flat_plane").unwrap();
    let a = verify(&spec, &quick()).unwrap();
    let b = verify(
        &spec,
        &RunOptions {
            seed: Some(99),
            ..quick()
        },
    )
    .unwrap();
    assert_ne!(a.canonical_json(), b.canonical_json());
}

#[test]
fn violation_fails_ricci_and_recovery_only() {
    let r = verify(
        &load_scenario("sphere_violation").unwrap(),
        &RunOptions::default(),
    )
    .unwrap();
    for c in r
        .checks
        .iter()
        .filter(|c| c.id.starts_with("ambient_axioms."))
    {
        assert!(c.pass, "{}", c.id);
    }
    for suite in ["ricci_Q", "recovery"] {
        let failing: Vec<_> = r
            .checks
            .iter()
            .filter(|c| c.id.starts_with(suite) && !c.pass)
            .collect();
        assert!(!failing.is_empty(), "{suite}");
        for c in failing {
            let w = c.witness.as_ref().unwrap();
            assert!(w.defect > 0.0);
        }
    }
    let t = r.check("ricci_Q.tangential").unwrap();
    assert!(t.max_defect >= 0.5);
}

#[test]
fn tolerance_overrides_are_recorded() {
    let spec = load_scenario("sphere_violation").unwrap();
    let mut opts = RunOptions {
        suites: vec![Suite::RicciQ],
        ..RunOptions::default()
    };
    opts.tolerances.insert("ricci_Q.tangential".into(), 10.0);
    let r = verify(&spec, &opts).unwrap();
    let c = r.check("ricci_Q.tangential").unwrap();
    assert!(c.pass);
    assert_eq!(c.tolerance_source, ToleranceSource::Override);
    assert_eq!(
        r.check("ricci_Q.closed_form").unwrap().tolerance_source,
        ToleranceSource::Default
    );

    opts.tolerances.insert("ricci_Q.nonexistent".into(), 1.0);
    assert!(verify(&spec, &opts).is_err());
}

#[test]
fn suite_selection_without_section_is_an_input_error() {
    let spec = parse_scenario(FLAT_ZERO).unwrap();
    let opts = RunOptions {
        suites: vec![Suite::Minkowski],
        ..RunOptions::default()
    };
    assert!(verify(&spec, &opts).is_err());
}

#[test]
fn empty_report_is_valid_json() {
    let text = FLAT_ZERO.replace(
        r#"run = ["ambient_axioms", "connection", "ricci_Q", "weingarten", "recovery", "cotton", "gauss", "fibers"]"#,
        "run = []",
    );
    let r = verify(&parse_scenario(&text).unwrap(), &RunOptions::default()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 0);
    assert!(r.passed());
}

#[test]
fn json_round_trips() {
    let r = verify(&load_scenario("flat_plane").unwrap(), &quick()).unwrap();
    let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn csv_has_one_row_per_sample() {
    let spec = load_scenario("stereographic_sphere").unwrap();
    let r = verify(
        &spec,
        &RunOptions {
            suites: vec![Suite::Gauss],
            samples: Some(7),
            ..RunOptions::default()
        },
    )
    .unwrap();
    let csv = r.to_csv().unwrap();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(csv.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    for id in ["gauss.sectional", "gauss.identity"] {
        let n = records.iter().filter(|rec| &rec[0] == id).count();
        assert_eq!(n, 7 * spec.scales.len());
        assert_eq!(n, r.check(id).unwrap().samples);
    }
    assert!(records.iter().all(|rec| rec.len() == 3 + 2));
}

#[test]
fn binary_exit_codes() {
    let ok = bin()
        .args(["verify", "flat_plane", "--samples", "8"])
        .output()
        .unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );

    let fail = bin()
        .args([
            "verify",
            "sphere_violation",
            "--samples",
            "8",
            "--suite",
            "ricci_Q",
        ])
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let text = String::from_utf8(fail.stdout).unwrap();
    assert!(text.contains("FAIL ricci_Q.tangential"));
    assert!(text.contains("witness ("));

    let missing = bin()
        .args(["verify", "/nonexistent/file.scn"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad_suite = bin()
        .args(["verify", "flat_plane", "--suite", "bogus"])
        .output()
        .unwrap();
    assert_eq!(bad_suite.status.code(), Some(2));

    let bad_tol = bin()
        .args(["verify", "flat_plane", "--tolerance", "nope=1"])
        .output()
        .unwrap();
    assert_eq!(bad_tol.status.code(), Some(2));
}

#[test]
fn binary_writes_json_file_and_reads_scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("flat.scn");
    std::fs::write(&scn, FLAT_ZERO).unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args([
            "verify",
            scn.to_str().unwrap(),
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
            "--suite",
            "ambient_axioms",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let r: VerificationReport =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.scenario, "flat_zero");
    assert!(r.checks.iter().all(|c| c.id.starts_with("ambient_axioms.")));

    std::fs::write(&scn, FLAT_ZERO.replace("epsilon = 1.0", "epsilon = 0")).unwrap();
    let bad = bin()
        .args(["verify", scn.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha.epsilon"));
}

#[test]
fn binary_lists_bundled_scenarios() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for (name, _) in bundled::BUNDLED {
        assert!(text.contains(name));
    }
}
