use std::path::Path;
use std::process::Command;

use tma::{ingest_function_spec, ingest_function_specs, run_experiment, ExperimentConfig, Suite};
use tma_core::funclass::{class_membership, sample_ensemble, EnsembleSpec};
use tma_core::jets::{evaluate_jet, Flavor};

fn tma() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tma"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const Q_SIGN: &str = r#"{"suite": "q-sign", "seed": 42,
    "ensemble": {"k": 1, "l": 1, "flavor": "complex", "draws": 40}, "points_per_draw": 2}"#;

#[test]
fn run_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", Q_SIGN);
    let out = dir.path().join("out");
    let st = tma().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("q-sign.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    assert!(!csv.contains('\r'));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    assert_eq!(manifest["config"]["seed"], 42);
}

#[test]
fn assertion_failure_exits_one_and_keeps_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out2 = dir.path().join("out");
    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"suite": "rigidity", "tolerances": {"det_deviation": 1e-300}}"#,
    );
    let st = tma().args(["run", "--config"]).arg(&strict).arg("--out").arg(&out2).output().unwrap().status;
    assert_eq!(st.code(), Some(1));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out2.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], false);
    assert!(out2.join("rigidity.csv").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("unknown-suite", r#"{"suite": "nope"}"#),
        ("missing-seed", r#"{"suite": "q-sign", "ensemble": {"flavor": "complex"}}"#),
        ("bad-tolerance", r#"{"suite": "rigidity", "tolerances": {"det_deviation": -1}}"#),
        ("foreign-tolerance", r#"{"suite": "rigidity", "tolerances": {"residual": 1}}"#),
        ("unknown-field", r#"{"suite": "rigidity", "colour": 1}"#),
        ("wrong-flavor", r#"{"suite": "q-sign", "seed": 1, "ensemble": {"flavor": "real"}}"#),
        ("too-large", r#"{"suite": "det-law", "seed": 1, "ensemble": {"epsilon": 5.0}}"#),
    ] {
        let cfg = write(dir.path(), &format!("{name}.json"), text);
        let out = tma().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{name}");
        let v = tma().args(["validate", "--config"]).arg(&cfg).output().unwrap();
        assert_eq!(v.status.code(), Some(2), "{name}");
        assert!(!v.stderr.is_empty());
    }
    let good = write(dir.path(), "good.json", Q_SIGN);
    assert_eq!(tma().args(["validate", "--config"]).arg(&good).output().unwrap().status.code(), Some(0));
    let missing = dir.path().join("absent.json");
    assert_eq!(tma().args(["run", "--config"]).arg(&missing).output().unwrap().status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", Q_SIGN);
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let st = tma().args(["run", "--config"]).arg(&cfg).args(["--seed", seed, "--out"]).arg(&out).output().unwrap().status;
        assert_eq!(st.code(), Some(0));
        std::fs::read(out.join("q-sign.csv")).unwrap()
    };
    assert_eq!(run("42", "a"), run("42", "b"));
    assert_ne!(run("42", "a"), run("43", "c"));
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", Q_SIGN);
    let mut outputs = Vec::new();
    for (w, env) in [("1", None), ("3", None), ("", Some("4"))] {
        let out = dir.path().join(format!("w{w}{}", env.unwrap_or("")));
        let mut cmd = tma();
        cmd.args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out);
        if !w.is_empty() {
            cmd.args(["--workers", w]);
        }
        if let Some(e) = env {
            cmd.env("TMA_WORKERS", e);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        let expect: u64 = if w.is_empty() { 4 } else { w.parse().unwrap() };
        assert_eq!(manifest["workers"], expect);
        outputs.push(std::fs::read(out.join("q-sign.csv")).unwrap());
    }
    assert!(outputs.windows(2).all(|p| p[0] == p[1]));
}

#[test]
fn spec_check_accepts_quadratics_and_rejects_unknown_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let quad = write(
        dir.path(),
        "quad.json",
        r#"{"k": 1, "l": 1, "flavor": "real", "time_dependent": false,
            "expr": {"kind": "quad", "matrix": [[1.0, 0.0], [0.0, -1.0]], "linear": [0.0, 0.0], "const": 0.0}}"#,
    );
    assert_eq!(tma().args(["spec", "--check"]).arg(&quad).output().unwrap().status.code(), Some(0));
    let spec = ingest_function_spec(&quad).unwrap();
    let jet = evaluate_jet(&spec, &[0.0, 0.0], 0.0).unwrap();
    assert_eq!(jet.hessian(), vec![vec![1.0, 0.0], vec![0.0, -1.0]]);

    let tan = write(
        dir.path(),
        "tan.json",
        r#"{"k": 1, "l": 1, "flavor": "real", "time_dependent": false,
            "expr": {"kind": "atom", "fn": "tan", "affine": [1.0, 0.0], "const": 0.0}}"#,
    );
    let out = tma().args(["spec", "--check"]).arg(&tan).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tan"));
    assert!(matches!(
        ingest_function_spec(&tan),
        Err(tma::CliError::Spec(tma_core::Error::UnknownAtom { .. }))
    ));
    let broken = write(dir.path(), "broken.json", "{\"k\": 1,\n  \"l\": }");
    match ingest_function_spec(&broken) {
        Err(tma::CliError::Spec(tma_core::Error::Parse { line, .. })) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn canonical_specs_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let es = EnsembleSpec { flavor: Flavor::Complex, draws: 3, seed: 5, ..Default::default() };
    for spec in sample_ensemble(&es).unwrap() {
        let text = spec.to_json();
        let p = write(dir.path(), "s.json", &text);
        assert_eq!(ingest_function_spec(&p).unwrap().to_json(), text);
    }
}

#[test]
fn sampled_ensembles_reingest_as_members() {
    let dir = tempfile::tempdir().unwrap();
    let es = EnsembleSpec { draws: 10, seed: 42, ..Default::default() };
    let specs = sample_ensemble(&es).unwrap();
    let p = write(dir.path(), "ens.json", &serde_json::to_string(&specs).unwrap());
    assert_eq!(tma().args(["spec", "--check"]).arg(&p).output().unwrap().status.code(), Some(0));
    let back = ingest_function_specs(&p).unwrap();
    assert_eq!(back, specs);
    let (lo, hi) = es.class_bounds();
    let cloud = es.cloud.points(es.dim());
    for s in &back {
        assert!(class_membership(s, &cloud, lo, hi).unwrap().member);
    }
}

#[test]
fn every_suite_has_defaults_that_validate() {
    for suite in Suite::ALL {
        let mut cfg = ExperimentConfig::new(suite);
        if suite.randomized() {
            cfg.seed = Some(1);
            let flavor = if suite == Suite::QSign { Flavor::Complex } else { Flavor::Real };
            cfg.ensemble = Some(EnsembleSpec { flavor, draws: 2, ..Default::default() });
            cfg.points_per_draw = 1;
            let dir = tempfile::tempdir().unwrap();
            let outcome = run_experiment(&cfg, dir.path(), 1).unwrap();
            assert!(outcome.manifest.passed, "{suite:?}: {:?}", outcome.manifest.assertions);
        }
        cfg.validate().unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&echo).unwrap(), cfg);
    }
}
