mod common;

use std::path::Path;
use std::process::{Command, Output};

use causal_diagrams::catalog;
use causal_diagrams::io::{ingest, read_json, to_json, Bundle, ModelFile, QueryFile, Samples};
use causal_diagrams::random::{random_cards, random_cbn, random_dag};
use common::{bundle_path, BUNDLES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn causal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causal")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn bundles_round_trip() {
    for name in BUNDLES {
        let b: Bundle = read_json(bundle_path(name)).unwrap();
        assert_eq!(b.name, name);
        let text = to_json(&b).unwrap();
        let again: Bundle = serde_json::from_str(&text).unwrap();
        assert_eq!(again, b, "{}", name);
        assert_eq!(to_json(&again).unwrap(), text);
    }
}

#[test]
fn shipped_models_load() {
    for name in BUNDLES {
        let b: Bundle = read_json(bundle_path(name)).unwrap();
        if let Some(m) = &b.model {
            assert!(m.violations(1e-9).is_empty(), "{}: {:?}", name, m.violations(1e-9));
            m.to_model().unwrap();
        }
        if let Some(a) = &b.admg {
            a.to_admg().unwrap();
        }
        if let Some(t) = &b.tables {
            t.to_tables().unwrap();
        }
    }
}

#[test]
fn validate_smoking() {
    let o = causal(&["validate", "--bundle", path(&bundle_path("smoking"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["ok"], Value::Bool(true));
}

#[test]
fn validate_reports_broken_tables() {
    let mut m = ModelFile::from_model(&catalog::smoking());
    m.mechanisms[0].cpt[0] += 0.5;
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, to_json(&m).unwrap()).unwrap();
    let o = causal(&["validate", "--model", path(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["ok"], Value::Bool(false));
}

#[test]
fn cf_id_outcomes() {
    let o = causal(&["cf-id", "--bundle", path(&bundle_path("three_worlds"))]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "identifiable");
    assert!(v["expression"].is_object());

    let o = causal(&["cf-id", "--bundle", path(&bundle_path("aspirin"))]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "fail");
    assert_eq!(v["reason"], "unabsorbed_noise");

    let o = causal(&["cf-id", "--bundle", path(&bundle_path("conflicting_worlds"))]);
    assert_eq!(stdout_json(&o)["reason"], "fragment_value_conflict");
}

#[test]
fn cf_id_value_matches_cf_eval() {
    let b = bundle_path("three_worlds");
    let id = stdout_json(&causal(&["cf-id", "--bundle", path(&b)]));
    let b2: Bundle = read_json(&b).unwrap();
    let Some(QueryFile::Cf(terms)) = b2.query else { panic!("cf query expected") };
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    std::fs::write(&q, to_json(&QueryFile::CfEval(terms)).unwrap()).unwrap();
    let ev = causal(&["cf-eval", "--bundle", path(&b), "--query", path(&q)]);
    assert_eq!(ev.status.code(), Some(0), "{}", String::from_utf8_lossy(&ev.stderr));
    let ev = stdout_json(&ev);
    let a: Vec<f64> = serde_json::from_value(id["value"]["data"].clone()).unwrap();
    let b: Vec<f64> = serde_json::from_value(ev["data"].clone()).unwrap();
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
}

#[test]
fn effect_id_front_door_and_undecided() {
    let v = stdout_json(&causal(&["effect-id", "--bundle", path(&bundle_path("front_door"))]));
    assert_eq!(v["status"], "identified");
    assert!(v["value"].is_object());
    let v = stdout_json(&causal(&["effect-id", "--bundle", path(&bundle_path("confounded_mediator"))]));
    assert_eq!(v["status"], "undecided");
}

#[test]
fn dsep_and_ci_queries() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    std::fs::write(&q, r#"{"dsep": {"y": ["S"], "z": ["A"], "w": ["B"]}}"#).unwrap();
    let v = stdout_json(&causal(&["dsep", "--bundle", path(&bundle_path("smoking")), "--query", path(&q)]));
    assert_eq!(v["separated"], true);
    std::fs::write(&q, r#"{"dsep": {"y": ["A"], "z": ["L"]}}"#).unwrap();
    let v = stdout_json(&causal(&["dsep", "--bundle", path(&bundle_path("smoking")), "--query", path(&q)]));
    assert_eq!(v["separated"], false);
    assert!(v["open_path"].is_array());
    std::fs::write(&q, r#"{"ci": {"x": ["S"], "y": ["A"], "z": ["B"]}}"#).unwrap();
    let v = stdout_json(&causal(&["ci", "--bundle", path(&bundle_path("smoking")), "--query", path(&q)]));
    assert_eq!(v["independent"], true);
}

#[test]
fn intervene_and_formats() {
    let b = bundle_path("smoking");
    let o = causal(&["intervene", "--bundle", path(&b)]);
    let v = stdout_json(&o);
    assert!(v["model"]["mechanisms"].is_array());
    let csv = causal(&["joint", "--bundle", path(&b), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",p"));
    let dot = causal(&["export-dot", "--bundle", path(&b), "--format", "dot"]);
    assert!(String::from_utf8(dot.stdout).unwrap().starts_with("digraph"));
}

#[test]
fn outputs_are_byte_identical() {
    for args in [
        vec!["cf-id", "--bundle", "three_worlds"],
        vec!["joint", "--bundle", "smoking", "--full"],
        vec!["effect-id", "--bundle", "two_outcomes"],
        vec!["export-dot", "--bundle", "three_worlds", "--format", "dot"],
    ] {
        let p = bundle_path(args[2]);
        let mut a = args.clone();
        a[2] = path(&p);
        let (x, y) = (causal(&a), causal(&a));
        assert_eq!(x.status.code(), Some(0), "{:?}: {}", args, String::from_utf8_lossy(&x.stderr));
        assert_eq!(x.stdout, y.stdout);
    }
}

#[test]
fn file_errors_exit_2_with_json() {
    let o = causal(&["validate", "--model", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["exit_code"], 2);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(causal(&["validate", "--model", path(&p)]).status.code(), Some(2));
}

#[test]
fn budget_exit_3() {
    // eight variables with two parents each: the dilated noise space is far too large to enumerate
    let vs: Vec<String> = (0..8).map(|i| format!("V{}", i)).collect();
    let mut edges = std::collections::BTreeSet::new();
    for i in 2..8 {
        edges.insert((vs[i - 2].clone(), vs[i].clone()));
        edges.insert((vs[i - 1].clone(), vs[i].clone()));
    }
    let g = causal_diagrams::graph::Dag::from_parts(vs.clone(), edges).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let cards = random_cards(&vs, 2, &mut r).into_keys().map(|k| (k, 2)).collect();
    let m = random_cbn(&g, &cards, &vs, &mut r).unwrap();
    let mut b = Bundle::named("big");
    b.model = Some(ModelFile::from_model(&m));
    b.query = Some(QueryFile::CfEval(causal_diagrams::counterfactual::CounterfactualTerms::new(vec![
        causal_diagrams::counterfactual::WorldTerm::new(&[], &[("V0", 1)], &[]),
        causal_diagrams::counterfactual::WorldTerm::new(&[("V0", 0)], &[], &["V7"]),
    ])));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("big.json");
    std::fs::write(&p, to_json(&b).unwrap()).unwrap();
    let o = causal(&["cf-eval", "--bundle", path(&p)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn ingest_counts_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.csv");
    std::fs::write(&obs, "X,Y\n0,0\n0,1\n1,1\n1,1\n").unwrap();
    let dox = dir.path().join("dox.csv");
    std::fs::write(&dox, "X,Y\n1,0\n1,1\n").unwrap();
    let spec = format!("X:{}", path(&dox));
    let o = causal(&["ingest", "--data", path(&obs), "--do-data", &spec]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["tables"].as_array().unwrap().len(), 2);

    let s = Samples::read("X,Y\n0,0\n0,1\n1,1\n1,1\n".as_bytes()).unwrap();
    let t = ingest(&s, &[], None).unwrap();
    let p = t.observational().unwrap();
    assert_eq!(p.data(), &[0.25, 0.25, 0.0, 0.5]);
}

#[test]
fn random_models_survive_the_file_format() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let g = random_dag(5, 0.5, &mut r);
        let cards = random_cards(g.vertices(), 3, &mut r);
        let m = random_cbn(&g, &cards, g.vertices(), &mut r).unwrap();
        let f = ModelFile::from_model(&m);
        let back: ModelFile = serde_json::from_str(&to_json(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        let m2 = back.to_model().unwrap();
        assert_eq!(m2.output_state().unwrap(), m.output_state().unwrap());
    }
}
