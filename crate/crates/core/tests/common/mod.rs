#![allow(dead_code)]

use std::collections::BTreeMap;

use causal_diagrams::counterfactual::{CounterfactualTerms, WorldTerm};
use causal_diagrams::identify::{IdentifyingExpression, PStarTables};
use causal_diagrams::model::{model_from_fcm, Fcm};
use rand::Rng;

pub fn binary(vs: &[String]) -> BTreeMap<String, usize> {
    vs.iter().map(|v| (v.clone(), 2)).collect()
}

pub fn names(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

/// Up to `max_worlds` worlds; each variable is intervened, observed, asked
/// or left alone at random. `None` when nothing is asked.
pub fn random_terms<R: Rng>(vs: &[String], max_worlds: usize, rng: &mut R) -> Option<CounterfactualTerms> {
    let k = rng.gen_range(1..=max_worlds);
    let mut worlds = Vec::new();
    for _ in 0..k {
        let mut w = WorldTerm::default();
        for v in vs {
            match rng.gen_range(0..5) {
                0 => {
                    w.do_.insert(v.clone(), rng.gen_range(0..2));
                }
                1 => {
                    w.cond.insert(v.clone(), rng.gen_range(0..2));
                }
                2 => w.outputs.push(v.clone()),
                _ => {}
            }
        }
        worlds.push(w);
    }
    let t = CounterfactualTerms::new(worlds);
    if t.output_labels().is_empty() {
        None
    } else {
        Some(t)
    }
}

/// The do-tables an expression reads, computed from `fcm` over `observed`.
pub fn tables_for(e: &IdentifyingExpression, fcm: &Fcm, observed: &[String]) -> PStarTables {
    let m = model_from_fcm(&fcm.with_outputs(observed).unwrap()).unwrap();
    let mut sets: Vec<Vec<String>> = e.leaves().into_iter().map(|l| l.0).collect();
    sets.push(vec![]);
    sets.sort();
    sets.dedup();
    PStarTables::from_model_subsets(&m, observed, &sets).unwrap()
}

pub fn bundle_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/bundles").join(format!("{}.json", name))
}

pub const BUNDLES: [&str; 11] = [
    "smoking",
    "confounded_mediator",
    "confounded_collider",
    "front_door",
    "two_outcomes",
    "three_worlds",
    "aspirin",
    "aspirin_same",
    "conflicting_worlds",
    "witness_mediator",
    "witness_collider",
];
