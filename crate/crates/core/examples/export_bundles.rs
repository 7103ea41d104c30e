//! Writes the shipped JSON bundles from the catalog.
//!
//! ```text
//! cargo run --example export_bundles -- crates/core/examples/bundles
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use causal_diagrams::catalog;
use causal_diagrams::counterfactual::{id_cf_with_cards, CfIdOptions, CounterfactualTerms};
use causal_diagrams::graph::{Admg, Rootification};
use causal_diagrams::identify::{search_witness, PStarTables, WitnessTarget};
use causal_diagrams::intervention::Intervention;
use causal_diagrams::io::{to_json, AdmgFile, Bundle, ModelFile, QueryFile, TablesFile};
use causal_diagrams::model::{model_from_fcm, Fcm};
use causal_diagrams::random::random_rootified_model;
use causal_diagrams::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binary(a: &Admg) -> BTreeMap<String, usize> {
    a.vertices().iter().map(|v| (v.clone(), 2)).collect()
}

fn graph_bundle(name: &str, description: &str, a: &Admg, query: QueryFile) -> Bundle {
    let mut b = Bundle::named(name);
    b.description = Some(description.into());
    b.admg = Some(AdmgFile::from_admg(a, &binary(a)));
    b.query = Some(query);
    b
}

/// Tables for exactly the leaves of the identifying expression, from `fcm`.
fn cf_tables(a: &Admg, fcm: &Fcm, terms: &CounterfactualTerms) -> Result<Option<TablesFile>> {
    let res = id_cf_with_cards(a, terms, &binary(a), &CfIdOptions::default())?;
    let Some(e) = res.expression() else { return Ok(None) };
    let observed = a.vertices().to_vec();
    let mut sets: Vec<Vec<String>> = e.leaves().into_iter().map(|(d, _)| d).collect();
    sets.push(vec![]);
    sets.sort();
    sets.dedup();
    let m = model_from_fcm(&fcm.with_outputs(&observed)?)?;
    Ok(Some(TablesFile::from_tables(&PStarTables::from_model_subsets(&m, &observed, &sets)?)))
}

fn cf_bundle(name: &str, description: &str, a: &Admg, fcm: &Fcm, terms: CounterfactualTerms) -> Result<Bundle> {
    let mut b = graph_bundle(name, description, a, QueryFile::Cf(terms.clone()));
    b.model = Some(ModelFile::from_fcm(fcm)?);
    b.tables = cf_tables(a, fcm, &terms)?;
    Ok(b)
}

fn main() -> Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/examples/bundles".into()));
    std::fs::create_dir_all(&dir)?;
    let mut bundles = Vec::new();

    let mut smoking = Bundle::named("smoking");
    smoking.description = Some("Age, background, smoking and lung cancer; do(S = 1)".into());
    smoking.model = Some(ModelFile::from_model(&catalog::smoking()));
    smoking.query = Some(QueryFile::Intervene(vec![Intervention::Do { var: "S".into(), value: 1 }]));
    bundles.push(smoking);

    let effect = |x: &str| QueryFile::EffectId { x: x.into(), value: Some(1), context: vec![], eta: None, condition_on: vec![] };
    bundles.push(graph_bundle("confounded_mediator", "X -> Z -> Y with X <-> Z; the c-component condition fails at X", &catalog::confounded_mediator(), effect("X")));
    bundles.push(graph_bundle("confounded_collider", "X -> Z <- Y with X <-> Z; the c-component condition fails at X", &catalog::confounded_collider(), effect("X")));

    let fd = catalog::front_door();
    let mut front = graph_bundle("front_door", "S -> T -> L with S <-> L; P(S, T, L ; do(T = 1))", &fd, effect("T"));
    let (m, observed) = random_rootified_model(&fd, Rootification::RhoTilde, &binary(&fd), 2, &mut ChaCha8Rng::seed_from_u64(11))?;
    front.tables = Some(TablesFile::from_tables(&PStarTables::from_model_subsets(&m, &observed, &[vec![]])?));
    bundles.push(front);

    bundles.push(graph_bundle(
        "two_outcomes",
        "W1 -> X -> Y1, W2 -> Y2, W1 <-> Y1, W1 <-> W2; P(O ; do(X = 1))",
        &catalog::two_outcomes(),
        effect("X"),
    ));

    let three_worlds = catalog::three_worlds();
    bundles.push(cf_bundle(
        "three_worlds",
        "Three worlds: do(X = 1) asks Y; X = 0, D = 1 observed; do(D = 1) observes Z = 1",
        &three_worlds,
        &catalog::three_worlds_fcm(7)?,
        catalog::three_worlds_terms(1, 0, 1, 1),
    )?);

    let asp = catalog::aspirin();
    let fcm = catalog::aspirin_fcm();
    bundles.push(cf_bundle(
        "aspirin",
        "Took aspirin, no headache: would there be a headache without aspirin?",
        &asp,
        &fcm,
        catalog::aspirin_terms(1, 0, 0),
    )?);
    bundles.push(cf_bundle(
        "aspirin_same",
        "Took aspirin, no headache: headache had aspirin been taken?",
        &asp,
        &fcm,
        catalog::aspirin_terms(1, 0, 1),
    )?);

    bundles.push(graph_bundle(
        "conflicting_worlds",
        "Three worlds: W1, W2 natural; Y under do(X = 0); Z under do(X = 1)",
        &catalog::conflicting_worlds(),
        QueryFile::Cf(catalog::conflicting_worlds_terms(0, 1)),
    ));

    for (name, g, target) in [
        ("witness_mediator", catalog::confounded_mediator(), WitnessTarget::Marginal { x: "X".into(), y: "Y".into() }),
        ("witness_collider", catalog::confounded_collider(), WitnessTarget::Conditional { x: "X".into(), y: "Y".into(), z: "Z".into() }),
    ] {
        let w = search_witness(&g, &target, 2024, 20, 200)?;
        eprintln!("{}: target distance {:.4}", name, w.distance);
        let mut b = Bundle::named(name);
        b.description = Some("Two models with the same observational distribution and different target".into());
        b.admg = Some(AdmgFile::from_admg(&g, &binary(&g)));
        b.witness = Some(w);
        bundles.push(b);
    }

    for b in &bundles {
        let path = dir.join(format!("{}.json", b.name));
        std::fs::write(&path, to_json(b)?)?;
        println!("{}", path.display());
    }
    Ok(())
}
