use std::collections::BTreeMap;

mod common;

use causal_diagrams::counterfactual::counterfactual_diagram;
use causal_diagrams::diagram::{
    apply_rewrite, diagram_from_dag, open_dag_from_diagram, rewrite_fixpoint, Interpretation, NetworkDiagram, Node, RewriteOutcome, RewriteRule,
    Site,
};
use causal_diagrams::graph::Dag;
use causal_diagrams::random::{random_cards, random_cbn, random_dag, random_fcm};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chain() -> Dag {
    Dag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap()
}

#[test]
fn strict_diagram_from_chain() {
    let cards: BTreeMap<String, usize> = [("A", 2), ("B", 3), ("C", 2)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let d = diagram_from_dag(&chain(), &[], &["C".into()], &cards).unwrap();
    assert!(d.validate(true).ok);
    assert_eq!(d.nodes.len(), 3);
    assert_eq!(d.card("B").unwrap(), 3);
    let dot = d.to_dot();
    assert!(dot.starts_with("digraph"));
}

#[test]
fn input_with_parents_is_rejected() {
    let cards: BTreeMap<String, usize> = ["A", "B", "C"].iter().map(|k| (k.to_string(), 2)).collect();
    assert!(diagram_from_dag(&chain(), &["B".into()], &[], &cards).is_err());
}

#[test]
fn discarded_tail_falls_through() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let g = chain();
    let cards = random_cards(g.vertices(), 3, &mut r);
    let m = random_cbn(&g, &cards, &["A".to_string()], &mut r).unwrap();
    let (d, _) = rewrite_fixpoint(m.diagram(), &[RewriteRule::DiscardFallthrough]).unwrap();
    assert_eq!(d.nodes.len(), 1);
    let before = m.diagram().evaluate(m.interpretation()).unwrap();
    let after = d.evaluate(m.interpretation()).unwrap();
    assert!(before.approx_eq(&after, 1e-12));
}

#[test]
fn missing_box_is_reported() {
    let cards: BTreeMap<String, usize> = ["A", "B", "C"].iter().map(|k| (k.to_string(), 2)).collect();
    let d = diagram_from_dag(&chain(), &[], &["C".into()], &cards).unwrap();
    assert!(matches!(d.evaluate(&Interpretation::new()), Err(causal_diagrams::Error::MissingInterpretation(_))));
}

#[test]
fn dot_is_deterministic() {
    let empty = NetworkDiagram::default();
    assert_eq!(empty.to_dot(), "digraph D {\n  rankdir=BT;\n}\n");
    let mut one = NetworkDiagram::default();
    one.wires.insert("A".into(), 2);
    one.nodes.push(Node::mechanism("c_A", vec![], "A"));
    one.outputs.push("A".into());
    let dot = one.to_dot();
    assert_eq!(dot.matches("shape=box").count(), 1);
    assert_eq!(dot, one.clone().to_dot());
}

fn sites(d: &NetworkDiagram, rule: RewriteRule) -> Vec<Site> {
    match rule {
        RewriteRule::CopyThroughDeterministic => {
            (0..d.nodes.len()).flat_map(|i| (0..d.nodes.len()).filter(move |j| *j != i).map(move |j| Site::Pair(i, j))).collect()
        }
        RewriteRule::DropDiscardedCopyLeg => d.wires.keys().cloned().map(Site::Wire).collect(),
        _ => (0..d.nodes.len()).map(Site::Node).collect(),
    }
}

#[test]
fn rewrites_preserve_evaluation() {
    let rules = [
        RewriteRule::DiscardFallthrough,
        RewriteRule::CopyThroughDeterministic,
        RewriteRule::SharpEffectSplit,
        RewriteRule::CopyOutDiscard,
        RewriteRule::AbsorbNoiseIntoChannel,
    ];
    let mut r = ChaCha8Rng::seed_from_u64(17);
    let mut hits = [0usize; 5];
    let mut rounds = 0;
    while hits.iter().any(|&h| h < 100) && rounds < 5000 {
        rounds += 1;
        let g = random_dag(r.gen_range(1..=4), 0.5, &mut r);
        let vs = g.vertices().to_vec();
        let fcm = random_fcm(&g, &common::binary(&vs), 2, &mut r).unwrap();
        let Some(terms) = common::random_terms(&vs, 3, &mut r) else { continue };
        let (mut d, interp) = counterfactual_diagram(&fcm, &terms).unwrap();
        // drop the asked wires at random so fall-through rules have sites
        d.outputs.retain(|_| r.gen_bool(0.6));
        let before = d.evaluate(&interp).unwrap();
        for (k, rule) in rules.iter().enumerate() {
            for site in sites(&d, *rule) {
                if let RewriteOutcome::Applied { diagram, derived } = apply_rewrite(&d, *rule, &site).unwrap() {
                    let mut i = interp.clone();
                    if let Some(x) = &derived {
                        i.register(x).unwrap();
                    }
                    let after = diagram.evaluate(&i).unwrap();
                    let after = after.permute_cod(&before.cod().names()).unwrap_or(after);
                    let diff = before.data().iter().zip(after.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(diff <= 1e-12, "{:?} at {:?} changed the value by {}", rule, site, diff);
                    hits[k] += 1;
                }
            }
        }
    }
    assert!(hits.iter().all(|&h| h >= 100), "applicable sites per rule: {:?}", hits);
}

proptest! {
    #[test]
    fn open_dag_round_trip(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(1..=8), 0.4, &mut r);
        let cards = random_cards(g.vertices(), 3, &mut r);
        let inputs: Vec<String> = g.vertices().iter().filter(|v| g.parents(v).is_empty() && r.gen_bool(0.4)).cloned().collect();
        let outputs: Vec<String> = g.vertices().iter().filter(|v| !inputs.contains(v) && r.gen_bool(0.5)).cloned().collect();
        let d = diagram_from_dag(&g, &inputs, &outputs, &cards).unwrap();
        let (g2, i2, o2) = open_dag_from_diagram(&d).unwrap();
        prop_assert_eq!(g2, g);
        prop_assert_eq!(i2, inputs);
        prop_assert_eq!(o2, outputs);
    }

    #[test]
    fn fallthrough_preserves_semantics(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(1..=6), 0.4, &mut r);
        let cards = random_cards(g.vertices(), 3, &mut r);
        let outputs: Vec<String> = g.vertices().iter().filter(|_| r.gen_bool(0.4)).cloned().collect();
        let m = random_cbn(&g, &cards, &outputs, &mut r).unwrap();
        let (d, _) = rewrite_fixpoint(m.diagram(), &[RewriteRule::DiscardFallthrough]).unwrap();
        let a = m.diagram().evaluate(m.interpretation()).unwrap();
        let b = d.evaluate(m.interpretation()).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }
}
