use std::collections::BTreeMap;

use causal_diagrams::catalog;
use causal_diagrams::intervention::{apply, base_variable, compose_models, open_at, share_inputs, world_label, world_of, CompositionMode, Intervention};
use causal_diagrams::model::{CausalModel, Mechanism};
use causal_diagrams::random::{random_cards, random_cbn, random_dag, random_state};
use causal_diagrams::semantics::{FinObject, Morphism};
use causal_diagrams::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[test]
fn do_fixes_the_variable() {
    let m = catalog::smoking();
    let d = apply(&m, &Intervention::Do { var: "S".into(), value: 1 }).unwrap();
    let ps = d.with_outputs(&s(&["S"])).unwrap().output_state().unwrap();
    assert_eq!(ps.data(), &[0.0, 1.0]);
    assert!(d.parents("S").is_empty());
    // upstream untouched
    let a0 = m.with_outputs(&s(&["A"])).unwrap().output_state().unwrap();
    let a1 = d.with_outputs(&s(&["A"])).unwrap().output_state().unwrap();
    assert!(a0.approx_eq(&a1, 1e-15));
}

#[test]
fn interventions_reject_bad_targets() {
    let m = catalog::smoking();
    assert!(apply(&m, &Intervention::Do { var: "Q".into(), value: 0 }).is_err());
    assert!(apply(&m, &Intervention::Do { var: "S".into(), value: 7 }).is_err());
    let bad = Morphism::state(FinObject::atom("S", 2), vec![0.5, 0.6]).unwrap();
    assert!(apply(&m, &Intervention::Break { var: "S".into(), state: bad }).is_err());
}

#[test]
fn pad_with_descendant_is_a_cycle() {
    let m = catalog::smoking();
    let r = apply(&m, &Intervention::Pad { var: "B".into(), extra: s(&["L"]) });
    assert!(matches!(r, Err(Error::Cycle(_))));
}

#[test]
fn rewire_copies_a_mechanism() {
    let cards: BTreeMap<String, usize> = ["A", "B", "C"].iter().map(|k| (k.to_string(), 2)).collect();
    let m = CausalModel::cbn(
        &cards,
        &[("A", &[], &[0.3, 0.7]), ("B", &["A"], &[0.9, 0.1, 0.2, 0.8]), ("C", &[], &[0.5, 0.5])],
        &["A", "B", "C"],
    )
    .unwrap();
    let phi: BTreeMap<String, String> = [("C", "B"), ("B", "C")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let relabel = |from: &str, to: &str| Morphism::identity(&FinObject::atom(from, 2)).with_objects(FinObject::atom(from, 2), FinObject::atom(to, 2)).unwrap();
    let maps: BTreeMap<String, Morphism> = [("C".to_string(), relabel("B", "C")), ("B".to_string(), relabel("C", "B"))].into_iter().collect();
    let r = apply(&m, &Intervention::Rewire { phi, maps }).unwrap();
    assert_eq!(r.parents("C"), s(&["A"]));
    let joint = r.output_state().unwrap();
    let before = m.output_state().unwrap().marginalize(&s(&["A", "B"])).unwrap();
    let after = joint.marginalize(&s(&["A", "C"])).unwrap();
    assert!(before.data().iter().zip(after.data()).all(|(a, b)| (a - b).abs() < 1e-15));
    assert!(r.parents("B").is_empty());
}

#[test]
fn opening_and_recomposing() {
    let m = catalog::smoking();
    let top = m.with_outputs(&s(&["A", "B"])).unwrap();
    let cards: BTreeMap<String, usize> = top.cards().iter().filter(|(k, _)| ["A", "B"].contains(&k.as_str())).map(|(k, v)| (k.clone(), *v)).collect();
    let top = CausalModel::from_mechanisms(
        &cards,
        top.mechanisms().into_iter().filter(|x| ["A", "B"].contains(&x.target.as_str())).collect(),
        &[],
        &s(&["A", "B"]),
    )
    .unwrap();
    let opened = open_at(&m, &s(&["A", "B"])).unwrap();
    assert_eq!(opened.inputs(), &s(&["A", "B"])[..]);
    let opened = opened.with_outputs(&s(&["S", "L"])).unwrap();
    let glued = compose_models(&top, &opened, CompositionMode::Sequential).unwrap();
    let a = glued.output_state().unwrap();
    let b = m.with_outputs(&s(&["S", "L"])).unwrap().output_state().unwrap();
    assert!(a.approx_eq(&b, 1e-12));
}

#[test]
fn world_labels() {
    let l = world_label("X", 3);
    assert_eq!(base_variable(&l), "X");
    assert_eq!(world_of(&l), Some(3));
    assert_eq!(world_of("X"), None);
}

#[test]
fn shared_inputs_tag_worlds() {
    let cards: BTreeMap<String, usize> = ["U", "X"].iter().map(|k| (k.to_string(), 2)).collect();
    let k = Morphism::identity(&FinObject::atom("U", 2)).with_objects(FinObject::atom("U", 2), FinObject::atom("X", 2)).unwrap();
    let m = CausalModel::from_mechanisms(&cards, vec![Mechanism::new("X", s(&["U"]), k)], &s(&["U"]), &s(&["X"])).unwrap();
    let d = apply(&m, &Intervention::Do { var: "X".into(), value: 1 }).unwrap();
    let w = share_inputs(&[m, d]).unwrap();
    assert_eq!(w.outputs(), &[world_label("X", 1), world_label("X", 2)][..]);
}

proptest! {
    #[test]
    fn do_twice_is_do_once(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(1..=5), 0.5, &mut r);
        let cards = random_cards(g.vertices(), 3, &mut r);
        let m = random_cbn(&g, &cards, g.vertices(), &mut r).unwrap();
        let v = g.vertices().choose(&mut r).unwrap().clone();
        let (a, b) = (r.gen_range(0..cards[&v]), r.gen_range(0..cards[&v]));
        let twice = apply(&apply(&m, &Intervention::Do { var: v.clone(), value: a }).unwrap(), &Intervention::Do { var: v.clone(), value: b }).unwrap();
        let once = apply(&m, &Intervention::Do { var: v, value: b }).unwrap();
        prop_assert!(twice.output_state().unwrap().max_abs_diff(&once.output_state().unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn break_with_sharp_state_is_do(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(1..=5), 0.5, &mut r);
        let cards = random_cards(g.vertices(), 3, &mut r);
        let m = random_cbn(&g, &cards, g.vertices(), &mut r).unwrap();
        let v = g.vertices().choose(&mut r).unwrap().clone();
        let x = r.gen_range(0..cards[&v]);
        let obj = FinObject::atom(v.clone(), cards[&v]);
        let b = apply(&m, &Intervention::Break { var: v.clone(), state: Morphism::sharp_state(&obj, &[x]).unwrap() }).unwrap();
        let d = apply(&m, &Intervention::Do { var: v.clone(), value: x }).unwrap();
        prop_assert!(b.output_state().unwrap().max_abs_diff(&d.output_state().unwrap()).unwrap() < 1e-15);
        // a random breaking state leaves the marginal of v equal to it
        let rho = random_state(obj, 0.0, &mut r);
        let b = apply(&m, &Intervention::Break { var: v.clone(), state: rho.clone() }).unwrap();
        let pv = b.with_outputs(&[v]).unwrap().output_state().unwrap();
        prop_assert!(pv.max_abs_diff(&rho).unwrap() < 1e-12);
    }
}
