mod common;

use causal_diagrams::catalog;
use causal_diagrams::counterfactual::{
    counterfactual_diagram, counterfactual_state, evaluate_counterfactual as oracle, id_cf_with_cards, simplify_cf, CfIdOptions, CounterfactualTerms,
    FailReason, WorldTerm,
};
use causal_diagrams::graph::{rootify, Rootification};
use causal_diagrams::random::{random_dag, random_fcm};
use causal_diagrams::Error;
use common::{binary, random_terms, tables_for};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `P(Y under do(X = xt) | X = x, Y = y)` by summing over the two noises.
fn aspirin_by_hand(x: usize, y: usize, xt: usize) -> [f64; 2] {
    let f = catalog::aspirin_fcm();
    let (ex, ey) = (f.entry("X").unwrap(), f.entry("Y").unwrap());
    let mut out = [0.0; 2];
    for ux in 0..ex.noise_card {
        for uy in 0..ey.noise_card {
            let x1 = f.apply_function(ex, &[], ux);
            if x1 != x || f.apply_function(ey, &[x1], uy) != y {
                continue;
            }
            out[f.apply_function(ey, &[xt], uy)] += ex.lambda[ux] * ey.lambda[uy];
        }
    }
    let s = out[0] + out[1];
    [out[0] / s, out[1] / s]
}

#[test]
fn aspirin_matches_hand_enumeration() {
    let f = catalog::aspirin_fcm();
    for (x, y, xt) in [(1, 0, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1)] {
        let got = oracle(&f, &catalog::aspirin_terms(x, y, xt)).unwrap();
        let want = aspirin_by_hand(x, y, xt);
        assert!((got.data()[0] - want[0]).abs() < 1e-12 && (got.data()[1] - want[1]).abs() < 1e-12);
    }
}

#[test]
fn identification_outcomes() {
    let opts = CfIdOptions::default();
    let asp = catalog::aspirin();
    let cards = binary(asp.vertices());
    let r = id_cf_with_cards(&asp, &catalog::aspirin_terms(1, 0, 0), &cards, &opts).unwrap();
    assert_eq!(r.fail_reason(), Some(FailReason::UnabsorbedNoise));
    let r = id_cf_with_cards(&asp, &catalog::aspirin_terms(1, 0, 1), &cards, &opts).unwrap();
    let e = r.expression().expect("same value is identified");
    let f = catalog::aspirin_fcm();
    let got = e.evaluate(&tables_for(e, &f, asp.vertices())).unwrap();
    assert!((got.data()[0] - 1.0).abs() < 1e-12);

    let g = catalog::conflicting_worlds();
    let r = id_cf_with_cards(&g, &catalog::conflicting_worlds_terms(0, 1), &binary(g.vertices()), &opts).unwrap();
    assert_eq!(r.fail_reason(), Some(FailReason::FragmentValueConflict));
}

#[test]
fn worked_example_value() {
    let g = catalog::three_worlds();
    let fcm = catalog::three_worlds_fcm(7).unwrap();
    let terms = catalog::three_worlds_terms(1, 0, 1, 1);
    let r = id_cf_with_cards(&g, &terms, &binary(g.vertices()), &CfIdOptions::default()).unwrap();
    let e = r.expression().unwrap();
    let got = e.evaluate(&tables_for(e, &fcm, g.vertices())).unwrap();
    let want = oracle(&fcm, &terms).unwrap();
    assert!(got.approx_eq(&want, 1e-9));
}

#[test]
fn bad_terms_are_rejected() {
    let cards = binary(&common::names(&["X", "Y"]));
    let t = CounterfactualTerms::new(vec![WorldTerm::new(&[("X", 2)], &[], &["Y"])]);
    assert!(matches!(t.check(&cards), Err(Error::Index(_))));
    let t = CounterfactualTerms::new(vec![WorldTerm::new(&[], &[("Y", 0)], &["Y"])]);
    assert!(t.check(&cards).is_err());
    let t = CounterfactualTerms::new(vec![WorldTerm::new(&[], &[], &["Q"])]);
    assert!(matches!(t.check(&cards), Err(Error::UnknownName(_))));
    assert!(CounterfactualTerms::new(vec![]).check(&cards).is_err());
}

#[test]
fn terms_serde_uses_do_key() {
    let t = catalog::aspirin_terms(1, 0, 0);
    let json = serde_json::to_string(&t).unwrap();
    assert!(json.contains("\"do\""));
    let back: CounterfactualTerms = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);
}

#[test]
fn aspirin_noise_stays_shared() {
    let f = catalog::aspirin_fcm();
    let (d, _) = counterfactual_diagram(&f, &catalog::aspirin_terms(1, 0, 0)).unwrap();
    let r = rootify(&catalog::aspirin(), Rootification::RhoTilde).unwrap();
    let order = r.dag.topological_order().unwrap();
    let s = simplify_cf(&d, &order, &order).unwrap();
    assert!(!s.unabsorbed().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagram_agrees_with_enumeration(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(1..=4), 0.5, &mut r);
        let vs = g.vertices().to_vec();
        let fcm = random_fcm(&g, &binary(&vs), r.gen_range(2..=3), &mut r).unwrap();
        let Some(terms) = random_terms(&vs, 3, &mut r) else { return Ok(()) };
        if !terms.is_counterfactual() {
            return Ok(());
        }
        let a = counterfactual_state(&fcm, &terms).unwrap().normalised;
        let b = oracle(&fcm, &terms).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn simplification_preserves_value(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(1..=4), 0.5, &mut r);
        let vs = g.vertices().to_vec();
        let fcm = random_fcm(&g, &binary(&vs), 2, &mut r).unwrap();
        let Some(terms) = random_terms(&vs, 3, &mut r) else { return Ok(()) };
        let (d, interp) = counterfactual_diagram(&fcm, &terms).unwrap();
        let order = g.topological_order().unwrap();
        let s = simplify_cf(&d, &order, &order).unwrap();
        prop_assert!(s.evaluate(&interp).unwrap().max_abs_diff(&d.evaluate(&interp).unwrap()).unwrap() < 1e-9);
    }
}
