use causal_diagrams::random::{random_channel, random_morphism, random_state};
use causal_diagrams::semantics::{Atom, FinObject, Morphism, SoftMode};
use causal_diagrams::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn obj(prefix: &str, k: usize, r: &mut ChaCha8Rng) -> FinObject {
    FinObject::new((0..k).map(|i| Atom::new(format!("{}{}", prefix, i), r.gen_range(1..=3))).collect()).unwrap()
}

#[test]
fn tuple_index_round_trip() {
    let o = FinObject::from_pairs(&[("A", 2), ("B", 3), ("C", 2)]).unwrap();
    assert_eq!(o.size(), 12);
    for i in 0..o.size() {
        assert_eq!(o.index_of(&o.tuple_of(i)).unwrap(), i);
    }
    // last atom varies fastest
    assert_eq!(o.tuple_of(1), vec![0, 0, 1]);
    assert!(o.index_of(&[2, 0, 0]).is_err());
}

#[test]
fn duplicate_atoms_are_rejected() {
    assert!(matches!(FinObject::from_pairs(&[("A", 2), ("A", 2)]), Err(Error::Invalid(_))));
}

#[test]
fn generators_behave() {
    let o = FinObject::from_pairs(&[("A", 3)]).unwrap();
    let id = Morphism::identity(&o);
    assert!(id.classify(0.0).is_deterministic);
    let cp = Morphism::copy(&o);
    assert_eq!(cp.cod().atoms().len(), 2);
    assert!(cp.then(&Morphism::discard(cp.cod())).unwrap().approx_eq(&Morphism::discard(&o), 0.0));
    let u = Morphism::uniform(&o);
    assert!(u.data().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
    let s = Morphism::sharp_state(&o, &[2]).unwrap();
    let e = Morphism::sharp_effect(&o, &[2]).unwrap();
    assert_eq!(s.then(&e).unwrap().value().unwrap(), 1.0);
}

#[test]
fn composition_checks_types() {
    let a = FinObject::atom("A", 2);
    let b = FinObject::atom("B", 3);
    let f = Morphism::uniform(&a);
    assert!(matches!(f.then(&Morphism::identity(&b)), Err(Error::Shape(_))));
}

#[test]
fn conditional_of_known_joint() {
    let cod = FinObject::from_pairs(&[("X", 2), ("Y", 2)]).unwrap();
    let w = Morphism::state(cod, vec![0.1, 0.3, 0.2, 0.4]).unwrap();
    let c = w.conditional(&["X".to_string()]).unwrap();
    assert!((c.at(&[0], &[1]).unwrap() - 0.75).abs() < 1e-15);
    assert!((c.at(&[1], &[0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn soft_evidence_modes_agree_on_sharp_evidence() {
    let cod = FinObject::from_pairs(&[("X", 2), ("Y", 2)]).unwrap();
    let w = Morphism::state(cod, vec![0.1, 0.3, 0.2, 0.4]).unwrap();
    let x = FinObject::atom("X", 2);
    let on = vec!["X".to_string()];
    let up = w.soft_conditional(&on, &Morphism::sharp_effect(&x, &[1]).unwrap(), SoftMode::Upper).unwrap();
    let lo = w.soft_conditional(&on, &Morphism::sharp_state(&x, &[1]).unwrap(), SoftMode::Lower).unwrap();
    assert!(up.approx_eq(&lo, 1e-15));
    assert!((up.data()[0] - 1.0 / 3.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, d) = (obj("A", 1, &mut r), obj("B", 2, &mut r), obj("C", 1, &mut r), obj("D", 2, &mut r));
        let f = random_morphism(a, b.clone(), 0.2, &mut r);
        let g = random_morphism(b, c.clone(), 0.2, &mut r);
        let h = random_morphism(c, d, 0.2, &mut r);
        let l = f.then(&g).unwrap().then(&h).unwrap();
        let rr = f.then(&g.then(&h).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&rr).unwrap() < 1e-12);
    }

    #[test]
    fn interchange_law(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, d) = (obj("A", 1, &mut r), obj("B", 1, &mut r), obj("C", 1, &mut r), obj("D", 1, &mut r));
        let (e, g) = (obj("E", 1, &mut r), obj("G", 1, &mut r));
        let f1 = random_channel(a, b.clone(), 0.0, &mut r);
        let f2 = random_channel(b, e, 0.0, &mut r);
        let g1 = random_channel(c, d.clone(), 0.0, &mut r);
        let g2 = random_channel(d, g, 0.0, &mut r);
        let lhs = f1.tensor(&g1).then(&f2.tensor(&g2)).unwrap();
        let rhs = f1.then(&f2).unwrap().tensor(&g1.then(&g2).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn channels_stay_channels(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = random_channel(obj("A", 2, &mut r), obj("B", 2, &mut r), 0.0, &mut r);
        let g = random_channel(f.cod().clone(), obj("C", 1, &mut r), 0.0, &mut r);
        prop_assert!(f.then(&g).unwrap().classify(1e-12).is_channel);
    }

    #[test]
    fn permutations_invert(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let w = random_state(obj("X", 3, &mut r), 0.2, &mut r);
        let names = w.cod().names();
        let rev: Vec<String> = names.iter().rev().cloned().collect();
        let back = w.permute_cod(&rev).unwrap().permute_cod(&names).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn marginals_sum_to_one(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let w = random_state(obj("X", 3, &mut r), 0.3, &mut r);
        let keep = vec![w.cod().names()[1].clone()];
        let m = w.marginalize(&keep).unwrap();
        prop_assert!((m.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalisation_is_idempotent(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = random_morphism(obj("A", 2, &mut r), obj("B", 2, &mut r), 0.4, &mut r);
        let n = f.normalize();
        prop_assert!(n.normalize().max_abs_diff(&n).unwrap() < 1e-12);
        prop_assert!(n.classify(1e-12).is_partial_channel);
    }
}
