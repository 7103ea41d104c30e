use causal_diagrams::catalog;
use causal_diagrams::graph::{d_separated, d_separated_by_paths, latent_projection, open_path, rootify, vset, Admg, Dag, Rootification};
use causal_diagrams::random::{random_admg, random_dag};
use causal_diagrams::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn cycles_are_rejected() {
    assert!(matches!(Dag::new(&["A", "B"], &[("A", "B"), ("B", "A")]), Err(Error::Cycle(_))));
}

#[test]
fn collider_and_chain() {
    let g = Dag::new(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
    assert!(d_separated(&g, &vset(&["A"]), &vset(&["B"]), &vset::<&str>(&[])).unwrap());
    assert!(!d_separated(&g, &vset(&["A"]), &vset(&["B"]), &vset(&["C"])).unwrap());
    let path = open_path(&g, &vset(&["A"]), &vset(&["B"]), &vset(&["C"])).unwrap().unwrap();
    assert_eq!(path, vec!["A", "C", "B"]);

    let chain = Dag::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
    assert!(!d_separated(&chain, &vset(&["A"]), &vset(&["C"]), &vset::<&str>(&[])).unwrap());
    assert!(d_separated(&chain, &vset(&["A"]), &vset(&["C"]), &vset(&["B"])).unwrap());
}

#[test]
fn descendant_of_collider_opens() {
    let g = Dag::new(&["A", "B", "C", "D"], &[("A", "C"), ("B", "C"), ("C", "D")]).unwrap();
    assert!(!d_separated(&g, &vset(&["A"]), &vset(&["B"]), &vset(&["D"])).unwrap());
}

#[test]
fn topological_order_respects_edges() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let g = random_dag(8, 0.4, &mut r);
        let order = g.topological_order().unwrap();
        let pos = |v: &str| order.iter().position(|x| x == v).unwrap();
        for (a, b) in g.edges() {
            assert!(pos(a) < pos(b));
        }
    }
}

#[test]
fn c_components_of_catalog_graphs() {
    let g = catalog::confounded_mediator();
    assert_eq!(g.c_component("X").unwrap(), vset(&["X", "Z"]));
    assert!(!g.c_condition("X").unwrap());
    let fd = catalog::front_door();
    assert!(fd.c_condition("T").unwrap());
    assert_eq!(fd.c_components().len(), 2);
}

#[test]
fn rootifications() {
    let g = Admg::new(&["A", "B", "C"], &[], &[("A", "B"), ("B", "C"), ("A", "C")]).unwrap();
    let rho = rootify(&g, Rootification::Rho).unwrap();
    assert_eq!(rho.roots.len(), 3);
    let tilde = rootify(&g, Rootification::RhoTilde).unwrap();
    assert_eq!(tilde.roots, vec!["R_{A,B,C}"]);
    for r in [rho, tilde] {
        let back = latent_projection(&r.dag, &vset(g.vertices())).unwrap();
        assert_eq!(back.bidirected(), g.bidirected());
    }
}

#[test]
fn dot_output_lists_edges() {
    let dot = catalog::confounded_mediator().to_dot("g");
    assert!(dot.contains("\"X\" -> \"Z\";"));
    assert!(dot.contains("dir=both"));
}

proptest! {
    #[test]
    fn dsep_agrees_with_path_search(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(r.gen_range(2..=7), 0.4, &mut r);
        let mut vs = g.vertices().to_vec();
        vs.shuffle(&mut r);
        let w: Vec<String> = vs[2..].iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
        let (y, z, w) = (vset(&vs[..1]), vset(&vs[1..2]), vset(&w));
        let a = d_separated(&g, &y, &z, &w).unwrap();
        prop_assert_eq!(a, d_separated_by_paths(&g, &y, &z, &w).unwrap());
        prop_assert_eq!(a, open_path(&g, &y, &z, &w).unwrap().is_none());
        prop_assert_eq!(a, d_separated(&g, &z, &y, &w).unwrap());
    }

    #[test]
    fn rootification_projects_back(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g = random_admg(r.gen_range(2..=6), 0.4, 0.3, &mut r);
        for method in [Rootification::Rho, Rootification::RhoTilde] {
            let root = rootify(&g, method).unwrap();
            let back = latent_projection(&root.dag, &vset(g.vertices())).unwrap();
            prop_assert_eq!(back.directed(), g.directed());
            prop_assert_eq!(back.bidirected(), g.bidirected());
        }
    }
}
