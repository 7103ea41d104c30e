//! Counterfactuals: parallel worlds, the simplification sweep and
//! identification from interventional data.

use std::collections::BTreeMap;

use causal_diagrams::catalog;
use causal_diagrams::counterfactual::{
    counterfactual_diagram, enumerate_counterfactual, evaluate_counterfactual, id_cf_with_cards, simplify_cf, CfIdOptions,
};
use causal_diagrams::graph::{rootify, Rootification};
use causal_diagrams::Result;

fn main() -> Result<()> {
    let fcm = catalog::aspirin_fcm();
    let terms = catalog::aspirin_terms(1, 0, 0);
    println!("P(Y#2 | X#1=1, Y#1=0 ; do(X=0) in world 2) = {:?}", evaluate_counterfactual(&fcm, &terms)?.data());
    println!("unnormalised by enumeration: {:?}", enumerate_counterfactual(&fcm, &terms)?.data());

    let g = catalog::three_worlds();
    let terms = catalog::three_worlds_terms(1, 0, 1, 1);
    let fcm = catalog::three_worlds_fcm(7)?;
    let (d, interp) = counterfactual_diagram(&fcm, &terms)?;
    let order = rootify(&g, Rootification::RhoTilde)?.dag.topological_order()?;
    let s = simplify_cf(&d, &order, &order)?;
    println!("boxes before {:?}", d.box_multiset());
    println!("boxes after  {:?}", s.diagram.box_multiset());
    println!("value preserved: {}", s.evaluate(&interp)?.approx_eq(&d.evaluate(&interp)?, 1e-12));

    let cards: BTreeMap<String, usize> = g.vertices().iter().map(|v| (v.clone(), 2)).collect();
    let r = id_cf_with_cards(&g, &terms, &cards, &CfIdOptions::default())?;
    if let Some(e) = r.expression() {
        println!("identified: {}", e);
    }
    for (name, g, t) in [
        ("aspirin", catalog::aspirin(), catalog::aspirin_terms(1, 0, 0)),
        ("conflicting worlds", catalog::conflicting_worlds(), catalog::conflicting_worlds_terms(0, 1)),
    ] {
        let cards: BTreeMap<String, usize> = g.vertices().iter().map(|v| (v.clone(), 2)).collect();
        println!("{}: {:?}", name, id_cf_with_cards(&g, &t, &cards, &CfIdOptions::default())?.fail_reason());
    }
    Ok(())
}
