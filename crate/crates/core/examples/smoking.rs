//! A causal Bayesian network: its joint, the Markov condition,
//! d-separation and interventions.

use std::collections::BTreeMap;

use causal_diagrams::catalog;
use causal_diagrams::graph::{d_separated, open_path, vset};
use causal_diagrams::identify::truncated_factorization;
use causal_diagrams::intervention::{apply, open_at, Intervention};
use causal_diagrams::model::{conditionally_independent, markov_check};
use causal_diagrams::semantics::{FinObject, Morphism};
use causal_diagrams::Result;

fn main() -> Result<()> {
    let m = catalog::smoking();
    println!("outputs {:?}, P(S, L, A) = {:?}", m.outputs(), m.output_state()?.data());
    println!("Markov condition holds: {}", markov_check(&m, 1e-12)?);

    let g = m.dag();
    let sep = d_separated(&g, &vset(&["S"]), &vset(&["A"]), &vset(&["B"]))?;
    let joint = m.maximal().output_state()?;
    let ci = conditionally_independent(&joint, &["S".into()], &["A".into()], &["B".into()], 1e-12)?;
    println!("S _||_ A | B: d-separated {}, independent {}", sep, ci);
    println!("S and A given L: {:?}", open_path(&g, &vset(&["S"]), &vset(&["A"]), &vset(&["L"]))?);

    let done = apply(&m, &Intervention::Do { var: "S".into(), value: 1 })?;
    println!("P(S, L, A ; do(S=1)) = {:?}", done.output_state()?.data());
    let doset: BTreeMap<String, usize> = [("S".to_string(), 1)].into_iter().collect();
    let tf = truncated_factorization(&m, &doset)?;
    println!("truncated factorisation agrees: {}", tf.approx_eq(&done.output_state()?, 1e-12));

    // a soft policy: smokers quit with probability 0.4
    let eta = Morphism::new(FinObject::atom("S", 2), FinObject::atom("S", 2), vec![1.0, 0.0, 0.4, 0.6])?;
    let soft = apply(&m, &Intervention::Local { var: "S".into(), eta })?;
    println!("P(L) under the policy = {:?}", soft.with_outputs(&["L".into()])?.output_state()?.data());

    // P(L, A ; do(S)) as an open model with S as input
    let open = open_at(&m.with_outputs(&["L".into(), "A".into()])?, &["S".into()])?;
    let ch = open.channel_of()?;
    for s in 0..2 {
        println!("P(L, A ; do(S={})) = {:?}", s, ch.row(s));
    }
    Ok(())
}
