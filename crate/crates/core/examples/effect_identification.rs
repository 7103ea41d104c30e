//! Identifying interventional distributions from observational data: the
//! c-component theorem on the front-door graph, a scripted derivation and a
//! non-identifiability witness.

use std::collections::BTreeMap;

use causal_diagrams::catalog;
use causal_diagrams::graph::Rootification;
use causal_diagrams::identify::{c_component_expression, c_component_partition, search_witness, truncated_factorization, EtaShape, PStarTables, WitnessTarget};
use causal_diagrams::random::random_rootified_model;
use causal_diagrams::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = catalog::front_door();
    let cards: BTreeMap<String, usize> = g.vertices().iter().map(|v| (v.clone(), 2)).collect();
    let p = c_component_partition(&g, "T")?.expect("front door satisfies the c-component condition");
    println!("order {:?}, B = {:?}, C = {:?}", p.order, p.b, p.c);
    let e = c_component_expression(&p, &EtaShape::Do { value: 1 }, &cards)?;
    println!("{}", e);
    let (m, observed) = random_rootified_model(&g, Rootification::RhoTilde, &cards, 2, &mut rng)?;
    let data = PStarTables::from_model_subsets(&m, &observed, &[vec![]])?;
    let got = e.evaluate(&data)?;
    let truth = truncated_factorization(&m, &[("T".to_string(), 1)].into_iter().collect())?.permute_cod(&got.cod().names())?;
    println!("expression vs surgery: {:e}", got.max_abs_diff(&truth)?);

    let g74 = catalog::two_outcomes();
    let cards74: BTreeMap<String, usize> = g74.vertices().iter().map(|v| (v.clone(), 2)).collect();
    let (m74, obs74) = random_rootified_model(&g74, Rootification::Rho, &cards74, 2, &mut rng)?;
    let e74 = catalog::two_outcomes_expression(0, 2);
    let got = e74.evaluate(&PStarTables::from_model_subsets(&m74, &obs74, &[vec![]])?)?;
    let truth = truncated_factorization(&m74, &[("X".to_string(), 0)].into_iter().collect())?;
    let truth = truth.marginalize(&["Y1".into(), "Y2".into()])?;
    println!("{}\n  vs surgery: {:e}", e74, got.max_abs_diff(&truth)?);

    println!("c-component condition at X with X -> Z -> Y, X <-> Z: {}", c_component_partition(&catalog::confounded_mediator(), "X")?.is_some());
    let w = search_witness(&catalog::confounded_mediator(), &WitnessTarget::Marginal { x: "X".into(), y: "Y".into() }, 1, 4, 60)?;
    let a = w.confounded.output_state()?;
    let b = w.unconfounded.output_state()?.permute_cod(&a.cod().names())?;
    println!("witness: P(O) differs by {:e}, P(Y ; do X) by {:.3}", a.max_abs_diff(&b)?, w.distance);
    Ok(())
}
