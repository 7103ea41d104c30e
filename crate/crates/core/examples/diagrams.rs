//! Network diagrams: the correspondence with open DAGs, local rewrites and
//! DOT output.

use causal_diagrams::catalog;
use causal_diagrams::diagram::{diagram_from_dag, open_dag_from_diagram, rewrite_fixpoint, RewriteRule};
use causal_diagrams::random::{random_cards, random_dag};
use causal_diagrams::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_dag(6, 0.4, &mut rng);
    let cards = random_cards(g.vertices(), 3, &mut rng);
    let inputs: Vec<String> = g.vertices().iter().filter(|v| g.parents(v).is_empty()).take(1).cloned().collect();
    let outputs: Vec<String> = g.vertices().iter().filter(|v| !inputs.contains(v)).skip(2).cloned().collect();
    let d = diagram_from_dag(&g, &inputs, &outputs, &cards)?;
    let (back, ins, outs) = open_dag_from_diagram(&d)?;
    println!("round trip: graph {}, inputs {}, outputs {}", back == g, ins == inputs, outs == outputs);

    let m = catalog::smoking().with_outputs(&["S".into()])?;
    let (small, _) = rewrite_fixpoint(m.diagram(), &[RewriteRule::DiscardFallthrough])?;
    println!("boxes before {:?}", m.diagram().box_multiset());
    println!("boxes after discarding {:?}", small.box_multiset());
    print!("{}", m.diagram().to_dot());
    Ok(())
}
