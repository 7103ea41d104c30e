//! Finite stochastic matrices: conditioning, disintegration, normalisation
//! and soft evidence.

use causal_diagrams::semantics::{FinObject, Morphism, SoftMode};
use causal_diagrams::Result;

fn main() -> Result<()> {
    let xy = FinObject::from_pairs(&[("X", 2), ("Y", 3)])?;
    let omega = Morphism::state(xy, vec![0.10, 0.20, 0.10, 0.0, 0.0, 0.60])?;

    let px = omega.marginalize(&["X".into()])?;
    let y_given_x = omega.conditional(&["X".into()])?;
    println!("P(X) = {:?}", px.data());
    for x in 0..2 {
        println!("P(Y | X={}) = {:?}", x, y_given_x.row(x));
    }
    // disintegration: P(x) P(y|x) recovers the joint
    let mut worst: f64 = 0.0;
    for x in 0..2 {
        for y in 0..3 {
            worst = worst.max((px.get(0, x) * y_given_x.get(x, y) - omega.at(&[], &[x, y])?).abs());
        }
    }
    println!("disintegration error {:e}", worst);

    // a zero column stays zero under normalisation
    let f = Morphism::new(FinObject::atom("A", 3), FinObject::atom("B", 2), vec![1.0, 3.0, 0.0, 0.0, 2.0, 2.0])?;
    println!("normalised rows {:?}", f.normalize().data());

    // an unreliable report about X, as an effect and as a state
    let report = Morphism::effect(FinObject::atom("X", 2), vec![0.9, 0.2])?;
    let upper = omega.soft_conditional(&["X".into()], &report, SoftMode::Upper)?;
    println!("upper update of Y: {:?}", upper.data());
    let belief = Morphism::state(FinObject::atom("X", 2), vec![0.3, 0.7])?;
    let lower = omega.soft_conditional(&["X".into()], &belief, SoftMode::Lower)?;
    println!("lower update of Y: {:?}", lower.data());
    Ok(())
}
