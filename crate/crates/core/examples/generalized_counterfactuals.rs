//! Counterfactuals under soft evidence: the two update procedures agree on
//! sharp facts and differ on an unreliable report.

use causal_diagrams::catalog;
use causal_diagrams::counterfactual::{generalized_counterfactual, WorldEvidence};
use causal_diagrams::semantics::{FinObject, Morphism, SoftMode};
use causal_diagrams::Result;

fn main() -> Result<()> {
    let fcm = catalog::aspirin_fcm();
    let (sigmas, upper, lower, outputs) = catalog::fuzzy_aspirin();
    let a = generalized_counterfactual(&fcm, &sigmas, &upper, &outputs, SoftMode::Upper)?;
    let b = generalized_counterfactual(&fcm, &sigmas, &lower, &outputs, SoftMode::Lower)?;
    println!("soft report, upper: {:?}", a.data());
    println!("soft report, lower: {:?}", b.data());

    let y = FinObject::atom("Y", 2);
    let sharp_effect = vec![WorldEvidence { world: 1, var: "Y".into(), evidence: Morphism::effect(y.clone(), vec![0.0, 1.0])? }];
    let sharp_state = vec![WorldEvidence { world: 1, var: "Y".into(), evidence: Morphism::state(y, vec![0.0, 1.0])? }];
    let a = generalized_counterfactual(&fcm, &sigmas, &sharp_effect, &outputs, SoftMode::Upper)?;
    let b = generalized_counterfactual(&fcm, &sigmas, &sharp_state, &outputs, SoftMode::Lower)?;
    println!("sharp fact: upper {:?}, lower {:?}", a.data(), b.data());
    Ok(())
}
