//! The worked examples: graphs, models and queries.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::counterfactual::{CounterfactualTerms, WorldEvidence, WorldTerm};
use crate::error::Result;
use crate::graph::{rootify, Admg, Rootification};
use crate::identify::IdentifyingExpression;
use crate::intervention::Intervention;
use crate::model::{CausalModel, Fcm, FcmEntry};
use crate::random::random_fcm;
use crate::semantics::{FinObject, Morphism};

fn binary(vs: &[&str]) -> BTreeMap<String, usize> {
    vs.iter().map(|v| (v.to_string(), 2)).collect()
}

/// Age `A`, background `B`, smoking `S`, lung cancer `L`; `B` unobserved.
pub fn smoking() -> CausalModel {
    CausalModel::cbn(
        &binary(&["A", "B", "S", "L"]),
        &[
            ("A", &[], &[0.6, 0.4]),
            ("B", &["A"], &[0.7, 0.3, 0.2, 0.8]),
            ("S", &["B"], &[0.9, 0.1, 0.3, 0.7]),
            ("L", &["S", "B", "A"], &[0.9, 0.1, 0.8, 0.2, 0.7, 0.3, 0.6, 0.4, 0.5, 0.5, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8]),
        ],
        &["S", "L", "A"],
    )
    .expect("static model")
}

/// `X → Z → Y` with `X ↔ Z`.
pub fn confounded_mediator() -> Admg {
    Admg::new(&["X", "Z", "Y"], &[("X", "Z"), ("Z", "Y")], &[("X", "Z")]).expect("static graph")
}

/// `X → Z ← Y` with `X ↔ Z`.
pub fn confounded_collider() -> Admg {
    Admg::new(&["X", "Z", "Y"], &[("X", "Z"), ("Y", "Z")], &[("X", "Z")]).expect("static graph")
}

/// Smoking `S`, tar `T`, cancer `L`: `S → T → L` with `S ↔ L`.
pub fn front_door() -> Admg {
    Admg::new(&["S", "T", "L"], &[("S", "T"), ("T", "L")], &[("S", "L")]).expect("static graph")
}

/// `W1 → X → Y1`, `W2 → Y2`, with `W1 ↔ Y1` and `W1 ↔ W2`.
pub fn two_outcomes() -> Admg {
    Admg::new(
        &["W1", "W2", "X", "Y1", "Y2"],
        &[("W1", "X"), ("X", "Y1"), ("W2", "Y2")],
        &[("W1", "Y1"), ("W1", "W2")],
    )
    .expect("static graph")
}

/// `P(Y1, Y2 ; do(X = x))` on [`two_outcomes`]: the `Y1` factor by comb
/// disintegration of `P(Y1, W1, X)`, tensored with the marginal `P(Y2)`.
pub fn two_outcomes_expression(x: usize, x_card: usize) -> IdentifyingExpression {
    let s = |v: &[&str]| -> Vec<String> { v.iter().map(|x| x.to_string()).collect() };
    let y1 = IdentifyingExpression::observational_conditional(&s(&["W1"]), &[])
        .compose(IdentifyingExpression::SharpState { atom: "X".into(), card: x_card, value: x })
        .compose(IdentifyingExpression::observational_conditional(&s(&["Y1"]), &s(&["W1", "X"])))
        .marginal(&s(&["Y1"]));
    y1.tensor(IdentifyingExpression::data(&[], &s(&["Y2"])))
}

/// `X → W → Y ← Z ← D` with `X ↔ Y`.
pub fn three_worlds() -> Admg {
    Admg::new(&["X", "W", "Y", "Z", "D"], &[("X", "W"), ("W", "Y"), ("D", "Z"), ("Z", "Y")], &[("X", "Y")]).expect("static graph")
}

/// `P(Y#1 | X#2 = xt, D#2 = d, Z#3 = z)` with `do(X = x)` in world 1 and
/// `do(D = d)` in world 3.
pub fn three_worlds_terms(x: usize, xt: usize, d: usize, z: usize) -> CounterfactualTerms {
    CounterfactualTerms::new(vec![
        WorldTerm::new(&[("X", x)], &[], &["Y"]),
        WorldTerm::new(&[], &[("X", xt), ("D", d)], &[]),
        WorldTerm::new(&[("D", d)], &[("Z", z)], &[]),
    ])
}

/// A binary model on the rootified graph of [`three_worlds`].
pub fn three_worlds_fcm(seed: u64) -> Result<Fcm> {
    let r = rootify(&three_worlds(), Rootification::RhoTilde)?;
    let mut cards = binary(&["X", "W", "Y", "Z", "D"]);
    for root in &r.roots {
        cards.insert(root.clone(), 2);
    }
    random_fcm(&r.dag, &cards, 3, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Aspirin `X` and headache `Y`: `X → Y`.
pub fn aspirin() -> Admg {
    Admg::new(&["X", "Y"], &[("X", "Y")], &[]).expect("static graph")
}

/// `X = U_X`; `U_Y` picks a response type (never, relieved by aspirin,
/// caused by aspirin, always).
pub fn aspirin_fcm() -> Fcm {
    Fcm::new(
        binary(&["X", "Y"]),
        vec![
            FcmEntry { target: "X".into(), parents: vec![], noise: "U_X".into(), noise_card: 2, function: vec![0, 1], lambda: vec![0.4, 0.6] },
            FcmEntry {
                target: "Y".into(),
                parents: vec!["X".into()],
                noise: "U_Y".into(),
                noise_card: 4,
                function: vec![0, 1, 0, 1, 0, 0, 1, 1],
                lambda: vec![0.3, 0.4, 0.1, 0.2],
            },
        ],
        vec!["X".into(), "Y".into()],
    )
    .expect("static model")
}

/// `P(Y#2 | X#1 = x, Y#1 = y)` with `do(X = xt)` in world 2.
pub fn aspirin_terms(x: usize, y: usize, xt: usize) -> CounterfactualTerms {
    CounterfactualTerms::new(vec![WorldTerm::new(&[], &[("X", x), ("Y", y)], &[]), WorldTerm::new(&[("X", xt)], &[], &["Y"])])
}

/// `X → Y`, `X → Z`, with `Y ↔ W1 ↔ W2 ↔ Z`.
pub fn conflicting_worlds() -> Admg {
    Admg::new(
        &["X", "Y", "Z", "W1", "W2"],
        &[("X", "Y"), ("X", "Z")],
        &[("Y", "W1"), ("W1", "W2"), ("W2", "Z")],
    )
    .expect("static graph")
}

/// `P(W1#1, W2#1, Y#2, Z#3)` with `do(X = x)` in world 2 and `do(X = xp)` in world 3.
pub fn conflicting_worlds_terms(x: usize, xp: usize) -> CounterfactualTerms {
    CounterfactualTerms::new(vec![
        WorldTerm::new(&[], &[], &["W1", "W2"]),
        WorldTerm::new(&[("X", x)], &[], &["Y"]),
        WorldTerm::new(&[("X", xp)], &[], &["Z"]),
    ])
}

/// Soft evidence on two worlds of the aspirin model: world 1 is observed
/// through an unreliable report on `Y`, world 2 intervenes `do(X = 1)` and
/// asks for `Y`. Returns the interventions, the report as an effect, the
/// report as a state and the asked variables.
pub fn fuzzy_aspirin() -> (Vec<Vec<Intervention>>, Vec<WorldEvidence>, Vec<WorldEvidence>, Vec<Vec<String>>) {
    let o = FinObject::atom("Y", 2);
    let sigmas = vec![vec![], vec![Intervention::Do { var: "X".into(), value: 1 }]];
    let effect = Morphism::effect(o.clone(), vec![0.2, 0.9]).expect("static effect");
    let state = Morphism::state(o, vec![0.3, 0.7]).expect("static state");
    let upper = vec![WorldEvidence { world: 1, var: "Y".into(), evidence: effect }];
    let lower = vec![WorldEvidence { world: 1, var: "Y".into(), evidence: state }];
    (sigmas, upper, lower, vec![vec![], vec!["Y".into()]])
}
