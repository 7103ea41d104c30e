use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CausalModel, Mechanism};
use crate::diagram::{absorb, mechanism_box};
use crate::error::{invalid, shape, Error, Result};
use crate::graph::Dag;
use crate::semantics::{Atom, FinObject, Morphism, DEFAULT_TOL};

/// One endogenous variable: `target = function(parents, noise)` with
/// `noise ~ lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcmEntry {
    pub target: String,
    pub parents: Vec<String>,
    pub noise: String,
    pub noise_card: usize,
    /// value table indexed by `(parents…, noise)`, noise fastest
    pub function: Vec<usize>,
    pub lambda: Vec<f64>,
}

/// Functional causal model: deterministic mechanisms with private noises.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fcm {
    cards: BTreeMap<String, usize>,
    entries: Vec<FcmEntry>,
    outputs: Vec<String>,
}

pub fn function_box(x: &str) -> String {
    format!("f_{}", x)
}

pub fn noise_box(x: &str) -> String {
    format!("lambda_{}", x)
}

impl Fcm {
    pub fn new(cards: BTreeMap<String, usize>, entries: Vec<FcmEntry>, outputs: Vec<String>) -> Result<Self> {
        let fcm = Fcm { cards, entries, outputs };
        fcm.check()?;
        let mut edges = std::collections::BTreeSet::new();
        for e in &fcm.entries {
            for p in &e.parents {
                edges.insert((p.clone(), e.target.clone()));
            }
        }
        let order = Dag::from_parts(fcm.cards.keys().cloned().collect(), edges)?.topological_order()?;
        let Fcm { cards, mut entries, outputs } = fcm;
        entries.sort_by_key(|e| order.iter().position(|v| *v == e.target));
        for o in &outputs {
            if !cards.contains_key(o) {
                return Err(Error::UnknownName(o.clone()));
            }
        }
        Ok(Fcm { cards, entries, outputs })
    }

    fn check(&self) -> Result<()> {
        let mut targets = std::collections::BTreeSet::new();
        for e in &self.entries {
            let card = *self.cards.get(&e.target).ok_or_else(|| Error::UnknownName(e.target.clone()))?;
            if !targets.insert(e.target.clone()) {
                return Err(invalid(format!("two functions for `{}`", e.target)));
            }
            if self.cards.contains_key(&e.noise) {
                return Err(invalid(format!("noise `{}` clashes with an endogenous variable", e.noise)));
            }
            let mut rows = e.noise_card;
            for p in &e.parents {
                rows *= *self.cards.get(p).ok_or_else(|| Error::UnknownName(p.clone()))?;
            }
            if e.function.len() != rows || e.lambda.len() != e.noise_card || e.noise_card == 0 {
                return Err(shape(format!("function or noise table of `{}` has the wrong size", e.target)));
            }
            if e.function.iter().any(|v| *v >= card) {
                return Err(shape(format!("function of `{}` leaves its range", e.target)));
            }
            let s: f64 = e.lambda.iter().sum();
            if (s - 1.0).abs() > DEFAULT_TOL || e.lambda.iter().any(|x| *x < 0.0) {
                return Err(invalid(format!("noise distribution of `{}` is not normalised", e.target)));
            }
        }
        for v in self.cards.keys() {
            if !targets.contains(v) {
                return Err(invalid(format!("endogenous `{}` has no function", v)));
            }
        }
        Ok(())
    }

    pub fn cards(&self) -> &BTreeMap<String, usize> {
        &self.cards
    }

    pub fn endogenous(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.target.clone()).collect()
    }

    /// Entries in a topological order.
    pub fn entries(&self) -> &[FcmEntry] {
        &self.entries
    }

    pub fn entry(&self, x: &str) -> Result<&FcmEntry> {
        self.entries.iter().find(|e| e.target == x).ok_or_else(|| Error::UnknownName(x.to_string()))
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn with_outputs(&self, outputs: &[String]) -> Result<Self> {
        Fcm::new(self.cards.clone(), self.entries.clone(), outputs.to_vec())
    }

    /// `f_X : parents ⊗ U_X → X`.
    pub fn function(&self, x: &str) -> Result<Morphism> {
        let e = self.entry(x)?;
        let mut atoms: Vec<Atom> = e.parents.iter().map(|p| Atom::new(p.clone(), self.cards[p])).collect();
        atoms.push(Atom::new(e.noise.clone(), e.noise_card));
        let dom = FinObject::new(atoms)?;
        let card = self.cards[x];
        Morphism::from_fn(dom.clone(), FinObject::atom(x, card), |d, c| {
            (e.function[dom.index_of(d).unwrap()] == c[0]) as u8 as f64
        })
    }

    pub fn noise_state(&self, x: &str) -> Result<Morphism> {
        let e = self.entry(x)?;
        Morphism::state(FinObject::atom(e.noise.clone(), e.noise_card), e.lambda.clone())
    }

    /// Value of `x` given its parents' values (in entry order) and its noise.
    pub fn apply_function(&self, e: &FcmEntry, parents: &[usize], u: usize) -> usize {
        let mut idx = 0;
        for (p, v) in e.parents.iter().zip(parents) {
            idx = idx * self.cards[p] + v;
        }
        e.function[idx * e.noise_card + u]
    }

    /// Noises as inputs, boxes `f_X` only.
    pub fn deterministic_part(&self) -> Result<CausalModel> {
        let mut cards = self.cards.clone();
        let mut mechs = Vec::new();
        let mut inputs = Vec::new();
        for e in &self.entries {
            cards.insert(e.noise.clone(), e.noise_card);
            inputs.push(e.noise.clone());
            let mut parents = e.parents.clone();
            parents.push(e.noise.clone());
            mechs.push(Mechanism::new(e.target.clone(), parents, self.function(&e.target)?).named(function_box(&e.target)));
        }
        CausalModel::from_mechanisms(&cards, mechs, &inputs, &self.outputs)
    }

    /// The full model over `V ∪ U` with boxes `f_X` and `lambda_X`.
    pub fn model(&self) -> Result<CausalModel> {
        let mut cards = self.cards.clone();
        let mut mechs = Vec::new();
        for e in &self.entries {
            cards.insert(e.noise.clone(), e.noise_card);
            let mut parents = e.parents.clone();
            parents.push(e.noise.clone());
            mechs.push(Mechanism::new(e.target.clone(), parents, self.function(&e.target)?).named(function_box(&e.target)));
            mechs.push(Mechanism::new(e.noise.clone(), vec![], self.noise_state(&e.target)?).named(noise_box(&e.target)));
        }
        CausalModel::from_mechanisms(&cards, mechs, &[], &self.outputs)
    }
}

/// Dilates every mechanism of a closed model into a deterministic function
/// of its parents and a private noise `U_X`.
pub fn fcm_from_model(m: &CausalModel) -> Result<Fcm> {
    if !m.is_closed() {
        return Err(invalid("FCM conversion needs a closed model"));
    }
    let mut entries = Vec::new();
    for mech in m.mechanisms() {
        let noise = format!("U_{}", mech.target);
        let dil = mech.kernel.functional_dilation(&noise)?;
        let noise_card = dil.noise.size();
        let f = &dil.f;
        let function: Vec<usize> = (0..f.dom().size())
            .map(|d| f.row(d).iter().position(|x| *x > 0.5).ok_or_else(|| invalid("dilation is not functional")))
            .collect::<Result<_>>()?;
        entries.push(FcmEntry {
            target: mech.target.clone(),
            parents: mech.parents.clone(),
            noise,
            noise_card,
            function,
            lambda: if noise_card == 1 { vec![1.0] } else { dil.lambda.data().to_vec() },
        });
    }
    Fcm::new(m.cards().clone(), entries, m.outputs().to_vec())
}

/// Collapses each `(f_X, lambda_X)` into `c_X = f_X ∘ (id ⊗ lambda_X)`.
pub fn model_from_fcm(f: &Fcm) -> Result<CausalModel> {
    let mut mechs = Vec::new();
    for e in f.entries() {
        let fx = f.function(&e.target)?;
        if !fx.classify(DEFAULT_TOL).is_deterministic {
            return Err(invalid(format!("f_{} is not deterministic", e.target)));
        }
        let c = absorb(&fx, &f.noise_state(&e.target)?, e.parents.len())?;
        mechs.push(Mechanism::new(e.target.clone(), e.parents.clone(), c).named(mechanism_box(&e.target)));
    }
    CausalModel::from_mechanisms(f.cards(), mechs, &[], f.outputs())
}
