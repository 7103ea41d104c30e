//! Parallel-worlds models, counterfactual states and their simplification
//! and identification.

mod idcf;
mod simplify;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::diagram::{Interpretation, NetworkDiagram, Node, NodeKind};
use crate::error::{invalid, shape, Error, Result};
use crate::intervention::{apply, compose_models, share_inputs, world_label, CompositionMode, Intervention};
use crate::model::{noise_box, CausalModel, Fcm, Mechanism};
use crate::semantics::{Atom, FinObject, Morphism, SoftMode, DEFAULT_TOL};

pub use idcf::{id_cf, id_cf_with_cards, r_fragments, BoundaryWire, CfIdOptions, CfIdentification, FailReason, RFragment};
pub use simplify::{simplify_cf, Simplified};

/// Largest number of joint noise values the enumeration oracle visits.
pub const ENUMERATION_BUDGET: usize = 10_000_000;

/// One world: the do-assignment, the observed facts and the variables asked about.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldTerm {
    #[serde(rename = "do", default)]
    pub do_: BTreeMap<String, usize>,
    #[serde(default)]
    pub cond: BTreeMap<String, usize>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl WorldTerm {
    pub fn new(do_: &[(&str, usize)], cond: &[(&str, usize)], outputs: &[&str]) -> Self {
        WorldTerm {
            do_: do_.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            cond: cond.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn interventions(&self) -> Vec<Intervention> {
        self.do_.iter().map(|(v, x)| Intervention::Do { var: v.clone(), value: *x }).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualTerms {
    pub worlds: Vec<WorldTerm>,
}

impl CounterfactualTerms {
    pub fn new(worlds: Vec<WorldTerm>) -> Self {
        CounterfactualTerms { worlds }
    }

    /// Names resolve, values are in range, facts and outputs are disjoint.
    pub fn check(&self, cards: &BTreeMap<String, usize>) -> Result<()> {
        if self.worlds.is_empty() {
            return Err(invalid("no worlds"));
        }
        for (j, w) in self.worlds.iter().enumerate() {
            for (v, x) in w.do_.iter().chain(&w.cond) {
                let c = *cards.get(v).ok_or_else(|| Error::UnknownName(v.clone()))?;
                if *x >= c {
                    return Err(Error::Index(format!("value {} of `{}` in world {}", x, v, j + 1)));
                }
            }
            let mut seen = BTreeSet::new();
            for e in &w.outputs {
                if !cards.contains_key(e) {
                    return Err(Error::UnknownName(e.clone()));
                }
                if w.cond.contains_key(e) {
                    return Err(invalid(format!("`{}` is both observed and asked about in world {}", e, j + 1)));
                }
                if !seen.insert(e) {
                    return Err(invalid(format!("`{}` asked twice in world {}", e, j + 1)));
                }
            }
        }
        Ok(())
    }

    /// Some world carries a fact and another one a question.
    pub fn is_counterfactual(&self) -> bool {
        let k = self.worlds.len();
        (0..k).any(|j| !self.worlds[j].cond.is_empty() && (0..k).any(|i| i != j && !self.worlds[i].outputs.is_empty()))
    }

    /// Output labels `E#j` in world order.
    pub fn output_labels(&self) -> Vec<String> {
        self.worlds
            .iter()
            .enumerate()
            .flat_map(|(j, w)| w.outputs.iter().map(move |e| world_label(e, j + 1)))
            .collect()
    }

    pub fn sigmas(&self) -> Vec<Vec<Intervention>> {
        self.worlds.iter().map(|w| w.interventions()).collect()
    }
}

fn worlds_model(fcm: &Fcm, sigmas: &[Vec<Intervention>], deterministic: bool) -> Result<CausalModel> {
    if sigmas.is_empty() {
        return Err(invalid("no worlds"));
    }
    let f = fcm.with_outputs(&fcm.cards().keys().cloned().collect::<Vec<_>>())?.deterministic_part()?;
    let mut copies = Vec::new();
    for (j, sig) in sigmas.iter().enumerate() {
        let mut m = f.clone();
        for s in sig {
            m = apply(&m, s)?;
        }
        if deterministic {
            if let Some(mech) = m.mechanisms().iter().find(|x| !x.kernel.classify(DEFAULT_TOL).is_deterministic) {
                return Err(invalid(format!("world {} is not deterministic at `{}`", j + 1, mech.target)));
            }
        }
        copies.push(m);
    }
    let pw = share_inputs(&copies)?;
    let mut cards = BTreeMap::new();
    let mut mechs = Vec::new();
    for e in fcm.entries() {
        cards.insert(e.noise.clone(), e.noise_card);
        mechs.push(Mechanism::new(e.noise.clone(), vec![], fcm.noise_state(&e.target)?).named(noise_box(&e.target)));
    }
    let noise = CausalModel::from_mechanisms(&cards, mechs, &[], pw.inputs())?;
    compose_models(&noise, &pw, CompositionMode::Sequential)
}

/// Intervened copies of the deterministic part of `fcm`, one per world and
/// all reading one shared draw of the noises. World variables are `X#j`.
pub fn parallel_worlds(fcm: &Fcm, sigmas: &[Vec<Intervention>]) -> Result<CausalModel> {
    worlds_model(fcm, sigmas, true)
}

/// The counterfactual diagram before normalisation: do-boxes as sharp
/// states, a sharp effect per fact, the asked variables as outputs.
pub fn counterfactual_diagram(fcm: &Fcm, terms: &CounterfactualTerms) -> Result<(NetworkDiagram, Interpretation)> {
    terms.check(fcm.cards())?;
    let pw = parallel_worlds(fcm, &terms.sigmas())?;
    let mut d = pw.diagram().clone();
    let mut fixed: BTreeMap<String, usize> = BTreeMap::new();
    for (j, w) in terms.worlds.iter().enumerate() {
        for (v, x) in &w.do_ {
            fixed.insert(world_label(v, j + 1), *x);
        }
    }
    for n in &mut d.nodes {
        if let Some(x) = n.output.as_ref().and_then(|o| fixed.get(o)) {
            n.kind = NodeKind::SharpState(*x);
            n.inputs.clear();
        }
    }
    for (j, w) in terms.worlds.iter().enumerate() {
        for (v, x) in &w.cond {
            d.nodes.push(Node::sharp_effect(*x, world_label(v, j + 1)));
        }
    }
    d.outputs = terms.output_labels();
    d.strict = false;
    Ok((d, pw.interpretation().clone()))
}

#[derive(Clone, Debug)]
pub struct CounterfactualState {
    pub diagram: NetworkDiagram,
    pub interpretation: Interpretation,
    pub unnormalised: Morphism,
    pub normalised: Morphism,
}

/// The counterfactual as a normalised state over the asked variables;
/// impossible facts give the zero state.
pub fn counterfactual_state(fcm: &Fcm, terms: &CounterfactualTerms) -> Result<CounterfactualState> {
    if !terms.is_counterfactual() {
        return Err(invalid("counterfactual terms need a fact in one world and a question in another"));
    }
    let (diagram, interpretation) = counterfactual_diagram(fcm, terms)?;
    let unnormalised = diagram.evaluate(&interpretation)?;
    let normalised = unnormalised.normalize();
    Ok(CounterfactualState { diagram, interpretation, unnormalised, normalised })
}

/// Weight of every joint output value, by enumerating all noise values and
/// running each world's functions. Not normalised.
pub fn enumerate_counterfactual(fcm: &Fcm, terms: &CounterfactualTerms) -> Result<Morphism> {
    terms.check(fcm.cards())?;
    let entries = fcm.entries();
    let mut total: usize = 1;
    for e in entries {
        total = total.checked_mul(e.noise_card).filter(|t| *t <= ENUMERATION_BUDGET).ok_or_else(|| {
            Error::Budget(format!("more than {} joint noise values", ENUMERATION_BUDGET))
        })?;
    }
    let pos: HashMap<&str, usize> = entries.iter().enumerate().map(|(i, e)| (e.target.as_str(), i)).collect();
    let labels = terms.output_labels();
    let out_atoms: Vec<Atom> = terms
        .worlds
        .iter()
        .flat_map(|w| w.outputs.iter())
        .zip(&labels)
        .map(|(v, l)| Atom::new(l.clone(), fcm.cards()[v]))
        .collect();
    let cod = FinObject::new(out_atoms)?;
    let mut acc = vec![0.0; cod.size()];
    let mut u = vec![0usize; entries.len()];
    let mut vals = vec![0usize; entries.len()];
    let mut parents = Vec::new();
    for _ in 0..total {
        let weight: f64 = entries.iter().zip(&u).map(|(e, &k)| e.lambda[k]).product();
        if weight > 0.0 {
            let mut tuple = Vec::with_capacity(labels.len());
            let mut consistent = true;
            for w in &terms.worlds {
                for (i, e) in entries.iter().enumerate() {
                    vals[i] = match w.do_.get(&e.target) {
                        Some(x) => *x,
                        None => {
                            parents.clear();
                            parents.extend(e.parents.iter().map(|p| vals[pos[p.as_str()]]));
                            fcm.apply_function(e, &parents, u[i])
                        }
                    };
                }
                if w.cond.iter().any(|(v, x)| vals[pos[v.as_str()]] != *x) {
                    consistent = false;
                    break;
                }
                tuple.extend(w.outputs.iter().map(|v| vals[pos[v.as_str()]]));
            }
            if consistent {
                acc[cod.index_of(&tuple)?] += weight;
            }
        }
        // next noise tuple, last entry fastest
        for i in (0..u.len()).rev() {
            u[i] += 1;
            if u[i] < entries[i].noise_card {
                break;
            }
            u[i] = 0;
        }
    }
    Morphism::state(cod, acc)
}

/// Ground truth by enumeration: [`enumerate_counterfactual`], normalised.
pub fn evaluate_counterfactual(fcm: &Fcm, terms: &CounterfactualTerms) -> Result<Morphism> {
    Ok(enumerate_counterfactual(fcm, terms)?.normalize())
}

/// Evidence on one world variable: an effect for [`SoftMode::Upper`], a
/// state for [`SoftMode::Lower`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldEvidence {
    pub world: usize,
    pub var: String,
    pub evidence: Morphism,
}

/// Counterfactual under arbitrary interventions and soft evidence. `Upper`
/// weights by the effects and normalises once; `Lower` mixes the sharp
/// conditionals with the evidence states. `outputs[j]` lists the asked
/// variables of world `j + 1`.
pub fn generalized_counterfactual(
    fcm: &Fcm,
    sigmas: &[Vec<Intervention>],
    evidence: &[WorldEvidence],
    outputs: &[Vec<String>],
    mode: SoftMode,
) -> Result<Morphism> {
    if outputs.len() != sigmas.len() {
        return Err(shape("one output list per world"));
    }
    let m = worlds_model(fcm, sigmas, false)?;
    let asked: Vec<String> =
        outputs.iter().enumerate().flat_map(|(j, o)| o.iter().map(move |v| world_label(v, j + 1))).collect();
    let on: Vec<String> = evidence.iter().map(|e| world_label(&e.var, e.world)).collect();
    if let Some(c) = on.iter().find(|c| asked.contains(c)) {
        return Err(invalid(format!("`{}` is both evidence and asked about", c)));
    }
    let mut keep = asked.clone();
    keep.extend(on.iter().cloned());
    let omega = m.output_state()?.marginalize(&keep)?.permute_cod(&keep)?;
    if evidence.is_empty() {
        return Ok(omega);
    }
    let mut ev: Option<Morphism> = None;
    for (e, label) in evidence.iter().zip(&on) {
        let card = omega.cod().card_of(label)?;
        let obj = FinObject::atom(label.clone(), card);
        let piece = match mode {
            SoftMode::Upper if e.evidence.is_effect() && e.evidence.dom().size() == card => {
                e.evidence.with_objects(obj, FinObject::unit())?
            }
            SoftMode::Lower if e.evidence.is_state() && e.evidence.cod().size() == card => {
                e.evidence.with_objects(FinObject::unit(), obj)?
            }
            _ => return Err(shape(format!("evidence on `{}` has the wrong shape for {:?} conditioning", label, mode))),
        };
        ev = Some(match ev {
            None => piece,
            Some(prev) => prev.tensor(&piece),
        });
    }
    omega.soft_conditional(&on, &ev.expect("nonempty evidence"), mode)?.permute_cod(&asked)
}
