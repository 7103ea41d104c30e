//! Causal models: a strict network diagram with a channel for every box.

mod fcm;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagram::{mechanism_box, Interpretation, NetworkDiagram, Node};
use crate::error::{invalid, shape, Error, Result};
use crate::graph::{Dag, VSet};
use crate::semantics::{Atom, FinObject, Morphism, DEFAULT_TOL};

pub use fcm::{fcm_from_model, function_box, model_from_fcm, noise_box, Fcm, FcmEntry};

/// A mechanism for one variable: `kernel : parents → target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub box_name: String,
    pub target: String,
    pub parents: Vec<String>,
    pub kernel: Morphism,
}

impl Mechanism {
    pub fn new(target: impl Into<String>, parents: Vec<String>, kernel: Morphism) -> Self {
        let target = target.into();
        Mechanism { box_name: mechanism_box(&target), target, parents, kernel }
    }

    pub fn named(mut self, box_name: impl Into<String>) -> Self {
        self.box_name = box_name.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalModel {
    diagram: NetworkDiagram,
    interp: Interpretation,
}

impl CausalModel {
    pub fn new(diagram: NetworkDiagram, interp: Interpretation) -> Result<Self> {
        let report = diagram.validate(true);
        if !report.ok {
            return Err(Error::Invalid(report.violations.join("; ")));
        }
        for n in &diagram.nodes {
            let b = n.kind.box_name().unwrap();
            let k = interp.get(b)?;
            let in_cards: Vec<usize> = n.inputs.iter().map(|w| diagram.card(w)).collect::<Result<_>>()?;
            let out = diagram.card(n.output.as_ref().unwrap())?;
            if k.dom().cards() != in_cards || k.cod().size() != out {
                return Err(shape(format!("box `{}` does not fit its wires {:?} → {:?}", b, n.inputs, n.output)));
            }
            if !k.classify(DEFAULT_TOL).is_channel {
                return Err(invalid(format!("mechanism `{}` is not a channel", b)));
            }
        }
        Ok(CausalModel { diagram, interp })
    }

    /// Builds a model from per-variable mechanisms; variables without a
    /// mechanism must be inputs.
    pub fn from_mechanisms(
        cards: &BTreeMap<String, usize>,
        mechanisms: Vec<Mechanism>,
        inputs: &[String],
        outputs: &[String],
    ) -> Result<Self> {
        let mut interp = Interpretation::new();
        let mut nodes = Vec::new();
        for m in mechanisms {
            for p in m.parents.iter().chain(std::iter::once(&m.target)) {
                if !cards.contains_key(p) {
                    return Err(Error::UnknownName(p.clone()));
                }
            }
            let dom = FinObject::new(m.parents.iter().map(|p| Atom::new(p.clone(), cards[p])).collect())?;
            let cod = FinObject::atom(m.target.clone(), cards[&m.target]);
            let kernel = Morphism::new(dom, cod, m.kernel.data().to_vec())?;
            if let Some(prev) = interp.boxes.get(&m.box_name) {
                if prev.data() != kernel.data() {
                    return Err(invalid(format!("box `{}` given two different kernels", m.box_name)));
                }
            }
            interp.insert(m.box_name.clone(), kernel);
            nodes.push(Node::mechanism(m.box_name, m.parents, m.target));
        }
        let diagram = NetworkDiagram {
            wires: cards.clone(),
            nodes,
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
            strict: true,
        };
        let mut model = CausalModel::new(diagram, interp)?;
        model.sort_nodes()?;
        Ok(model)
    }

    /// CBN from flat row-major CPTs: `(target, parents, cpt)`.
    pub fn cbn(cards: &BTreeMap<String, usize>, cpts: &[(&str, &[&str], &[f64])], outputs: &[&str]) -> Result<Self> {
        let mut mechs = Vec::new();
        for (t, ps, data) in cpts {
            let parents: Vec<String> = ps.iter().map(|s| s.to_string()).collect();
            let dom = FinObject::new(parents.iter().map(|p| Ok(Atom::new(p.clone(), *cards.get(p).ok_or_else(|| Error::UnknownName(p.clone()))?))).collect::<Result<_>>()?)?;
            let cod = FinObject::atom(*t, *cards.get(*t).ok_or_else(|| Error::UnknownName(t.to_string()))?);
            mechs.push(Mechanism::new(*t, parents, Morphism::new(dom, cod, data.to_vec())?));
        }
        let outs: Vec<String> = outputs.iter().map(|s| s.to_string()).collect();
        Self::from_mechanisms(cards, mechs, &[], &outs)
    }

    fn sort_nodes(&mut self) -> Result<()> {
        let order = self.diagram.topological_nodes()?;
        let nodes = std::mem::take(&mut self.diagram.nodes);
        self.diagram.nodes = order.into_iter().map(|i| nodes[i].clone()).collect();
        Ok(())
    }

    pub fn diagram(&self) -> &NetworkDiagram {
        &self.diagram
    }

    pub fn interpretation(&self) -> &Interpretation {
        &self.interp
    }

    pub fn variables(&self) -> Vec<String> {
        self.diagram.wires.keys().cloned().collect()
    }

    pub fn cards(&self) -> &BTreeMap<String, usize> {
        &self.diagram.wires
    }

    pub fn card(&self, v: &str) -> Result<usize> {
        self.diagram.card(v)
    }

    pub fn inputs(&self) -> &[String] {
        &self.diagram.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.diagram.outputs
    }

    pub fn is_closed(&self) -> bool {
        self.diagram.inputs.is_empty()
    }

    /// Variables with a mechanism, in diagram order.
    pub fn caused(&self) -> Vec<String> {
        self.diagram.nodes.iter().filter_map(|n| n.output.clone()).collect()
    }

    pub fn mechanism(&self, v: &str) -> Option<Mechanism> {
        let n = &self.diagram.nodes[self.diagram.producer(v)?];
        let b = n.kind.box_name()?.to_string();
        Some(Mechanism { kernel: self.interp.boxes[&b].clone(), box_name: b, target: v.to_string(), parents: n.inputs.clone() })
    }

    pub fn mechanisms(&self) -> Vec<Mechanism> {
        self.caused().iter().filter_map(|v| self.mechanism(v)).collect()
    }

    pub fn parents(&self, v: &str) -> Vec<String> {
        self.mechanism(v).map(|m| m.parents).unwrap_or_default()
    }

    /// Induced DAG over all variables.
    pub fn dag(&self) -> Dag {
        let mut edges = BTreeSet::new();
        for n in &self.diagram.nodes {
            for i in &n.inputs {
                edges.insert((i.clone(), n.output.clone().unwrap()));
            }
        }
        Dag::from_parts(self.variables(), edges).expect("model diagrams are acyclic")
    }

    /// Same model with mechanism `m` in place of the old one for `m.target`.
    pub fn with_mechanism(&self, m: Mechanism) -> Result<Self> {
        let mut mechs: Vec<Mechanism> = self.mechanisms().into_iter().filter(|x| x.target != m.target).collect();
        let inputs: Vec<String> = self.inputs().iter().filter(|i| **i != m.target).cloned().collect();
        mechs.push(m);
        Self::from_mechanisms(self.cards(), mechs, &inputs, self.outputs())
    }

    pub fn with_outputs(&self, outputs: &[String]) -> Result<Self> {
        for o in outputs {
            self.card(o)?;
        }
        let mut d = self.diagram.clone();
        d.outputs = outputs.to_vec();
        CausalModel::new(d, self.interp.clone())
    }

    /// Every variable as an output, in name order.
    pub fn maximal(&self) -> Self {
        self.with_outputs(&self.variables()).expect("variables are declared")
    }

    /// The channel from inputs to outputs.
    pub fn channel_of(&self) -> Result<Morphism> {
        self.diagram.evaluate(&self.interp)
    }

    pub fn output_state(&self) -> Result<Morphism> {
        if !self.is_closed() {
            return Err(invalid("output state of an open model; use channel_of"));
        }
        self.channel_of()
    }

    /// Joint over all variables (name order) as a channel from the inputs.
    pub fn joint(&self) -> Result<Morphism> {
        self.maximal().channel_of()
    }
}

fn check_disjoint(sets: &[&[String]], cod: &FinObject) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in sets {
        for v in *s {
            if !cod.contains(v) {
                return Err(Error::UnknownName(v.clone()));
            }
            if !seen.insert(v.clone()) {
                return Err(invalid(format!("`{}` appears in more than one set", v)));
            }
        }
    }
    Ok(())
}

/// `X ⊥ Y | Z` in the state `omega`: the conditional on `Z` of the
/// `(X, Y)` marginal factorises into the conditionals of `X` and of `Y`.
pub fn conditionally_independent(omega: &Morphism, x: &[String], y: &[String], z: &[String], tol: f64) -> Result<bool> {
    if !omega.is_state() {
        return Err(invalid("independence is tested on states"));
    }
    check_disjoint(&[x, y, z], omega.cod())?;
    let mut xyz: Vec<String> = x.to_vec();
    xyz.extend(y.iter().cloned());
    xyz.extend(z.iter().cloned());
    let m = omega.marginalize(&xyz)?.permute_cod(&xyz)?;
    let joint = m.conditional(z)?.permute_cod(&[x, y].concat())?;
    let cx = m.marginalize(&[x, z].concat())?.conditional(z)?.permute_cod(x)?;
    let cy = m.marginalize(&[y, z].concat())?.conditional(z)?.permute_cod(y)?;
    let (nz, nx, ny) = (joint.dom().size(), cx.cod().size(), cy.cod().size());
    for zi in 0..nz {
        for xi in 0..nx {
            for yi in 0..ny {
                let lhs = joint.get(zi, xi * ny + yi);
                let rhs = cx.get(zi, xi) * cy.get(zi, yi);
                if (lhs - rhs).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaithfulnessReport {
    pub variable: String,
    pub parents: Vec<String>,
    /// per parent: does it signal to the variable
    pub signalling: Vec<bool>,
    pub faithful: bool,
}

/// Whether the input atom at `pos` of `k` signals to the output: some
/// setting of the other inputs gives rows differing by more than `tol`.
pub fn signals(k: &Morphism, pos: usize, tol: f64) -> bool {
    let dom = k.dom();
    let card = dom.atoms()[pos].card;
    for d in 0..dom.size() {
        let t = dom.tuple_of(d);
        if t[pos] != 0 {
            continue;
        }
        let base = k.row(d);
        for v in 1..card {
            let mut u = t.clone();
            u[pos] = v;
            let other = k.row(dom.index_of(&u).unwrap());
            if base.iter().zip(other).any(|(a, b)| (a - b).abs() > tol) {
                return true;
            }
        }
    }
    false
}

pub fn mechanism_faithful(m: &CausalModel, tol: f64) -> Vec<FaithfulnessReport> {
    m.mechanisms()
        .into_iter()
        .map(|mech| {
            let signalling: Vec<bool> = (0..mech.parents.len()).map(|p| signals(&mech.kernel, p, tol)).collect();
            FaithfulnessReport {
                faithful: signalling.iter().all(|s| *s),
                variable: mech.target,
                parents: mech.parents,
                signalling,
            }
        })
        .collect()
}

/// Compares the maximal joint with the product of mechanisms, enumerated
/// tuple by tuple.
pub fn markov_check(m: &CausalModel, tol: f64) -> Result<bool> {
    markov_check_joint(m, &m.output_state_full()?, tol)
}

/// As [`markov_check`], against an externally supplied joint over all
/// variables in name order.
pub fn markov_check_joint(m: &CausalModel, joint: &Morphism, tol: f64) -> Result<bool> {
    if !m.is_closed() {
        return Err(invalid("Markov check needs a closed model"));
    }
    let vars = m.variables();
    let obj = FinObject::new(vars.iter().map(|v| Atom::new(v.clone(), m.cards()[v])).collect())?;
    if joint.cod().size() != obj.size() || !joint.is_state() {
        return Err(shape("joint does not range over all variables"));
    }
    let mechs = m.mechanisms();
    for idx in 0..obj.size() {
        let t = obj.tuple_of(idx);
        let val = |v: &str| t[vars.iter().position(|w| w == v).unwrap()];
        let mut p = 1.0;
        for mech in &mechs {
            let pa: Vec<usize> = mech.parents.iter().map(|q| val(q)).collect();
            p *= mech.kernel.at(&pa, &[val(&mech.target)])?;
        }
        if (joint.data()[idx] - p).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

impl CausalModel {
    fn output_state_full(&self) -> Result<Morphism> {
        self.maximal().output_state()
    }

    /// Vertices strictly downstream of `v` plus `v`.
    pub fn descendants(&self, v: &str) -> VSet {
        self.dag().descendants(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cards(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|(n, c)| (n.to_string(), *c)).collect()
    }

    #[test]
    fn chain_is_markov_and_ci() {
        let c = cards(&[("X", 2), ("Z", 2), ("Y", 2)]);
        let m = CausalModel::cbn(
            &c,
            &[("X", &[], &[0.3, 0.7]), ("Z", &["X"], &[0.9, 0.1, 0.2, 0.8]), ("Y", &["Z"], &[0.6, 0.4, 0.1, 0.9])],
            &["X", "Y", "Z"],
        )
        .unwrap();
        assert!(markov_check(&m, 1e-12).unwrap());
        let w = m.output_state().unwrap();
        let s = |v: &str| vec![v.to_string()];
        assert!(conditionally_independent(&w, &s("X"), &s("Y"), &s("Z"), 1e-9).unwrap());
        assert!(!conditionally_independent(&w, &s("X"), &s("Y"), &[], 1e-9).unwrap());
        let mut bumped = w.data().to_vec();
        bumped[0] += 0.05;
        let total: f64 = bumped.iter().sum();
        bumped.iter_mut().for_each(|x| *x /= total);
        let joint = Morphism::state(m.maximal().output_state().unwrap().cod().clone(), bumped).unwrap();
        assert!(!markov_check_joint(&m, &joint, 1e-9).unwrap());
    }

    #[test]
    fn faithfulness_flags_ignored_parent() {
        let c = cards(&[("A", 2), ("B", 2)]);
        let m = CausalModel::cbn(&c, &[("A", &[], &[0.5, 0.5]), ("B", &["A"], &[0.3, 0.7, 0.3, 0.7])], &["B"]).unwrap();
        let r = mechanism_faithful(&m, 1e-9);
        assert_eq!(r[1].signalling, vec![false]);
        assert!(!r[1].faithful);
        let id = CausalModel::cbn(&c, &[("A", &[], &[0.5, 0.5]), ("B", &["A"], &[1.0, 0.0, 0.0, 1.0])], &["B"]).unwrap();
        assert!(mechanism_faithful(&id, 1e-9).iter().all(|r| r.faithful));
    }

    #[test]
    fn copy_state_is_dependent() {
        let obj = FinObject::from_pairs(&[("X", 2), ("X'", 2)]).unwrap();
        let w = Morphism::state(obj, vec![0.4, 0.0, 0.0, 0.6]).unwrap();
        assert!(!conditionally_independent(&w, &["X".into()], &["X'".into()], &[], 1e-9).unwrap());
    }
}
