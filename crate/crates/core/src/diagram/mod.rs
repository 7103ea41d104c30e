//! Network diagrams: single-output boxes wired by labels, with implicit
//! copy fan-out and implicit discarding of unconsumed wires.

mod dot;
mod rewrite;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::graph::{Dag, VSet};
use crate::semantics::{contract_named, Atom, FinObject, Morphism};

pub use rewrite::{apply_rewrite, rewrite_fixpoint, DerivedBox, RewriteOutcome, RewriteRule, Site};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Mechanism(String),
    SharpState(usize),
    SharpEffect(usize),
    GenericState(String),
    GenericEffect(String),
}

impl NodeKind {
    pub fn is_constant(&self) -> bool {
        !matches!(self, NodeKind::Mechanism(_))
    }

    pub fn box_name(&self) -> Option<&str> {
        match self {
            NodeKind::Mechanism(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub inputs: Vec<String>,
    pub output: Option<String>,
}

impl Node {
    pub fn mechanism(name: impl Into<String>, inputs: Vec<String>, output: impl Into<String>) -> Self {
        Node { kind: NodeKind::Mechanism(name.into()), inputs, output: Some(output.into()) }
    }

    pub fn sharp_state(value: usize, output: impl Into<String>) -> Self {
        Node { kind: NodeKind::SharpState(value), inputs: vec![], output: Some(output.into()) }
    }

    pub fn sharp_effect(value: usize, input: impl Into<String>) -> Self {
        Node { kind: NodeKind::SharpEffect(value), inputs: vec![input.into()], output: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDiagram {
    /// wire label → cardinality
    pub wires: BTreeMap<String, usize>,
    pub nodes: Vec<Node>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// pure network diagram: mechanisms only, no constants
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Box name → morphism.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    pub boxes: BTreeMap<String, Morphism>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, m: Morphism) {
        self.boxes.insert(name.into(), m);
    }

    pub fn get(&self, name: &str) -> Result<&Morphism> {
        self.boxes.get(name).ok_or_else(|| Error::MissingInterpretation(name.to_string()))
    }

    /// Interprets a box created by [`RewriteRule::AbsorbNoiseIntoChannel`].
    pub fn register(&mut self, d: &DerivedBox) -> Result<()> {
        if self.boxes.contains_key(&d.name) {
            return Ok(());
        }
        let f = self.get(&d.mechanism)?.clone();
        let lambda = self.get(&d.noise)?.clone();
        let absorbed = absorb(&f, &lambda, d.position)?;
        self.boxes.insert(d.name.clone(), absorbed);
        Ok(())
    }
}

/// `f` with the state `lambda` plugged into its domain atom at `position`.
pub fn absorb(f: &Morphism, lambda: &Morphism, position: usize) -> Result<Morphism> {
    let atoms = f.dom().atoms();
    if position >= atoms.len() || !lambda.is_state() || lambda.cod().size() != atoms[position].card {
        return Err(shape("noise state does not match the mechanism input"));
    }
    let names: Vec<String> = (0..atoms.len()).map(|k| format!("i{}", k)).collect();
    let kept: Vec<Atom> = atoms
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != position)
        .map(|(k, a)| Atom::new(names[k].clone(), a.card))
        .collect();
    let dom = FinObject::new(kept)?;
    let cod = FinObject::new(vec![Atom::new("out", f.cod().size())])?;
    let fm = f.with_objects(
        FinObject::new(atoms.iter().enumerate().map(|(k, a)| Atom::new(names[k].clone(), a.card)).collect())?,
        cod.clone(),
    )?;
    let lm = lambda.with_objects(FinObject::unit(), FinObject::atom(names[position].clone(), atoms[position].card))?;
    let parts = vec![(&fm, names.clone(), vec!["out".to_string()]), (&lm, vec![], vec![names[position].clone()])];
    let out = contract_named(&parts, &dom, &cod)?;
    let kept_dom = FinObject::new(atoms.iter().enumerate().filter(|(k, _)| *k != position).map(|(_, a)| a.clone()).collect())?;
    out.with_objects(kept_dom, f.cod().clone())
}

impl NetworkDiagram {
    pub fn card(&self, label: &str) -> Result<usize> {
        self.wires.get(label).copied().ok_or_else(|| Error::UnknownName(label.to_string()))
    }

    pub fn wire_object(&self, label: &str) -> Result<FinObject> {
        Ok(FinObject::atom(label, self.card(label)?))
    }

    /// Index of the node producing `label`, if a node does.
    pub fn producer(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.output.as_deref() == Some(label))
    }

    /// Indices of nodes reading `label`.
    pub fn consumers(&self, label: &str) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].inputs.iter().any(|w| w == label)).collect()
    }

    pub fn is_output(&self, label: &str) -> bool {
        self.outputs.iter().any(|o| o == label)
    }

    /// Consumed by no node and not an output.
    pub fn is_discarded(&self, label: &str) -> bool {
        self.consumers(label).is_empty() && !self.is_output(label)
    }

    /// A label of the form `base~k` not yet used.
    pub fn fresh_label(&self, base: &str) -> String {
        let stem = base.split('~').next().unwrap_or(base);
        let mut k = 1;
        loop {
            let cand = format!("{}~{}", stem, k);
            if !self.wires.contains_key(&cand) {
                return cand;
            }
            k += 1;
        }
    }

    pub fn validate(&self, strict: bool) -> ValidationReport {
        let mut v = Vec::new();
        let mut produced: BTreeMap<&str, usize> = BTreeMap::new();
        for i in &self.inputs {
            *produced.entry(i.as_str()).or_default() += 1;
        }
        for n in &self.nodes {
            if let Some(o) = &n.output {
                *produced.entry(o.as_str()).or_default() += 1;
            }
        }
        for (w, k) in &produced {
            if *k > 1 {
                v.push(format!("multiple producers for wire `{}`", w));
            }
        }
        let mut mentioned: BTreeSet<&str> = BTreeSet::new();
        for n in &self.nodes {
            mentioned.extend(n.inputs.iter().map(|s| s.as_str()));
            mentioned.extend(n.output.iter().map(|s| s.as_str()));
            let uniq: BTreeSet<&String> = n.inputs.iter().collect();
            if uniq.len() != n.inputs.len() {
                v.push(format!("node {:?} reads a wire more than once", n.kind));
            }
            match (&n.kind, n.inputs.is_empty(), n.output.is_some()) {
                (NodeKind::Mechanism(_), _, false) => v.push(format!("mechanism {:?} has no output wire", n.kind)),
                (NodeKind::SharpState(_) | NodeKind::GenericState(_), inputs_empty, has_out) if !inputs_empty || !has_out => {
                    v.push(format!("state {:?} must have no inputs and one output", n.kind))
                }
                (NodeKind::SharpEffect(_) | NodeKind::GenericEffect(_), _, true) => {
                    v.push(format!("effect {:?} must have no output", n.kind))
                }
                (NodeKind::SharpEffect(_), _, _) if n.inputs.len() != 1 => v.push("sharp effect must read one wire".into()),
                _ => {}
            }
            if strict && n.kind.is_constant() {
                v.push(format!("constant node {:?} in strict diagram", n.kind));
            }
            if let NodeKind::SharpState(x) | NodeKind::SharpEffect(x) = &n.kind {
                let w = n.output.as_ref().or(n.inputs.first());
                if let Some(w) = w {
                    if let Some(c) = self.wires.get(w) {
                        if x >= c {
                            v.push(format!("sharp value {} out of range for wire `{}`", x, w));
                        }
                    }
                }
            }
        }
        mentioned.extend(self.inputs.iter().map(|s| s.as_str()));
        mentioned.extend(self.outputs.iter().map(|s| s.as_str()));
        for w in &mentioned {
            if !self.wires.contains_key(*w) {
                v.push(format!("wire `{}` has no declared cardinality", w));
            }
            if !produced.contains_key(w) {
                v.push(format!("wire `{}` is never produced", w));
            }
        }
        // shared inputs may be exposed once per consumer model
        let mut seen_out: BTreeSet<&String> = BTreeSet::new();
        for o in &self.outputs {
            if !seen_out.insert(o) && strict && !self.inputs.contains(o) {
                v.push(format!("wire `{}` appears as an output more than once", o));
            }
        }
        if self.topological_nodes().is_err() {
            v.push("wiring is not acyclic".into());
        }
        ValidationReport { ok: v.is_empty(), violations: v }
    }

    /// Node indices in a dependency order; ties broken by output label
    /// (effects last, by their first input).
    pub fn topological_nodes(&self) -> Result<Vec<usize>> {
        let key = |i: usize| -> (u8, String) {
            let n = &self.nodes[i];
            match &n.output {
                Some(o) => (0, o.clone()),
                None => (1, n.inputs.first().cloned().unwrap_or_default()),
            }
        };
        let mut done: BTreeSet<usize> = BTreeSet::new();
        let mut available: BTreeSet<String> = self.inputs.iter().cloned().collect();
        let mut order = Vec::new();
        while order.len() < self.nodes.len() {
            let next = (0..self.nodes.len())
                .filter(|i| !done.contains(i) && self.nodes[*i].inputs.iter().all(|w| available.contains(w)))
                .min_by_key(|i| (key(*i), *i));
            let Some(i) = next else {
                return Err(Error::Cycle("diagram wiring".into()));
            };
            done.insert(i);
            order.push(i);
            if let Some(o) = &self.nodes[i].output {
                available.insert(o.clone());
            }
        }
        Ok(order)
    }

    /// Contracts the interpreted diagram to a morphism from `inputs` to
    /// `outputs`; atoms are named by wire labels (repeated outputs get primes).
    pub fn evaluate(&self, interp: &Interpretation) -> Result<Morphism> {
        let mut parts: Vec<(Morphism, Vec<String>, Vec<String>)> = Vec::new();
        for n in &self.nodes {
            let m = match &n.kind {
                NodeKind::Mechanism(b) | NodeKind::GenericState(b) | NodeKind::GenericEffect(b) => interp.get(b)?.clone(),
                NodeKind::SharpState(v) => Morphism::sharp_state(&self.wire_object(n.output.as_ref().unwrap())?, &[*v])?,
                NodeKind::SharpEffect(v) => Morphism::sharp_effect(&self.wire_object(&n.inputs[0])?, &[*v])?,
            };
            let in_cards: Vec<usize> = n.inputs.iter().map(|w| self.card(w)).collect::<Result<_>>()?;
            let out_cards: Vec<usize> = n.output.iter().map(|w| self.card(w)).collect::<Result<_>>()?;
            if m.dom().cards() != in_cards || m.cod().size() != out_cards.iter().product::<usize>() {
                return Err(shape(format!(
                    "{:?} interpreted as {} → {} but wired {:?} → {:?}",
                    n.kind,
                    m.dom(),
                    m.cod(),
                    n.inputs,
                    n.output
                )));
            }
            let dom = FinObject::new(n.inputs.iter().zip(&in_cards).map(|(w, c)| Atom::new(w.clone(), *c)).collect())?;
            let cod = FinObject::new(n.output.iter().zip(&out_cards).map(|(w, c)| Atom::new(w.clone(), *c)).collect())?;
            let m = Morphism::new(dom, cod, m.data().to_vec())?;
            let cod_labels: Vec<String> = n.output.iter().cloned().collect();
            parts.push((m, n.inputs.clone(), cod_labels));
        }
        let dom = FinObject::new(self.inputs.iter().map(|w| Ok(Atom::new(w.clone(), self.card(w)?))).collect::<Result<_>>()?)?;
        // repeated outputs become aliases tied by an identity
        let mut cod_atoms: Vec<Atom> = Vec::new();
        let mut aliases: Vec<(Morphism, Vec<String>, Vec<String>)> = Vec::new();
        for w in &self.outputs {
            let c = self.card(w)?;
            let mut name = w.clone();
            while cod_atoms.iter().any(|a| a.name == name) {
                name.push('\'');
            }
            if &name != w {
                aliases.push((Morphism::identity(&FinObject::atom("x", c)), vec![w.clone()], vec![name.clone()]));
            }
            cod_atoms.push(Atom::new(name, c));
        }
        let cod = FinObject::new(cod_atoms)?;
        parts.extend(aliases);
        let refs: Vec<(&Morphism, Vec<String>, Vec<String>)> = parts.iter().map(|(m, d, c)| (m, d.clone(), c.clone())).collect();
        contract_named(&refs, &dom, &cod)
    }

    /// Underlying open DAG: a vertex per wire, an edge from each node input
    /// to the node output. Strict diagrams only.
    pub fn to_open_dag(&self) -> Result<(Dag, Vec<String>, Vec<String>)> {
        let report = self.validate(true);
        if !report.ok {
            return Err(Error::Invalid(report.violations.join("; ")));
        }
        let mut edges = BTreeSet::new();
        for n in &self.nodes {
            for i in &n.inputs {
                edges.insert((i.clone(), n.output.clone().unwrap()));
            }
        }
        let mut vertices: Vec<String> = self.wires.keys().cloned().collect();
        vertices.sort();
        Ok((Dag::from_parts(vertices, edges)?, self.inputs.clone(), self.outputs.clone()))
    }

    pub fn to_dot(&self) -> String {
        dot::diagram_to_dot(self)
    }

    /// Box-name multiset summary (constants as `state:v` / `effect:v`).
    pub fn box_multiset(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for n in &self.nodes {
            let k = match &n.kind {
                NodeKind::Mechanism(b) => b.clone(),
                NodeKind::SharpState(v) => format!("state:{}", v),
                NodeKind::SharpEffect(v) => format!("effect:{}", v),
                NodeKind::GenericState(b) => format!("state:{}", b),
                NodeKind::GenericEffect(b) => format!("effect:{}", b),
            };
            *m.entry(k).or_insert(0) += 1;
        }
        m
    }
}

/// Name of the mechanism box for a vertex.
pub fn mechanism_box(v: &str) -> String {
    format!("c_{}", v)
}

/// One mechanism per non-input vertex reading its parents; wires are the
/// vertices. Cardinalities default to 2 when absent from `cards`.
pub fn diagram_from_dag(g: &Dag, inputs: &[String], outputs: &[String], cards: &BTreeMap<String, usize>) -> Result<NetworkDiagram> {
    for i in inputs {
        if !g.has_vertex(i) {
            return Err(Error::UnknownName(i.clone()));
        }
        if !g.parents(i).is_empty() {
            return Err(Error::Invalid(format!("input vertex `{}` has parents", i)));
        }
    }
    for o in outputs {
        if !g.has_vertex(o) {
            return Err(Error::UnknownName(o.clone()));
        }
    }
    let inset: VSet = inputs.iter().cloned().collect();
    let wires = g.vertices().iter().map(|v| (v.clone(), cards.get(v).copied().unwrap_or(2))).collect();
    let nodes = g
        .topological_order()?
        .into_iter()
        .filter(|v| !inset.contains(v))
        .map(|v| Node::mechanism(mechanism_box(&v), g.parents(&v), v))
        .collect();
    Ok(NetworkDiagram { wires, nodes, inputs: inputs.to_vec(), outputs: outputs.to_vec(), strict: true })
}

pub fn open_dag_from_diagram(d: &NetworkDiagram) -> Result<(Dag, Vec<String>, Vec<String>)> {
    d.to_open_dag()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoking() -> (NetworkDiagram, Interpretation) {
        let g = Dag::new(&["B", "S", "T", "L"], &[("B", "S"), ("B", "L"), ("S", "T"), ("T", "L")]).unwrap();
        let d = diagram_from_dag(&g, &[], &["S".into(), "T".into(), "L".into()], &BTreeMap::new()).unwrap();
        let o = |n: &str| FinObject::atom(n, 2);
        let mut i = Interpretation::new();
        i.insert("c_B", Morphism::state(o("B"), vec![0.3, 0.7]).unwrap());
        i.insert("c_S", Morphism::new(o("B"), o("S"), vec![0.9, 0.1, 0.4, 0.6]).unwrap());
        i.insert("c_T", Morphism::new(o("S"), o("T"), vec![0.8, 0.2, 0.1, 0.9]).unwrap());
        let bt = FinObject::from_pairs(&[("T", 2), ("B", 2)]).unwrap();
        i.insert("c_L", Morphism::new(bt, o("L"), vec![0.95, 0.05, 0.7, 0.3, 0.6, 0.4, 0.2, 0.8]).unwrap());
        (d, i)
    }

    #[test]
    fn smoking_diagram_validates_and_evaluates() {
        let (d, i) = smoking();
        assert!(d.validate(true).ok);
        // node for L reads parents in edge order: B then T
        let l = d.nodes.iter().find(|n| n.output.as_deref() == Some("L")).unwrap();
        assert_eq!(l.inputs, vec!["B".to_string(), "T".to_string()]);
        let w = d.evaluate(&i).unwrap();
        let p_b = [0.3, 0.7];
        let p_s = |b: usize, s: usize| [[0.9, 0.1], [0.4, 0.6]][b][s];
        let p_t = |s: usize, t: usize| [[0.8, 0.2], [0.1, 0.9]][s][t];
        let p_l = |b: usize, t: usize, l: usize| [[[0.95, 0.05], [0.7, 0.3]], [[0.6, 0.4], [0.2, 0.8]]][b][t][l];
        for s in 0..2 {
            for t in 0..2 {
                for l in 0..2 {
                    let want: f64 = (0..2).map(|b| p_b[b] * p_s(b, s) * p_t(s, t) * p_l(b, t, l)).sum();
                    assert!((w.at(&[], &[s, t, l]).unwrap() - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn validation_failures() {
        let mut d = NetworkDiagram { strict: true, ..Default::default() };
        d.wires.insert("X".into(), 2);
        d.wires.insert("Y".into(), 2);
        d.nodes.push(Node::mechanism("a", vec!["X".into()], "Y"));
        d.nodes.push(Node::mechanism("b", vec!["Y".into()], "X"));
        let r = d.validate(true);
        assert!(!r.ok && r.violations.iter().any(|v| v.contains("acyclic")));
        let mut e = NetworkDiagram { strict: true, ..Default::default() };
        e.wires.insert("X".into(), 2);
        e.nodes.push(Node::mechanism("a", vec![], "X"));
        e.nodes.push(Node::mechanism("b", vec![], "X"));
        assert!(e.validate(true).violations.iter().any(|v| v.contains("multiple producers")));
    }

    #[test]
    fn identity_wire_round_trip() {
        let mut d = NetworkDiagram { strict: true, ..Default::default() };
        d.wires.insert("X".into(), 2);
        d.inputs.push("X".into());
        d.outputs.push("X".into());
        let (g, i, o) = d.to_open_dag().unwrap();
        assert_eq!(g.vertices(), &["X".to_string()]);
        assert!(g.edges().is_empty());
        assert_eq!((i, o), (vec!["X".to_string()], vec!["X".to_string()]));
        let m = d.evaluate(&Interpretation::new()).unwrap();
        assert!(m.approx_eq(&Morphism::identity(&FinObject::atom("X", 2)), 0.0));
    }
}
