//! The simplification sweep over counterfactual diagrams.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagram::{apply_rewrite, rewrite_fixpoint, DerivedBox, Interpretation, NetworkDiagram, NodeKind, RewriteOutcome, RewriteRule, Site};
use crate::error::{invalid, Result};
use crate::intervention::base_variable;
use crate::model::{function_box, noise_box};
use crate::semantics::{FinObject, Morphism};

/// Output of [`simplify_cf`]: the rewritten diagram, the boxes created by
/// absorption and the output names of the input diagram (merging may
/// rename output wires).
#[derive(Clone, Debug, PartialEq)]
pub struct Simplified {
    pub diagram: NetworkDiagram,
    pub derived: Vec<DerivedBox>,
    pub original_outputs: Vec<String>,
}

/// Variable of a box named `f_X`, `lambda_X` or `c_X`.
pub(crate) fn box_variable(name: &str) -> Option<&str> {
    name.strip_prefix("f_").or_else(|| name.strip_prefix("lambda_")).or_else(|| name.strip_prefix("c_"))
}

impl Simplified {
    /// `base` extended by the derived boxes.
    pub fn interpretation(&self, base: &Interpretation) -> Result<Interpretation> {
        let mut i = base.clone();
        for d in &self.derived {
            i.register(d)?;
        }
        Ok(i)
    }

    /// Evaluates under `base`, atoms named like the input diagram's outputs.
    pub fn evaluate(&self, base: &Interpretation) -> Result<Morphism> {
        let m = self.diagram.evaluate(&self.interpretation(base)?)?;
        let cod = FinObject::new(
            self.original_outputs
                .iter()
                .zip(m.cod().atoms())
                .map(|(n, a)| crate::semantics::Atom::new(n.clone(), a.card))
                .collect(),
        )?;
        m.with_objects(m.dom().clone(), cod)
    }

    /// Variables whose noise state was not folded into their mechanism.
    pub fn unabsorbed(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for n in &self.diagram.nodes {
            if let NodeKind::Mechanism(b) = &n.kind {
                if b.starts_with("f_") || b.starts_with("lambda_") {
                    out.insert(box_variable(b).unwrap_or(b).to_string());
                }
            }
        }
        out.into_iter().collect()
    }

    /// Groups of nodes not connected to any output: floating scalars.
    pub fn scalar_gates(&self) -> Vec<Vec<usize>> {
        let d = &self.diagram;
        let n = d.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        let mut by_wire: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, node) in d.nodes.iter().enumerate() {
            for w in node.inputs.iter().chain(node.output.iter()) {
                by_wire.entry(w.as_str()).or_default().push(i);
            }
        }
        for group in by_wire.values() {
            for k in group.iter().skip(1) {
                let (a, b) = (find(&mut parent, group[0]), find(&mut parent, *k));
                parent[a] = b;
            }
        }
        let mut live = BTreeSet::new();
        for o in d.outputs.iter().chain(&d.inputs) {
            for i in by_wire.get(o.as_str()).into_iter().flatten() {
                live.insert(find(&mut parent, *i));
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            if !live.contains(&r) {
                groups.entry(r).or_default().push(i);
            }
        }
        groups.into_values().collect()
    }

    /// Value of each floating scalar under `base`.
    pub fn scalar_gate_values(&self, base: &Interpretation) -> Result<Vec<f64>> {
        let interp = self.interpretation(base)?;
        self.scalar_gates()
            .into_iter()
            .map(|g| {
                let nodes: Vec<_> = g.iter().map(|&i| self.diagram.nodes[i].clone()).collect();
                let used: BTreeSet<&String> = nodes.iter().flat_map(|n| n.inputs.iter().chain(n.output.iter())).collect();
                let wires = self.diagram.wires.iter().filter(|(w, _)| used.contains(w)).map(|(w, c)| (w.clone(), *c)).collect();
                let sub = NetworkDiagram { wires, nodes, inputs: vec![], outputs: vec![], strict: false };
                sub.evaluate(&interp)?.value()
            })
            .collect()
    }
}

fn check_order(d: &NetworkDiagram, variables: &[String], order: &[String]) -> Result<()> {
    let vs: BTreeSet<&String> = variables.iter().collect();
    let os: BTreeSet<&String> = order.iter().collect();
    if vs != os || order.len() != variables.len() {
        return Err(invalid("the order must list every variable exactly once"));
    }
    let rank = |v: &str| order.iter().position(|o| o == v);
    for n in &d.nodes {
        let Some(x) = n.kind.box_name().and_then(box_variable) else { continue };
        let Some(rx) = rank(x) else { continue };
        for w in &n.inputs {
            if let Some(ry) = rank(base_variable(w)) {
                if ry >= rx {
                    return Err(invalid(format!("order puts `{}` before its parent `{}`", x, base_variable(w))));
                }
            }
        }
    }
    Ok(())
}

fn node_box(d: &NetworkDiagram, i: usize) -> Option<&str> {
    d.nodes[i].kind.box_name()
}

/// Rewrites `d` in the fixed sweep: discards fall through; sharp effects are
/// split off fan-outs; then per variable in `order`, copies of its function
/// reading equal inputs are merged and effects on the merged wire split;
/// finally each noise state read by a single copy of its function is absorbed.
pub fn simplify_cf(d: &NetworkDiagram, variables: &[String], order: &[String]) -> Result<Simplified> {
    check_order(d, variables, order)?;
    let original_outputs = d.outputs.clone();
    let (mut cur, _) = rewrite_fixpoint(d, &[RewriteRule::DiscardFallthrough])?;
    cur = rewrite_fixpoint(&cur, &[RewriteRule::SharpEffectSplit])?.0;
    for l in order {
        let f = function_box(l);
        'merge: loop {
            let hits: Vec<usize> = (0..cur.nodes.len()).filter(|&i| node_box(&cur, i) == Some(f.as_str())).collect();
            for (a, &i) in hits.iter().enumerate() {
                for &j in &hits[a + 1..] {
                    if let RewriteOutcome::Applied { diagram, .. } = apply_rewrite(&cur, RewriteRule::CopyThroughDeterministic, &Site::Pair(i, j))? {
                        // the merged copy's sharp inputs are now unread
                        cur = rewrite_fixpoint(&diagram, &[RewriteRule::CopyOutDiscard])?.0;
                        continue 'merge;
                    }
                }
            }
            break;
        }
        'split: loop {
            for i in 0..cur.nodes.len() {
                if !matches!(cur.nodes[i].kind, NodeKind::SharpEffect(_)) {
                    continue;
                }
                let fed_by_f = cur.producer(&cur.nodes[i].inputs[0]).is_some_and(|p| node_box(&cur, p) == Some(f.as_str()));
                if fed_by_f {
                    if let RewriteOutcome::Applied { diagram, .. } = apply_rewrite(&cur, RewriteRule::SharpEffectSplit, &Site::Node(i))? {
                        cur = diagram;
                        continue 'split;
                    }
                }
            }
            break;
        }
    }
    let mut derived = Vec::new();
    'absorb: loop {
        for i in 0..cur.nodes.len() {
            let Some(x) = node_box(&cur, i).and_then(|b| b.strip_prefix("f_")).map(str::to_string) else { continue };
            if let RewriteOutcome::Applied { diagram, derived: Some(db) } = apply_rewrite(&cur, RewriteRule::AbsorbNoiseIntoChannel, &Site::Node(i))? {
                if db.noise == noise_box(&x) {
                    cur = diagram;
                    derived.push(db);
                    continue 'absorb;
                }
            }
        }
        break;
    }
    Ok(Simplified { diagram: cur, derived, original_outputs })
}
