//! Identification of counterfactuals from interventional data: simplify the
//! counterfactual diagram of some model on the rootified graph, then read
//! each latent-glued fragment as a do-table.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplify::box_variable;
use super::{counterfactual_diagram, simplify_cf, CounterfactualTerms};
use crate::diagram::{NetworkDiagram, NodeKind};
use crate::error::{invalid, Error, Result};
use crate::graph::{rootify, Admg, Rootification};
use crate::identify::{IdentifyingExpression as E, PStarTables};
use crate::intervention::base_variable;
use crate::random::random_fcm;
use crate::semantics::{FinObject, Morphism};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundaryWire {
    pub var: String,
    pub wire: String,
}

/// Mechanisms of observed variables glued together by shared latent roots,
/// with the boundary split by whether a wire carries a sharp constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RFragment {
    pub nodes: Vec<usize>,
    pub observed: Vec<String>,
    pub roots: Vec<String>,
    /// inputs fed a sharp state
    pub sharp_inputs: Vec<BoundaryWire>,
    /// remaining inputs
    pub free_inputs: Vec<BoundaryWire>,
    /// outputs ending in a sharp effect
    pub effect_outputs: Vec<BoundaryWire>,
    /// remaining outputs leaving the fragment
    pub free_outputs: Vec<BoundaryWire>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    /// some noise state is still shared between worlds
    UnabsorbedNoise,
    /// a fragment sees one variable at disagreeing values
    FragmentValueConflict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CfIdentification {
    Identified { expression: E, diagram: NetworkDiagram, fragments: Vec<RFragment> },
    /// not identified by the implemented criteria
    Fail { reason: FailReason, detail: String },
}

impl CfIdentification {
    pub fn expression(&self) -> Option<&E> {
        match self {
            CfIdentification::Identified { expression, .. } => Some(expression),
            CfIdentification::Fail { .. } => None,
        }
    }

    pub fn fail_reason(&self) -> Option<FailReason> {
        match self {
            CfIdentification::Fail { reason, .. } => Some(*reason),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfIdOptions {
    pub rootification: Rootification,
    /// seeds the model whose diagram is simplified
    pub seed: u64,
}

impl Default for CfIdOptions {
    fn default() -> Self {
        CfIdOptions { rootification: Rootification::RhoTilde, seed: 0 }
    }
}

fn mechanism_var(d: &NetworkDiagram, i: usize) -> Option<&str> {
    d.nodes[i].kind.box_name().and_then(box_variable)
}

fn effect_on(d: &NetworkDiagram, wire: &str) -> Option<usize> {
    d.consumers(wire).into_iter().find_map(|k| match d.nodes[k].kind {
        NodeKind::SharpEffect(v) => Some(v),
        _ => None,
    })
}

fn sharp_value(d: &NetworkDiagram, wire: &str) -> Option<usize> {
    d.producer(wire).and_then(|p| match d.nodes[p].kind {
        NodeKind::SharpState(v) => Some(v),
        _ => None,
    })
}

fn fragment_groups(d: &NetworkDiagram, observed: &BTreeSet<String>, roots: &BTreeSet<String>) -> Result<Vec<Vec<usize>>> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mechs: Vec<usize> = (0..d.nodes.len()).filter(|&i| matches!(d.nodes[i].kind, NodeKind::Mechanism(_))).collect();
    for &i in &mechs {
        let name = d.nodes[i].kind.box_name().unwrap_or_default();
        let v = match name.strip_prefix("c_") {
            Some(v) if observed.contains(v) || roots.contains(v) => v,
            _ => return Err(invalid(format!("box `{}` is not a mechanism of the rootified graph", name))),
        };
        if let Some(prev) = seen.insert(v.to_string(), i) {
            return Err(invalid(format!("mechanism of `{}` appears at nodes {} and {}", v, prev, i)));
        }
    }
    // union observed mechanisms through the roots they read
    let mut parent: BTreeMap<usize, usize> = mechs.iter().map(|&i| (i, i)).collect();
    fn find(p: &mut BTreeMap<usize, usize>, i: usize) -> usize {
        let mut r = i;
        while p[&r] != r {
            r = p[&r];
        }
        p.insert(i, r);
        r
    }
    for &i in &mechs {
        if roots.contains(mechanism_var(d, i).unwrap()) {
            let out = d.nodes[i].output.clone().unwrap();
            for k in d.consumers(&out) {
                if parent.contains_key(&k) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, k));
                    parent.insert(a, b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &mechs {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    Ok(out)
}

fn describe(d: &NetworkDiagram, nodes: &[usize], observed: &BTreeSet<String>, roots: &BTreeSet<String>) -> RFragment {
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut f = RFragment {
        nodes: nodes.to_vec(),
        observed: vec![],
        roots: vec![],
        sharp_inputs: vec![],
        free_inputs: vec![],
        effect_outputs: vec![],
        free_outputs: vec![],
    };
    let mut ins: BTreeSet<BoundaryWire> = BTreeSet::new();
    for &i in nodes {
        let v = mechanism_var(d, i).unwrap().to_string();
        if roots.contains(&v) {
            f.roots.push(v);
            continue;
        }
        f.observed.push(v.clone());
        for w in &d.nodes[i].inputs {
            if d.producer(w).is_some_and(|p| !inside.contains(&p)) && observed.contains(base_variable(w)) {
                ins.insert(BoundaryWire { var: base_variable(w).to_string(), wire: w.clone() });
            }
        }
        let out = d.nodes[i].output.clone().unwrap();
        let bw = BoundaryWire { var: v, wire: out.clone() };
        if effect_on(d, &out).is_some() {
            f.effect_outputs.push(bw);
        } else if d.is_output(&out) || d.consumers(&out).iter().any(|k| !inside.contains(k)) {
            f.free_outputs.push(bw);
        }
    }
    for bw in ins {
        if sharp_value(d, &bw.wire).is_some() {
            f.sharp_inputs.push(bw);
        } else {
            f.free_inputs.push(bw);
        }
    }
    f.observed.sort();
    f.roots.sort();
    f
}

/// Maximal fragments of `d` whose observed mechanisms are connected through
/// the mechanisms of latent roots. Every mechanism node lies in exactly one.
pub fn r_fragments(d: &NetworkDiagram, admg: &Admg, roots: &[String]) -> Result<Vec<RFragment>> {
    let observed: BTreeSet<String> = admg.vertices().iter().cloned().collect();
    let roots: BTreeSet<String> = roots.iter().cloned().collect();
    Ok(fragment_groups(d, &observed, &roots)?.iter().map(|g| describe(d, g, &observed, &roots)).collect())
}

/// Redirects the reads of `from` by nodes in `nodes` to `to`.
fn reroute(d: &mut NetworkDiagram, nodes: &[usize], from: &str, to: &str) {
    for &k in nodes {
        for w in &mut d.nodes[k].inputs {
            if w == from {
                *w = to.to_string();
            }
        }
    }
}

/// Value-agreement checks on one fragment, merging agreeing wires.
/// `Err(detail)` on a conflict.
fn align(d: &mut NetworkDiagram, nodes: &[usize], observed: &BTreeSet<String>) -> std::result::Result<(), String> {
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let own: BTreeMap<String, String> = nodes
        .iter()
        .filter_map(|&i| {
            let v = mechanism_var(d, i)?;
            observed.contains(v).then(|| (v.to_string(), d.nodes[i].output.clone().unwrap()))
        })
        .collect();
    let mut reads: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for &i in nodes {
        for w in &d.nodes[i].inputs {
            let v = base_variable(w);
            if observed.contains(v) && d.producer(w).is_some_and(|p| !inside.contains(&p)) {
                reads.entry(v.to_string()).or_default().insert(w.clone());
            }
        }
    }
    for (x, wires) in reads {
        let wires: Vec<String> = wires.into_iter().collect();
        if let Some(w) = own.get(&x) {
            let Some(val) = effect_on(d, w) else {
                return Err(format!("`{}` is produced in the fragment and also read from outside it", x));
            };
            if wires.iter().any(|u| sharp_value(d, u) != Some(val)) {
                return Err(format!("`{}` is observed as {} but other values reach its fragment", x, val));
            }
            for u in &wires {
                reroute(d, nodes, u, w);
            }
        } else if wires.len() > 1 {
            let vals: BTreeSet<Option<usize>> = wires.iter().map(|u| sharp_value(d, u)).collect();
            match vals.into_iter().collect::<Vec<_>>().as_slice() {
                [Some(_)] => {
                    for u in &wires[1..] {
                        reroute(d, nodes, u, &wires[0]);
                    }
                }
                _ => return Err(format!("`{}` enters one fragment with disagreeing values", x)),
            }
        }
    }
    Ok(())
}

/// [`id_cf_with_cards`] with the cardinalities of the data roster.
pub fn id_cf(admg: &Admg, terms: &CounterfactualTerms, data: &PStarTables, opts: &CfIdOptions) -> Result<CfIdentification> {
    if data.roster() != {
        let mut v = admg.vertices().to_vec();
        v.sort();
        v
    } {
        return Err(invalid("data roster differs from the graph's vertices"));
    }
    id_cf_with_cards(admg, terms, &data.cards, opts)
}

/// Decides identification of `terms` from do-tables over the vertices of
/// `admg`; on success the expression reads only those tables.
pub fn id_cf_with_cards(admg: &Admg, terms: &CounterfactualTerms, cards: &BTreeMap<String, usize>, opts: &CfIdOptions) -> Result<CfIdentification> {
    for v in admg.vertices() {
        if v.contains(['#', '~']) {
            return Err(invalid(format!("variable name `{}` uses a reserved character", v)));
        }
        if !cards.contains_key(v) {
            return Err(Error::UnknownName(v.clone()));
        }
    }
    let observed: BTreeSet<String> = admg.vertices().iter().cloned().collect();
    let ocards: BTreeMap<String, usize> = cards.iter().filter(|(k, _)| observed.contains(*k)).map(|(k, v)| (k.clone(), *v)).collect();
    terms.check(&ocards)?;
    // any model on the rootified graph gives the same diagram shape
    let r = rootify(admg, opts.rootification)?;
    let mut all = ocards.clone();
    for root in &r.roots {
        all.insert(root.clone(), 2);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let fcm = random_fcm(&r.dag, &all, 2, &mut rng)?;
    let (d, _) = counterfactual_diagram(&fcm, terms)?;
    let order = r.dag.topological_order()?;
    let s = simplify_cf(&d, &order, &order)?;
    let unabsorbed = s.unabsorbed();
    if !unabsorbed.is_empty() {
        return Ok(CfIdentification::Fail {
            reason: FailReason::UnabsorbedNoise,
            detail: format!("noise of {} is shared between worlds", unabsorbed.join(", ")),
        });
    }
    let roots: BTreeSet<String> = r.roots.iter().cloned().collect();
    let mut d = s.diagram;
    let groups = fragment_groups(&d, &observed, &roots)?;
    for g in &groups {
        if let Err(detail) = align(&mut d, g, &observed) {
            return Ok(CfIdentification::Fail { reason: FailReason::FragmentValueConflict, detail });
        }
    }
    let fragments: Vec<RFragment> = groups.iter().map(|g| describe(&d, g, &observed, &roots)).collect();
    let expression = assemble(&d, &fragments, &s.original_outputs)?;
    Ok(CfIdentification::Identified { expression, diagram: d, fragments })
}

/// The aligned diagram with every fragment replaced by its do-table.
fn assemble(d: &NetworkDiagram, fragments: &[RFragment], names: &[String]) -> Result<E> {
    let mut parts = Vec::new();
    for (i, n) in d.nodes.iter().enumerate() {
        match n.kind {
            NodeKind::SharpState(v) => {
                let w = n.output.clone().unwrap();
                if !d.is_discarded(&w) {
                    parts.push(E::SharpState { atom: w.clone(), card: d.card(&w)?, value: v });
                }
            }
            NodeKind::SharpEffect(v) => {
                let w = &n.inputs[0];
                let k = Morphism::sharp_effect(&FinObject::atom(w.clone(), d.card(w)?), &[v])?;
                parts.push(E::Kernel { name: format!("[{}={}]", w, v), kernel: k });
            }
            NodeKind::Mechanism(_) => {}
            _ => return Err(invalid(format!("node {} is not a sharp constant or mechanism", i))),
        }
    }
    for f in fragments {
        let outs: Vec<&BoundaryWire> = f.effect_outputs.iter().chain(&f.free_outputs).collect();
        if outs.is_empty() {
            continue;
        }
        let ins: Vec<&BoundaryWire> = f.sharp_inputs.iter().chain(&f.free_inputs).collect();
        let mut do_set: Vec<String> = ins.iter().map(|b| b.var.clone()).collect();
        do_set.sort();
        let mut outputs: Vec<String> = outs.iter().map(|b| b.var.clone()).collect();
        outputs.sort();
        let rename = ins.iter().chain(&outs).map(|b| (b.var.clone(), b.wire.clone())).collect();
        parts.push(E::Data { do_set, outputs, rename });
    }
    let mut keep: Vec<String> = Vec::new();
    for o in &d.outputs {
        if !keep.contains(o) {
            keep.push(o.clone());
        }
    }
    let mut e = E::Contract { parts, keep: keep.clone() };
    // repeated outputs become copies
    let mut final_labels = Vec::new();
    let mut taken: BTreeSet<String> = keep.iter().cloned().collect();
    for o in &d.outputs {
        if final_labels.contains(o) {
            let mut alias = format!("{}'", o);
            while taken.contains(&alias) {
                alias.push('\'');
            }
            taken.insert(alias.clone());
            e = E::CopyFanout { inner: Box::new(e), atom: o.clone(), alias: alias.clone() };
            final_labels.push(alias);
        } else {
            final_labels.push(o.clone());
        }
    }
    let map: BTreeMap<String, String> =
        final_labels.iter().zip(names).filter(|(a, b)| a != b).map(|(a, b)| (a.clone(), b.clone())).collect();
    Ok(e.marginal(&final_labels).relabel(map).normalize())
}

#[cfg(test)]
mod tests {
    use super::super::WorldTerm;
    use super::*;

    fn binary(vs: &[&str]) -> BTreeMap<String, usize> {
        vs.iter().map(|v| (v.to_string(), 2)).collect()
    }

    #[test]
    fn aspirin_fails_only_for_distinct_values() {
        let g = Admg::new(&["X", "Y"], &[("X", "Y")], &[]).unwrap();
        let q = |xt: usize| {
            CounterfactualTerms::new(vec![WorldTerm::new(&[], &[("X", 0), ("Y", 1)], &[]), WorldTerm::new(&[("X", xt)], &[], &["Y"])])
        };
        let c = binary(&["X", "Y"]);
        let r = id_cf_with_cards(&g, &q(1), &c, &CfIdOptions::default()).unwrap();
        assert_eq!(r.fail_reason(), Some(FailReason::UnabsorbedNoise));
        let r = id_cf_with_cards(&g, &q(0), &c, &CfIdOptions::default()).unwrap();
        assert!(r.expression().is_some());
    }

    #[test]
    fn no_latents_one_fragment_per_mechanism() {
        let g = Admg::new(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[]).unwrap();
        let t = CounterfactualTerms::new(vec![WorldTerm::new(&[], &[], &["A", "B", "C"])]);
        let CfIdentification::Identified { fragments, .. } = id_cf_with_cards(&g, &t, &binary(&["A", "B", "C"]), &CfIdOptions::default()).unwrap()
        else {
            panic!()
        };
        assert_eq!(fragments.len(), 3);
        assert!(fragments.iter().all(|f| f.nodes.len() == 1));
    }
}
