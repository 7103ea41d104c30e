//! Local rewrites on network diagrams. Each rule acts at an explicit site
//! and either returns the rewritten diagram or reports why it did not match.

use serde::{Deserialize, Serialize};

use super::{NetworkDiagram, Node, NodeKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteRule {
    /// A channel (or normalised state) whose output is discarded is itself discarded.
    DiscardFallthrough,
    /// Discarding one leg of a copy leaves the identity.
    DropDiscardedCopyLeg,
    /// Two copies of a deterministic box fed equal inputs are one box, copied.
    CopyThroughDeterministic,
    /// A sharp effect on a fanned-out wire feeds the sharp state to the other legs.
    SharpEffectSplit,
    /// A discarded sharp state is the scalar 1.
    CopyOutDiscard,
    /// A noise state read only by its mechanism is folded into it.
    AbsorbNoiseIntoChannel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Node(usize),
    Wire(String),
    Pair(usize, usize),
}

/// A box introduced by absorption: `mechanism` with the state `noise`
/// plugged into its input at `position`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedBox {
    pub name: String,
    pub mechanism: String,
    pub noise: String,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RewriteOutcome {
    Applied { diagram: NetworkDiagram, derived: Option<DerivedBox> },
    NoMatch(String),
}

impl RewriteOutcome {
    pub fn applied(&self) -> bool {
        matches!(self, RewriteOutcome::Applied { .. })
    }
}

fn no(msg: impl Into<String>) -> Result<RewriteOutcome> {
    Ok(RewriteOutcome::NoMatch(msg.into()))
}

fn done(diagram: NetworkDiagram) -> Result<RewriteOutcome> {
    Ok(RewriteOutcome::Applied { diagram, derived: None })
}

fn node(d: &NetworkDiagram, i: usize) -> Result<&Node> {
    d.nodes.get(i).ok_or_else(|| Error::Index(format!("node {} of {}", i, d.nodes.len())))
}

/// Two wires carry the same value: same label, or sharp states of one value.
pub(crate) fn equivalent_wires(d: &NetworkDiagram, a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    match (d.producer(a), d.producer(b)) {
        (Some(i), Some(j)) => match (&d.nodes[i].kind, &d.nodes[j].kind) {
            (NodeKind::SharpState(x), NodeKind::SharpState(y)) => x == y && d.wires.get(a) == d.wires.get(b),
            _ => false,
        },
        _ => false,
    }
}

/// Renames every consumption of `from` (node inputs and outputs) to `to`.
fn redirect(d: &mut NetworkDiagram, from: &str, to: &str) {
    for n in &mut d.nodes {
        for w in &mut n.inputs {
            if w == from {
                *w = to.to_string();
            }
        }
    }
    for o in &mut d.outputs {
        if o == from {
            *o = to.to_string();
        }
    }
}

fn remove_node(d: &mut NetworkDiagram, i: usize) {
    let n = d.nodes.remove(i);
    if let Some(o) = n.output {
        if !d.inputs.contains(&o) {
            d.wires.remove(&o);
        }
    }
}

/// Drops wire declarations no longer mentioned anywhere.
fn prune_wires(d: &mut NetworkDiagram) {
    let used: std::collections::BTreeSet<String> = d
        .nodes
        .iter()
        .flat_map(|n| n.inputs.iter().chain(n.output.iter()).cloned())
        .chain(d.inputs.iter().cloned())
        .chain(d.outputs.iter().cloned())
        .collect();
    d.wires.retain(|w, _| used.contains(w));
}

pub fn apply_rewrite(d: &NetworkDiagram, rule: RewriteRule, site: &Site) -> Result<RewriteOutcome> {
    match (rule, site) {
        (RewriteRule::DiscardFallthrough, Site::Node(i)) => {
            let n = node(d, *i)?;
            if !matches!(n.kind, NodeKind::Mechanism(_) | NodeKind::SharpState(_)) {
                return no("not a channel box");
            }
            let out = n.output.as_deref().unwrap_or_default();
            if !d.is_discarded(out) {
                return no(format!("output `{}` is used", out));
            }
            let mut e = d.clone();
            remove_node(&mut e, *i);
            done(e)
        }
        (RewriteRule::DropDiscardedCopyLeg, Site::Wire(w)) => {
            if !d.wires.contains_key(w) {
                return Err(Error::UnknownName(w.clone()));
            }
            no("copies are implicit fan-out; a discarded leg is never materialised")
        }
        (RewriteRule::CopyThroughDeterministic, Site::Pair(i, j)) => {
            if i == j {
                return no("same node");
            }
            let (a, b) = (node(d, *i)?, node(d, *j)?);
            let (NodeKind::Mechanism(x), NodeKind::Mechanism(y)) = (&a.kind, &b.kind) else {
                return no("both nodes must be mechanisms");
            };
            if x != y {
                return no(format!("different boxes `{}` and `{}`", x, y));
            }
            if a.inputs.len() != b.inputs.len() || !a.inputs.iter().zip(&b.inputs).all(|(p, q)| equivalent_wires(d, p, q)) {
                return no("inputs are not equal");
            }
            let keep = a.output.clone().unwrap();
            let gone = b.output.clone().unwrap();
            let mut e = d.clone();
            e.nodes.remove(*j);
            e.wires.remove(&gone);
            redirect(&mut e, &gone, &keep);
            prune_wires(&mut e);
            done(e)
        }
        (RewriteRule::SharpEffectSplit, Site::Node(i)) => {
            let n = node(d, *i)?;
            let NodeKind::SharpEffect(v) = n.kind else {
                return no("not a sharp effect");
            };
            let w = n.inputs[0].clone();
            let others: Vec<usize> = d.consumers(&w).into_iter().filter(|k| k != i).collect();
            if others.is_empty() && !d.is_output(&w) {
                return no(format!("wire `{}` does not fan out", w));
            }
            let mut e = d.clone();
            let fresh = e.fresh_label(&w);
            e.wires.insert(fresh.clone(), d.card(&w)?);
            for k in others {
                for x in &mut e.nodes[k].inputs {
                    if *x == w {
                        *x = fresh.clone();
                    }
                }
            }
            for o in &mut e.outputs {
                if *o == w {
                    *o = fresh.clone();
                }
            }
            e.nodes.insert(i + 1, Node::sharp_state(v, fresh));
            done(e)
        }
        (RewriteRule::CopyOutDiscard, Site::Node(i)) => {
            let n = node(d, *i)?;
            if !matches!(n.kind, NodeKind::SharpState(_)) {
                return no("not a sharp state");
            }
            let out = n.output.as_deref().unwrap_or_default();
            if !d.is_discarded(out) {
                return no(format!("output `{}` is used", out));
            }
            let mut e = d.clone();
            remove_node(&mut e, *i);
            done(e)
        }
        (RewriteRule::AbsorbNoiseIntoChannel, Site::Node(i)) => {
            let n = node(d, *i)?;
            let NodeKind::Mechanism(f) = &n.kind else {
                return no("not a mechanism");
            };
            for (pos, u) in n.inputs.iter().enumerate() {
                let Some(p) = d.producer(u) else { continue };
                let pn = &d.nodes[p];
                let NodeKind::Mechanism(lambda) = &pn.kind else { continue };
                if !pn.inputs.is_empty() || d.consumers(u) != vec![*i] || d.is_output(u) {
                    continue;
                }
                let name = match f.strip_prefix("f_") {
                    Some(rest) => format!("c_{}", rest),
                    None => format!("{}∘{}", f, lambda),
                };
                let derived = DerivedBox { name: name.clone(), mechanism: f.clone(), noise: lambda.clone(), position: pos };
                let mut e = d.clone();
                e.nodes[*i].kind = NodeKind::Mechanism(name);
                e.nodes[*i].inputs.remove(pos);
                remove_node(&mut e, p);
                return Ok(RewriteOutcome::Applied { diagram: e, derived: Some(derived) });
            }
            no("no directly attached private noise state")
        }
        (rule, site) => Err(Error::Invalid(format!("rule {:?} does not act on site {:?}", rule, site))),
    }
}

/// Applies the rules in order at every site until none matches. Returns the
/// final diagram and the boxes derived along the way.
pub fn rewrite_fixpoint(d: &NetworkDiagram, rules: &[RewriteRule]) -> Result<(NetworkDiagram, Vec<DerivedBox>)> {
    let mut cur = d.clone();
    let mut derived = Vec::new();
    'outer: loop {
        for &rule in rules {
            let sites: Vec<Site> = match rule {
                RewriteRule::CopyThroughDeterministic => (0..cur.nodes.len())
                    .flat_map(|i| (i + 1..cur.nodes.len()).map(move |j| Site::Pair(i, j)))
                    .collect(),
                RewriteRule::DropDiscardedCopyLeg => vec![],
                _ => (0..cur.nodes.len()).map(Site::Node).collect(),
            };
            for s in sites {
                if let RewriteOutcome::Applied { diagram, derived: dv } = apply_rewrite(&cur, rule, &s)? {
                    cur = diagram;
                    derived.extend(dv);
                    continue 'outer;
                }
            }
        }
        return Ok((cur, derived));
    }
}
