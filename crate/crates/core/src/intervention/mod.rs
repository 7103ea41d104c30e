//! Interventions and transformations of (open) causal models.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagram::{Interpretation, NetworkDiagram, Node};
use crate::error::{invalid, shape, Error, Result};
use crate::model::{CausalModel, Mechanism};
use crate::semantics::{Atom, FinObject, Morphism, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Intervention {
    Do { var: String, value: usize },
    Break { var: String, state: Morphism },
    Cut { var: String },
    Local { var: String, eta: Morphism },
    /// `eta : A ⊗ X → X`
    WideLocal { var: String, context: Vec<String>, eta: Morphism },
    Trim { var: String },
    Pad { var: String, extra: Vec<String> },
    /// `X_i` gets mechanism `maps[X_i] ∘ c_{phi(X_i)}` and the parents of `phi(X_i)`.
    Rewire { phi: BTreeMap<String, String>, maps: BTreeMap<String, Morphism> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Internalise,
    Externalise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionMode {
    Sequential,
    Parallel,
}

/// Box name of a do-intervention; equal values share a box.
pub fn do_box(var: &str, value: usize) -> String {
    format!("{}:={}", var, value)
}

fn mechanism_of(m: &CausalModel, var: &str) -> Result<Mechanism> {
    m.mechanism(var).ok_or_else(|| invalid(format!("`{}` has no mechanism (input or unknown)", var)))
}

fn require_channel(eta: &Morphism, what: &str) -> Result<()> {
    if !eta.classify(DEFAULT_TOL).is_channel {
        return Err(invalid(format!("{} is not a channel", what)));
    }
    Ok(())
}

/// Smallest parent subset the kernel depends on: the unique `T` with
/// `k = k_T ⊗ discard`, found by searching subsets in order of size.
pub fn faithful_factor(k: &Morphism, tol: f64) -> Result<(Vec<usize>, Morphism)> {
    let dom = k.dom();
    let n = dom.atoms().len();
    if n > 16 {
        return Err(Error::Budget("trimming searches at most 16 parents".into()));
    }
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let depends_only = (0..dom.size()).all(|d| {
            let mut t = dom.tuple_of(d);
            for i in 0..n {
                if mask & (1 << i) == 0 {
                    t[i] = 0;
                }
            }
            let rep = dom.index_of(&t).unwrap();
            k.row(d).iter().zip(k.row(rep)).all(|(a, b)| (a - b).abs() <= tol)
        });
        if depends_only {
            let sub = FinObject::new(keep.iter().map(|&i| dom.atoms()[i].clone()).collect())?;
            let f = Morphism::from_fn(sub, k.cod().clone(), |d, c| {
                let mut t = vec![0; n];
                for (j, &i) in keep.iter().enumerate() {
                    t[i] = d[j];
                }
                k.row(dom.index_of(&t).unwrap())[c[0]]
            })?;
            return Ok((keep, f));
        }
    }
    unreachable!("the full parent set always qualifies")
}

pub fn apply(m: &CausalModel, sigma: &Intervention) -> Result<CausalModel> {
    match sigma {
        Intervention::Do { var, value } => {
            let card = m.card(var)?;
            let k = Morphism::sharp_state(&FinObject::atom(var.clone(), card), &[*value])?;
            replace(m, Mechanism::new(var.clone(), vec![], k).named(do_box(var, *value)))
        }
        Intervention::Break { var, state } => {
            let card = m.card(var)?;
            if !state.is_state() || state.cod().size() != card || !state.classify(DEFAULT_TOL).is_normalised_state {
                return Err(invalid(format!("breaking state for `{}` must be a normalised state of size {}", var, card)));
            }
            replace(m, Mechanism::new(var.clone(), vec![], state.clone()).named(format!("break_{}", var)))
        }
        Intervention::Cut { var } => {
            let card = m.card(var)?;
            let u = Morphism::uniform(&FinObject::atom(var.clone(), card));
            replace(m, Mechanism::new(var.clone(), vec![], u).named(format!("cut_{}", var)))
        }
        Intervention::Local { var, eta } => {
            require_channel(eta, "local intervention map")?;
            let mech = mechanism_of(m, var)?;
            if eta.dom().size() != mech.kernel.cod().size() || eta.cod().size() != mech.kernel.cod().size() {
                return Err(shape(format!("local map for `{}` must be an endomap of its values", var)));
            }
            let eta = eta.with_objects(mech.kernel.cod().clone(), mech.kernel.cod().clone())?;
            let k = mech.kernel.then(&eta)?;
            replace(m, Mechanism::new(var.clone(), mech.parents, k).named(format!("local_{}", var)))
        }
        Intervention::WideLocal { var, context, eta } => {
            require_channel(eta, "wide local map")?;
            let mech = mechanism_of(m, var)?;
            let desc = m.descendants(var);
            if let Some(a) = context.iter().find(|a| desc.contains(*a)) {
                return Err(Error::Cycle(format!("context variable `{}` is downstream of `{}`", a, var)));
            }
            let mut atoms: Vec<Atom> = context.iter().map(|a| Ok(Atom::new(a.clone(), m.card(a)?))).collect::<Result<_>>()?;
            atoms.push(Atom::new(var.clone(), m.card(var)?));
            let eta = eta.with_objects(FinObject::new(atoms)?, mech.kernel.cod().clone())?;
            let mut parents = mech.parents.clone();
            for a in context {
                if !parents.contains(a) {
                    parents.push(a.clone());
                }
            }
            let dom = FinObject::new(parents.iter().map(|p| Ok(Atom::new(p.clone(), m.card(p)?))).collect::<Result<_>>()?)?;
            let card = m.card(var)?;
            let k = Morphism::from_fn(dom, mech.kernel.cod().clone(), |d, c| {
                let val = |name: &str| d[parents.iter().position(|p| p == name).unwrap()];
                let pa: Vec<usize> = mech.parents.iter().map(|p| val(p)).collect();
                let mut ctx: Vec<usize> = context.iter().map(|a| val(a)).collect();
                ctx.push(0);
                let n = ctx.len();
                (0..card)
                    .map(|x| {
                        ctx[n - 1] = x;
                        mech.kernel.at(&pa, &[x]).unwrap() * eta.at(&ctx, c).unwrap()
                    })
                    .sum()
            })?;
            replace(m, Mechanism::new(var.clone(), parents, k).named(format!("wide_local_{}", var)))
        }
        Intervention::Trim { var } => {
            let mech = mechanism_of(m, var)?;
            let (keep, k) = faithful_factor(&mech.kernel, DEFAULT_TOL)?;
            if keep.len() == mech.parents.len() {
                return Ok(m.clone());
            }
            let parents = keep.iter().map(|&i| mech.parents[i].clone()).collect();
            replace(m, Mechanism::new(var.clone(), parents, k).named(format!("trim_{}", var)))
        }
        Intervention::Pad { var, extra } => {
            let mech = mechanism_of(m, var)?;
            let desc = m.descendants(var);
            if let Some(a) = extra.iter().find(|a| desc.contains(*a)) {
                return Err(Error::Cycle(format!("padding `{}` with downstream `{}`", var, a)));
            }
            let mut parents = mech.parents.clone();
            let mut pad_obj = FinObject::unit();
            for a in extra {
                if !parents.contains(a) {
                    parents.push(a.clone());
                    pad_obj = pad_obj.tensor(&FinObject::atom(a.clone(), m.card(a)?));
                }
            }
            let k = mech.kernel.tensor(&Morphism::discard(&pad_obj));
            replace(m, Mechanism::new(var.clone(), parents, k).named(format!("pad_{}", var)))
        }
        Intervention::Rewire { phi, maps } => {
            let keys: BTreeSet<&String> = phi.keys().collect();
            let vals: BTreeSet<&String> = phi.values().collect();
            if keys != vals {
                return Err(invalid("rewiring map is not a permutation"));
            }
            let mut out = m.clone();
            let originals: BTreeMap<String, Mechanism> =
                phi.keys().map(|v| Ok((v.clone(), mechanism_of(m, v)?))).collect::<Result<_>>()?;
            for (xi, xj) in phi {
                let src = &originals[xj];
                let f = maps.get(xi).ok_or_else(|| invalid(format!("no rewiring map for `{}`", xi)))?;
                require_channel(f, "rewiring map")?;
                let f = f.with_objects(src.kernel.cod().clone(), FinObject::atom(xi.clone(), m.card(xi)?))?;
                let k = src.kernel.then(&f)?;
                let mech = Mechanism::new(xi.clone(), src.parents.clone(), k).named(format!("rewire_{}", xi));
                out = out.with_mechanism(mech).map_err(|e| match e {
                    Error::Invalid(msg) if msg.contains("acyclic") => Error::Cycle(format!("rewiring: {}", msg)),
                    e => e,
                })?;
            }
            Ok(out)
        }
    }
}

fn replace(m: &CausalModel, mech: Mechanism) -> Result<CausalModel> {
    m.with_mechanism(mech).map_err(|e| match e {
        Error::Invalid(msg) if msg.contains("acyclic") => Error::Cycle(msg),
        e => e,
    })
}

/// Removes the mechanisms of `s` and makes them inputs.
pub fn open_at(m: &CausalModel, s: &[String]) -> Result<CausalModel> {
    for v in s {
        m.card(v)?;
    }
    let mechs: Vec<Mechanism> = m.mechanisms().into_iter().filter(|x| !s.contains(&x.target)).collect();
    let mut inputs = m.inputs().to_vec();
    for v in s {
        if !inputs.contains(v) {
            inputs.push(v.clone());
        }
    }
    CausalModel::from_mechanisms(m.cards(), mechs, &inputs, m.outputs())
}

pub fn boundary(m: &CausalModel, a: &[String], direction: Boundary) -> Result<CausalModel> {
    match direction {
        Boundary::Internalise => {
            let outs: Vec<String> = m.outputs().iter().filter(|o| !a.contains(o)).cloned().collect();
            m.with_outputs(&outs)
        }
        Boundary::Externalise => {
            let mut outs = m.outputs().to_vec();
            for v in m.variables() {
                if a.contains(&v) && !outs.contains(&v) {
                    outs.push(v);
                }
            }
            for v in a {
                m.card(v)?;
            }
            m.with_outputs(&outs)
        }
    }
}

fn merge_interp(into: &mut Interpretation, from: &Interpretation) -> Result<()> {
    for (k, v) in &from.boxes {
        match into.boxes.get(k) {
            Some(prev) if prev != v => return Err(invalid(format!("box `{}` has two interpretations", k))),
            _ => {
                into.boxes.insert(k.clone(), v.clone());
            }
        }
    }
    Ok(())
}

/// Sequential: `n` after `m`, with `m`'s outputs feeding `n`'s inputs by
/// name. Parallel: side by side over disjoint variables.
pub fn compose_models(m: &CausalModel, n: &CausalModel, mode: CompositionMode) -> Result<CausalModel> {
    let (md, nd) = (m.diagram(), n.diagram());
    let mut wires = md.wires.clone();
    let mut interp = m.interpretation().clone();
    merge_interp(&mut interp, n.interpretation())?;
    let (inputs, outputs, shared): (Vec<String>, Vec<String>, BTreeSet<String>) = match mode {
        CompositionMode::Sequential => {
            if m.outputs() != n.inputs() {
                return Err(shape(format!("outputs {:?} do not match inputs {:?}", m.outputs(), n.inputs())));
            }
            (m.inputs().to_vec(), n.outputs().to_vec(), m.outputs().iter().cloned().collect())
        }
        CompositionMode::Parallel => (
            [m.inputs(), n.inputs()].concat(),
            [m.outputs(), n.outputs()].concat(),
            BTreeSet::new(),
        ),
    };
    for (w, c) in &nd.wires {
        match wires.get(w) {
            Some(prev) if shared.contains(w) && prev == c => {}
            Some(_) => return Err(invalid(format!("variable `{}` occurs in both models", w))),
            None => {
                wires.insert(w.clone(), *c);
            }
        }
    }
    let nodes: Vec<Node> = md.nodes.iter().chain(&nd.nodes).cloned().collect();
    let d = NetworkDiagram { wires, nodes, inputs, outputs, strict: true };
    CausalModel::new(d, interp)
}

/// World tag for variable `v` in world `j` (1-based).
pub fn world_label(v: &str, j: usize) -> String {
    format!("{}#{}", v, j)
}

/// Base variable of a world/fresh label: the text before `#` or `~`.
pub fn base_variable(label: &str) -> &str {
    label.split(['#', '~']).next().unwrap_or(label)
}

/// World index of a tagged label, if any.
pub fn world_of(label: &str) -> Option<usize> {
    let rest = label.split('#').nth(1)?;
    rest.split('~').next()?.parse().ok()
}

/// Feeds one copy of the common inputs to every model; caused variables of
/// model `j` are tagged `#j`. Boxes of equal name and kernel are shared,
/// others get the world tag.
pub fn share_inputs(models: &[CausalModel]) -> Result<CausalModel> {
    let first = models.first().ok_or_else(|| invalid("no models to share inputs"))?;
    let inputs = first.inputs().to_vec();
    let mut wires: BTreeMap<String, usize> = BTreeMap::new();
    for i in &inputs {
        wires.insert(i.clone(), first.card(i)?);
    }
    let mut interp = Interpretation::new();
    let mut nodes = Vec::new();
    let mut outputs = Vec::new();
    for (j0, m) in models.iter().enumerate() {
        let j = j0 + 1;
        if m.inputs() != inputs.as_slice() || inputs.iter().any(|i| m.card(i).ok() != wires.get(i).copied()) {
            return Err(shape("models do not share identical inputs"));
        }
        let tag = |v: &str| if inputs.iter().any(|i| i == v) { v.to_string() } else { world_label(v, j) };
        for v in m.variables() {
            if !inputs.contains(&v) {
                wires.insert(tag(&v), m.card(&v)?);
            }
        }
        for mech in m.mechanisms() {
            let mut name = mech.box_name.clone();
            if let Some(prev) = interp.boxes.get(&name) {
                if prev != &mech.kernel {
                    name = world_label(&name, j);
                }
            }
            interp.boxes.entry(name.clone()).or_insert(mech.kernel.clone());
            nodes.push(Node::mechanism(name, mech.parents.iter().map(|p| tag(p)).collect(), tag(&mech.target)));
        }
        outputs.extend(m.outputs().iter().map(|o| tag(o)));
    }
    let d = NetworkDiagram { wires, nodes, inputs, outputs, strict: true };
    CausalModel::new(d, interp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoking() -> CausalModel {
        let c: BTreeMap<String, usize> = ["A", "B", "S", "L"].iter().map(|s| (s.to_string(), 2)).collect();
        CausalModel::cbn(
            &c,
            &[
                ("A", &[], &[0.6, 0.4]),
                ("B", &["A"], &[0.7, 0.3, 0.2, 0.8]),
                ("S", &["B"], &[0.9, 0.1, 0.3, 0.7]),
                ("L", &["S", "B", "A"], &[0.9, 0.1, 0.8, 0.2, 0.7, 0.3, 0.6, 0.4, 0.5, 0.5, 0.4, 0.6, 0.3, 0.7, 0.2, 0.8]),
            ],
            &["S", "L", "A"],
        )
        .unwrap()
    }

    #[test]
    fn do_copies_sharp_state_through() {
        let m = smoking();
        let d = apply(&m, &Intervention::Do { var: "S".into(), value: 1 }).unwrap();
        let w = d.output_state().unwrap();
        for l in 0..2 {
            for a in 0..2 {
                assert!(w.at(&[], &[0, l, a]).unwrap().abs() < 1e-15);
            }
        }
        assert_eq!(d.variables(), m.variables());
        assert_eq!(d.outputs(), m.outputs());
        let opened = open_at(&m, &["S".into()]).unwrap();
        let fed = Morphism::sharp_state(&FinObject::atom("S", 2), &[1]).unwrap().then(&opened.channel_of().unwrap()).unwrap();
        assert!(fed.approx_eq(&w, 1e-12));
    }

    #[test]
    fn pad_then_trim_restores() {
        let m = smoking();
        let padded = apply(&m, &Intervention::Pad { var: "S".into(), extra: vec!["A".into()] }).unwrap();
        assert_eq!(padded.parents("S"), vec!["B".to_string(), "A".to_string()]);
        let trimmed = apply(&padded, &Intervention::Trim { var: "S".into() }).unwrap();
        assert_eq!(trimmed.parents("S"), vec!["B".to_string()]);
        assert!(trimmed.mechanism("S").unwrap().kernel.approx_eq(&m.mechanism("S").unwrap().kernel, 1e-15));
        assert!(matches!(apply(&m, &Intervention::Pad { var: "B".into(), extra: vec!["L".into()] }), Err(Error::Cycle(_))));
    }

    #[test]
    fn share_identity_wires_is_copy() {
        let c: BTreeMap<String, usize> = [("X".to_string(), 2)].into_iter().collect();
        let id = CausalModel::from_mechanisms(&c, vec![], &["X".into()], &["X".into()]).unwrap();
        let both = share_inputs(&[id.clone(), id]).unwrap();
        let ch = both.channel_of().unwrap();
        assert!(ch.approx_eq(&Morphism::copy(&FinObject::atom("X", 2)), 0.0));
    }

    #[test]
    fn labels() {
        assert_eq!(base_variable("X#2~1"), "X");
        assert_eq!(world_of("X#2~1"), Some(2));
        assert_eq!(world_of("U_X"), None);
    }
}
