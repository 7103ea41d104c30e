//! Pairs of models that agree on the observational distribution but not on
//! an interventional target.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{rootify, Admg, Rootification};
use crate::intervention::{apply, Intervention};
use crate::model::{CausalModel, Mechanism};
use crate::random::random_channel;
use crate::semantics::{Atom, FinObject, Morphism};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessTarget {
    /// `P(y ; do x)` as a channel `x → y`
    Marginal { x: String, y: String },
    /// `P(y | z ; do x)` as a channel `x ⊗ z → y`
    Conditional { x: String, y: String, z: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub graph: Admg,
    pub observed: Vec<String>,
    pub target: WitnessTarget,
    /// a model on the rootified graph
    pub confounded: CausalModel,
    /// a model on the directed part alone with the same observational state
    pub unconfounded: CausalModel,
    pub distance: f64,
}

/// The target as a channel, computed by surgery per value of `x`.
pub fn target_channel(m: &CausalModel, target: &WitnessTarget) -> Result<Morphism> {
    let (x, keep, on): (&String, Vec<String>, Vec<String>) = match target {
        WitnessTarget::Marginal { x, y } => (x, vec![y.clone()], vec![]),
        WitnessTarget::Conditional { x, y, z } => (x, vec![y.clone(), z.clone()], vec![z.clone()]),
    };
    let cx = m.card(x)?;
    let mut rows: Vec<Morphism> = Vec::new();
    for v in 0..cx {
        let s = apply(&m.with_outputs(&keep)?, &Intervention::Do { var: x.clone(), value: v })?.output_state()?;
        rows.push(if on.is_empty() { s } else { s.conditional(&on)? });
    }
    let inner_dom = rows[0].dom().clone();
    let cod = rows[0].cod().clone();
    let mut dom_atoms = vec![Atom::new(x.clone(), cx)];
    dom_atoms.extend(inner_dom.atoms().iter().cloned());
    let dom = FinObject::new(dom_atoms)?;
    let mut data = Vec::new();
    for r in &rows {
        data.extend_from_slice(r.data());
    }
    Morphism::new(dom, cod, data)
}

/// Largest total-variation distance between corresponding rows.
pub fn target_distance(a: &Morphism, b: &Morphism) -> Result<f64> {
    a.max_abs_diff(b)?;
    let m = a.cod().size();
    Ok((0..a.dom().size())
        .map(|d| 0.5 * (0..m).map(|c| (a.get(d, c) - b.get(d, c)).abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// The model on the directed part of `graph` whose mechanisms are the
/// observational conditionals `P(v | Pa(v))` of `m`.
pub fn unconfounded_twin(m: &CausalModel, graph: &Admg) -> Result<CausalModel> {
    let observed: Vec<String> = graph.vertices().to_vec();
    let joint = m.with_outputs(&observed)?.output_state()?;
    let cards: BTreeMap<String, usize> = observed.iter().map(|v| Ok((v.clone(), m.card(v)?))).collect::<Result<_>>()?;
    let mut mechs = Vec::new();
    for v in graph.dag().topological_order()? {
        let pa = graph.parents(&v);
        let mut keep = pa.clone();
        keep.push(v.clone());
        let marg = joint.marginalize(&keep)?.permute_cod(&keep)?;
        let mut k = if pa.is_empty() { marg } else { marg.conditional(&pa)? };
        // unsupported parent settings get a uniform row so the twin stays a channel
        let card = cards[&v];
        let mut data = k.data().to_vec();
        for row in data.chunks_mut(card) {
            if row.iter().sum::<f64>() <= 0.0 {
                row.iter_mut().for_each(|x| *x = 1.0 / card as f64);
            }
        }
        k = Morphism::new(k.dom().clone(), k.cod().clone(), data)?;
        mechs.push(Mechanism::new(v, pa, k));
    }
    CausalModel::from_mechanisms(&cards, mechs, &[], &observed)
}

fn random_confounded(graph: &Admg, rng: &mut ChaCha8Rng) -> Result<CausalModel> {
    let r = rootify(graph, Rootification::RhoTilde)?;
    let mut cards: BTreeMap<String, usize> = graph.vertices().iter().map(|v| (v.clone(), 2)).collect();
    for root in &r.roots {
        cards.insert(root.clone(), 2);
    }
    let mut mechs = Vec::new();
    for v in r.dag.topological_order()? {
        let pa = r.dag.parents(&v);
        let dom = FinObject::new(pa.iter().map(|p| Atom::new(p.clone(), cards[p])).collect())?;
        let k = random_channel(dom, FinObject::atom(v.clone(), cards[&v]), 0.0, rng);
        mechs.push(Mechanism::new(v, pa, k));
    }
    CausalModel::from_mechanisms(&cards, mechs, &[], graph.vertices())
}

fn perturb(m: &CausalModel, rng: &mut ChaCha8Rng, scale: f64) -> Result<CausalModel> {
    let mechs = m.mechanisms();
    let pick = rng.gen_range(0..mechs.len());
    let mut out = m.clone();
    let mech = &mechs[pick];
    let card = mech.kernel.cod().size();
    let data: Vec<f64> = mech
        .kernel
        .data()
        .chunks(card)
        .flat_map(|row| {
            let r: Vec<f64> = row.iter().map(|x| (x + rng.gen_range(-scale..scale)).clamp(1e-3, 1.0)).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(move |x| x / s)
        })
        .collect();
    let k = Morphism::new(mech.kernel.dom().clone(), mech.kernel.cod().clone(), data)?;
    out = out.with_mechanism(Mechanism { kernel: k, ..mech.clone() })?;
    Ok(out)
}

/// Random restarts plus hill climbing on the target distance.
pub fn search_witness(graph: &Admg, target: &WitnessTarget, seed: u64, restarts: usize, steps: usize) -> Result<Witness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let score = |m: &CausalModel| -> Result<(f64, CausalModel)> {
        let twin = unconfounded_twin(m, graph)?;
        let d = target_distance(&target_channel(m, target)?, &target_channel(&twin, target)?)?;
        Ok((d, twin))
    };
    let mut best: Option<(f64, CausalModel, CausalModel)> = None;
    for _ in 0..restarts {
        let mut cur = random_confounded(graph, &mut rng)?;
        let (mut d, mut twin) = score(&cur)?;
        for _ in 0..steps {
            let cand = perturb(&cur, &mut rng, 0.3)?;
            let (dc, tc) = score(&cand)?;
            if dc > d {
                cur = cand;
                d = dc;
                twin = tc;
            }
        }
        if best.as_ref().is_none_or(|b| d > b.0) {
            best = Some((d, cur, twin));
        }
    }
    let (distance, confounded, unconfounded) = best.ok_or_else(|| invalid("witness search needs at least one restart"))?;
    Ok(Witness { graph: graph.clone(), observed: graph.vertices().to_vec(), target: target.clone(), confounded, unconfounded, distance })
}
