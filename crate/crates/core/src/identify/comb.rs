//! Identification of single-variable interventions under the c-component
//! condition: the interventional state is a comb built from observational
//! conditionals along a topological order.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{truncated_factorization, IdentifyingExpression as E, PStarTables};
use crate::error::{invalid, Error, Result};
use crate::graph::{Admg, Rootification};
use crate::intervention::{apply, Intervention};
use crate::random::random_rootified_model;
use crate::semantics::{Atom, FinObject, Morphism};

/// Vertices other than `x` split along a topological order with the
/// non-descendants of `x` first: `a` precedes `x`; `b` follows `x` outside
/// its c-component (these read the intervened value); `c` follows `x`
/// inside its c-component (these read the natural value).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CComponentPartition {
    pub x: String,
    pub order: Vec<String>,
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum EtaShape {
    Do { value: usize },
    /// `eta : context ⊗ X → X`, context among the non-descendants of `X`
    General { context: Vec<String>, eta: Morphism },
}

fn candidate(admg: &Admg, x: &str) -> Result<CComponentPartition> {
    let topo = admg.dag().topological_order()?;
    let desc = admg.dag().descendants(x);
    let comp = admg.c_component(x)?;
    let mut order: Vec<String> = topo.iter().filter(|v| !desc.contains(*v)).cloned().collect();
    let a = order.clone();
    order.push(x.to_string());
    let after: Vec<String> = topo.iter().filter(|v| desc.contains(*v) && *v != x).cloned().collect();
    order.extend(after.iter().cloned());
    let b = after.iter().filter(|v| !comp.contains(*v)).cloned().collect();
    let c = after.iter().filter(|v| comp.contains(*v)).cloned().collect();
    Ok(CComponentPartition { x: x.to_string(), order, a, b, c })
}

/// Checks the comb formula against surgery on `trials` random
/// interpretations of the rootified graph (binary observed variables).
pub fn validate_partition(admg: &Admg, p: &CComponentPartition, trials: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cards: BTreeMap<String, usize> = admg.vertices().iter().map(|v| (v.clone(), 2)).collect();
    for _ in 0..trials {
        let (m, observed) = random_rootified_model(admg, Rootification::RhoTilde, &cards, 2, &mut rng)?;
        let data = PStarTables::from_model_subsets(&m, &observed, &[vec![]])?;
        for v in 0..cards[&p.x] {
            let expr = c_component_expression(p, &EtaShape::Do { value: v }, &cards)?;
            let got = expr.evaluate(&data)?;
            let mut doset = BTreeMap::new();
            doset.insert(p.x.clone(), v);
            let truth = truncated_factorization(&m, &doset)?.permute_cod(&got.cod().names())?;
            if got.max_abs_diff(&truth)? > 1e-7 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The partition when the c-component condition holds at `x` (and the
/// comb identity checks out numerically), `None` otherwise.
pub fn c_component_partition(admg: &Admg, x: &str) -> Result<Option<CComponentPartition>> {
    if !admg.c_condition(x)? {
        return Ok(None);
    }
    let p = candidate(admg, x)?;
    if validate_partition(admg, &p, 10, 0x5eed)? {
        Ok(Some(p))
    } else {
        Ok(None)
    }
}

fn natural(x: &str) -> String {
    format!("{}~nat", x)
}

fn intervened(x: &str) -> String {
    format!("{}~do", x)
}

/// `P(O ; eta_X)` over `O` in name order, built from the observational table:
/// `Σ_x eta(x'|a,x) P(a,x) Π_{v after X} P(v | pred v)` with `X` read as
/// `x'` by `b` and as `x` by `c`.
pub fn c_component_expression(p: &CComponentPartition, eta: &EtaShape, cards: &BTreeMap<String, usize>) -> Result<E> {
    let x = &p.x;
    let card = *cards.get(x).ok_or_else(|| Error::UnknownName(x.clone()))?;
    let (xn, xo) = (natural(x), intervened(x));
    let mut ax = p.a.clone();
    ax.push(x.clone());
    let to_nat: BTreeMap<String, String> = [(x.clone(), xn.clone())].into_iter().collect();
    let mut e = E::data(&[], &ax).relabel(to_nat.clone());
    match eta {
        EtaShape::Do { value } => {
            e = e.compose(E::SharpState { atom: xo.clone(), card, value: *value });
        }
        EtaShape::General { context, eta } => {
            if let Some(c) = context.iter().find(|c| !p.a.contains(*c)) {
                return Err(invalid(format!("intervention context `{}` is not upstream of `{}`", c, x)));
            }
            let mut atoms: Vec<Atom> = context.iter().map(|c| Ok(Atom::new(c.clone(), *cards.get(c).ok_or_else(|| Error::UnknownName(c.clone()))?))).collect::<Result<_>>()?;
            atoms.push(Atom::new(xn.clone(), card));
            let k = eta.with_objects(FinObject::new(atoms)?, FinObject::atom(xo.clone(), card))?;
            e = e.compose(E::Kernel { name: format!("eta_{}", x), kernel: k });
        }
    }
    let pos = p.order.iter().position(|v| v == x).ok_or_else(|| invalid("partition order misses the intervened vertex"))?;
    for (i, v) in p.order.iter().enumerate().skip(pos + 1) {
        let pred = &p.order[..i];
        let read = if p.b.contains(v) { xo.clone() } else { xn.clone() };
        let map: BTreeMap<String, String> = [(x.clone(), read)].into_iter().collect();
        e = e.compose(E::observational_conditional(std::slice::from_ref(v), pred).relabel(map));
    }
    let mut keep: Vec<String> = cards.keys().cloned().collect();
    for k in keep.iter_mut() {
        if k == x {
            *k = xo.clone();
        }
    }
    let back: BTreeMap<String, String> = [(xo, x.clone())].into_iter().collect();
    Ok(e.marginal(&keep).relabel(back))
}

/// Convenience: partition and expression, or `None` when undecided.
pub fn c_component_identify(admg: &Admg, x: &str, eta: &EtaShape) -> Result<Option<E>> {
    let cards: BTreeMap<String, usize> = admg.vertices().iter().map(|v| (v.clone(), 2)).collect();
    match c_component_partition(admg, x)? {
        Some(p) => Ok(Some(c_component_expression(&p, eta, &cards)?)),
        None => Ok(None),
    }
}

/// Ground truth for a general `eta`: the wide local intervention applied by surgery.
pub fn general_eta_truth(m: &crate::model::CausalModel, x: &str, context: &[String], eta: &Morphism) -> Result<Morphism> {
    let sigma = Intervention::WideLocal { var: x.to_string(), context: context.to_vec(), eta: eta.clone() };
    apply(m, &sigma)?.output_state()
}
