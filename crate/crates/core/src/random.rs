//! Seeded generators for graphs, models and morphisms.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::graph::{rootify, Admg, Dag, Rootification};
use crate::model::{CausalModel, Fcm, FcmEntry, Mechanism};
use crate::semantics::{Atom, FinObject, Morphism};

/// Rows drawn uniformly from `[floor, 1]` and normalised.
pub fn random_channel<R: Rng + ?Sized>(dom: FinObject, cod: FinObject, floor: f64, rng: &mut R) -> Morphism {
    let m = cod.size();
    let mut data = Vec::with_capacity(dom.size() * m);
    for _ in 0..dom.size() {
        let row: Vec<f64> = (0..m).map(|_| rng.gen_range(floor..=1.0)).collect();
        let s: f64 = row.iter().sum();
        data.extend(row.into_iter().map(|x| x / s));
    }
    Morphism::new(dom, cod, data).expect("normalised rows")
}

/// Channel with some rows replaced by sparse rows (zeros allowed).
pub fn random_sparse_channel<R: Rng + ?Sized>(dom: FinObject, cod: FinObject, zero_prob: f64, rng: &mut R) -> Morphism {
    let m = cod.size();
    let mut data = Vec::with_capacity(dom.size() * m);
    for _ in 0..dom.size() {
        let mut row: Vec<f64> = (0..m).map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
        if row.iter().sum::<f64>() <= 0.0 {
            row[rng.gen_range(0..m)] = 1.0;
        }
        let s: f64 = row.iter().sum();
        data.extend(row.into_iter().map(|x| x / s));
    }
    Morphism::new(dom, cod, data).expect("normalised rows")
}

/// Arbitrary nonnegative matrix; each input row is zeroed with `zero_row_prob`.
pub fn random_morphism<R: Rng + ?Sized>(dom: FinObject, cod: FinObject, zero_row_prob: f64, rng: &mut R) -> Morphism {
    let m = cod.size();
    let mut data = Vec::with_capacity(dom.size() * m);
    for _ in 0..dom.size() {
        let zero = rng.gen_bool(zero_row_prob);
        for _ in 0..m {
            data.push(if zero || rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) });
        }
    }
    Morphism::new(dom, cod, data).expect("nonnegative")
}

/// Normalised state; entries are zeroed with `zero_prob` (at least one survives).
pub fn random_state<R: Rng + ?Sized>(cod: FinObject, zero_prob: f64, rng: &mut R) -> Morphism {
    random_sparse_channel(FinObject::unit(), cod, zero_prob, rng)
}

/// DAG over `V0…V{n-1}` with edges `Vi → Vj` (i < j) kept with probability `p`,
/// then vertex names shuffled.
pub fn random_dag<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Dag {
    let mut names: Vec<String> = (0..n).map(|i| format!("V{}", i)).collect();
    names.shuffle(rng);
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.insert((names[i].clone(), names[j].clone()));
            }
        }
    }
    let mut vs = names.clone();
    vs.sort();
    Dag::from_parts(vs, edges).expect("forward edges are acyclic")
}

pub fn random_admg<R: Rng + ?Sized>(n: usize, p_dir: f64, p_bi: f64, rng: &mut R) -> Admg {
    let dag = random_dag(n, p_dir, rng);
    let vs = dag.vertices().to_vec();
    let dir: Vec<(String, String)> = dag.edges().iter().cloned().collect();
    let mut bi = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_bi) {
                bi.push((vs[i].clone(), vs[j].clone()));
            }
        }
    }
    Admg::new(&vs, &dir, &bi).expect("valid mixed graph")
}

pub fn random_cards<R: Rng + ?Sized>(vertices: &[String], max_card: usize, rng: &mut R) -> BTreeMap<String, usize> {
    vertices.iter().map(|v| (v.clone(), rng.gen_range(2..=max_card.max(2)))).collect()
}

/// CBN on `dag` with random full-support mechanisms.
pub fn random_cbn<R: Rng + ?Sized>(dag: &Dag, cards: &BTreeMap<String, usize>, outputs: &[String], rng: &mut R) -> Result<CausalModel> {
    let mut mechs = Vec::new();
    for v in dag.topological_order()? {
        let parents = dag.parents(&v);
        let dom = FinObject::new(parents.iter().map(|p| Atom::new(p.clone(), cards[p])).collect())?;
        let k = random_channel(dom, FinObject::atom(v.clone(), cards[&v]), 0.05, rng);
        mechs.push(Mechanism::new(v, parents, k));
    }
    CausalModel::from_mechanisms(cards, mechs, &[], outputs)
}

/// A closed model on the rootification of `admg`: roots get cardinality
/// `root_card`, observed vertices their given cards. Returns the model and
/// the observed roster.
pub fn random_rootified_model<R: Rng + ?Sized>(
    admg: &Admg,
    method: Rootification,
    cards: &BTreeMap<String, usize>,
    root_card: usize,
    rng: &mut R,
) -> Result<(CausalModel, Vec<String>)> {
    let r = rootify(admg, method)?;
    let mut all = cards.clone();
    for root in &r.roots {
        all.insert(root.clone(), root_card);
    }
    let observed: Vec<String> = admg.vertices().to_vec();
    let m = random_cbn(&r.dag, &all, &observed, rng)?;
    Ok((m, observed))
}

/// FCM on `dag` with noise cardinality `noise_card`, random functions and
/// random full-support noise distributions.
pub fn random_fcm<R: Rng + ?Sized>(dag: &Dag, cards: &BTreeMap<String, usize>, noise_card: usize, rng: &mut R) -> Result<Fcm> {
    let mut entries = Vec::new();
    for v in dag.topological_order()? {
        let parents = dag.parents(&v);
        let rows: usize = parents.iter().map(|p| cards[p]).product::<usize>() * noise_card;
        let function = (0..rows).map(|_| rng.gen_range(0..cards[&v])).collect();
        let lambda = random_channel(FinObject::unit(), FinObject::atom("u", noise_card), 0.05, rng).data().to_vec();
        entries.push(FcmEntry { noise: format!("U_{}", v), target: v, parents, noise_card, function, lambda });
    }
    Fcm::new(cards.clone(), entries, dag.vertices().to_vec())
}
