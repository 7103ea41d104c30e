//! Identifying expressions: terms over do-tables whose atoms carry names.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::PStarTables;
use crate::error::{invalid, shape, Result};
use crate::semantics::{contract_named, Atom, FinObject, Morphism};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum IdentifyingExpression {
    /// `P(outputs ; do(do_set))`, atoms then renamed by `rename`.
    Data {
        do_set: Vec<String>,
        outputs: Vec<String>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        rename: BTreeMap<String, String>,
    },
    /// A given morphism (e.g. an intervention map); atoms named as stored.
    Kernel { name: String, kernel: Morphism },
    SharpState { atom: String, card: usize, value: usize },
    /// Runs `first`, then `then` reading its inputs from `first`'s outputs
    /// (copied) or from outside; outputs of both are kept.
    Compose { first: Box<IdentifyingExpression>, then: Box<IdentifyingExpression> },
    Tensor { left: Box<IdentifyingExpression>, right: Box<IdentifyingExpression> },
    CopyFanout { inner: Box<IdentifyingExpression>, atom: String, alias: String },
    Discard { inner: Box<IdentifyingExpression>, atoms: Vec<String> },
    SharpEffect { inner: Box<IdentifyingExpression>, atom: String, value: usize },
    Conditional { inner: Box<IdentifyingExpression>, on: Vec<String> },
    /// Keeps `keep`, in that order.
    Marginal { inner: Box<IdentifyingExpression>, keep: Vec<String> },
    Normalize { inner: Box<IdentifyingExpression> },
    Relabel { inner: Box<IdentifyingExpression>, map: BTreeMap<String, String> },
    /// Product of the parts' tables over shared atoms, summed over every
    /// atom not in `keep`. Parts may read each other's outputs in any order.
    Contract { parts: Vec<IdentifyingExpression>, keep: Vec<String> },
}

use IdentifyingExpression as E;

impl IdentifyingExpression {
    pub fn data(do_set: &[String], outputs: &[String]) -> Self {
        E::Data { do_set: do_set.to_vec(), outputs: outputs.to_vec(), rename: BTreeMap::new() }
    }

    /// `P(target | given)` from the observational table.
    pub fn observational_conditional(target: &[String], given: &[String]) -> Self {
        let mut outs = given.to_vec();
        outs.extend(target.iter().cloned());
        let d = E::data(&[], &outs);
        if given.is_empty() {
            d
        } else {
            d.conditional(given)
        }
    }

    pub fn compose(self, then: Self) -> Self {
        E::Compose { first: Box::new(self), then: Box::new(then) }
    }

    pub fn tensor(self, right: Self) -> Self {
        E::Tensor { left: Box::new(self), right: Box::new(right) }
    }

    pub fn conditional(self, on: &[String]) -> Self {
        E::Conditional { inner: Box::new(self), on: on.to_vec() }
    }

    pub fn marginal(self, keep: &[String]) -> Self {
        E::Marginal { inner: Box::new(self), keep: keep.to_vec() }
    }

    pub fn discard(self, atoms: &[String]) -> Self {
        E::Discard { inner: Box::new(self), atoms: atoms.to_vec() }
    }

    pub fn normalize(self) -> Self {
        E::Normalize { inner: Box::new(self) }
    }

    pub fn relabel(self, map: BTreeMap<String, String>) -> Self {
        if map.is_empty() {
            return self;
        }
        E::Relabel { inner: Box::new(self), map }
    }

    pub fn sharp_effect(self, atom: &str, value: usize) -> Self {
        E::SharpEffect { inner: Box::new(self), atom: atom.to_string(), value }
    }

    /// Every data leaf as `(do_set, outputs)`.
    pub fn leaves(&self) -> Vec<(Vec<String>, Vec<String>)> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let E::Data { do_set, outputs, .. } = e {
                out.push((do_set.clone(), outputs.clone()));
            }
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&IdentifyingExpression)) {
        f(self);
        match self {
            E::Data { .. } | E::Kernel { .. } | E::SharpState { .. } => {}
            E::Compose { first, then } => {
                first.visit(f);
                then.visit(f);
            }
            E::Tensor { left, right } => {
                left.visit(f);
                right.visit(f);
            }
            E::CopyFanout { inner, .. }
            | E::Discard { inner, .. }
            | E::SharpEffect { inner, .. }
            | E::Conditional { inner, .. }
            | E::Marginal { inner, .. }
            | E::Normalize { inner }
            | E::Relabel { inner, .. } => inner.visit(f),
            E::Contract { parts, .. } => parts.iter().for_each(|p| p.visit(f)),
        }
    }

    /// Bottom-up evaluation; the result's atoms carry the expression's labels.
    pub fn evaluate(&self, data: &PStarTables) -> Result<Morphism> {
        match self {
            E::Data { do_set, outputs, rename } => {
                let t = data.get(do_set)?;
                let m = t.marginalize(outputs)?.permute_cod(outputs)?.permute_dom(do_set)?;
                if rename.is_empty() {
                    Ok(m)
                } else {
                    m.renamed(|n| rename.get(n).cloned().unwrap_or_else(|| n.to_string()))
                }
            }
            E::Kernel { kernel, .. } => Ok(kernel.clone()),
            E::SharpState { atom, card, value } => Morphism::sharp_state(&FinObject::atom(atom.clone(), *card), &[*value]),
            E::Compose { first, then } => {
                let f = first.evaluate(data)?;
                let g = then.evaluate(data)?;
                let (fd, fc, gd, gc) = (f.dom().names(), f.cod().names(), g.dom().names(), g.cod().names());
                if gc.iter().any(|n| fc.contains(n) || fd.contains(n)) {
                    return Err(shape(format!("composite would produce {:?} twice", gc)));
                }
                let mut dom_atoms: Vec<Atom> = f.dom().atoms().to_vec();
                for a in g.dom().atoms() {
                    if !fc.contains(&a.name) && !fd.contains(&a.name) {
                        dom_atoms.push(a.clone());
                    }
                }
                let cod_atoms: Vec<Atom> = f.cod().atoms().iter().chain(g.cod().atoms()).cloned().collect();
                contract_named(&[(&f, fd, fc), (&g, gd, gc)], &FinObject::new(dom_atoms)?, &FinObject::new(cod_atoms)?)
            }
            E::Tensor { left, right } => {
                let f = left.evaluate(data)?;
                let g = right.evaluate(data)?;
                let (fd, fc, gd, gc) = (f.dom().names(), f.cod().names(), g.dom().names(), g.cod().names());
                if gc.iter().any(|n| fc.contains(n) || fd.contains(n) || gd.contains(n)) || fc.iter().any(|n| gd.contains(n)) {
                    return Err(shape("tensor factors share output atoms"));
                }
                let mut dom_atoms: Vec<Atom> = f.dom().atoms().to_vec();
                for a in g.dom().atoms() {
                    if !fd.contains(&a.name) {
                        dom_atoms.push(a.clone());
                    }
                }
                let cod_atoms: Vec<Atom> = f.cod().atoms().iter().chain(g.cod().atoms()).cloned().collect();
                contract_named(&[(&f, fd, fc), (&g, gd, gc)], &FinObject::new(dom_atoms)?, &FinObject::new(cod_atoms)?)
            }
            E::CopyFanout { inner, atom, alias } => {
                let f = inner.evaluate(data)?;
                let card = f.cod().card_of(atom)?;
                let id = Morphism::identity(&FinObject::atom("x", card));
                let mut cod_atoms = f.cod().atoms().to_vec();
                cod_atoms.push(Atom::new(alias.clone(), card));
                let parts = [(&f, f.dom().names(), f.cod().names()), (&id, vec![atom.clone()], vec![alias.clone()])];
                contract_named(&parts, f.dom(), &FinObject::new(cod_atoms)?)
            }
            E::Discard { inner, atoms } => {
                let f = inner.evaluate(data)?;
                let keep: Vec<String> = f.cod().names().into_iter().filter(|n| !atoms.contains(n)).collect();
                for a in atoms {
                    f.cod().card_of(a)?;
                }
                f.marginalize(&keep)
            }
            E::SharpEffect { inner, atom, value } => {
                let f = inner.evaluate(data)?;
                let card = f.cod().card_of(atom)?;
                let e = Morphism::sharp_effect(&FinObject::atom("x", card), &[*value])?;
                let cod = f.cod().without(std::slice::from_ref(atom));
                let parts = [(&f, f.dom().names(), f.cod().names()), (&e, vec![atom.clone()], vec![])];
                contract_named(&parts, f.dom(), &cod)
            }
            E::Conditional { inner, on } => inner.evaluate(data)?.conditional(on),
            E::Marginal { inner, keep } => inner.evaluate(data)?.marginalize(keep)?.permute_cod(keep),
            E::Normalize { inner } => Ok(inner.evaluate(data)?.normalize()),
            E::Relabel { inner, map } => {
                let f = inner.evaluate(data)?;
                for k in map.keys() {
                    if !f.dom().contains(k) && !f.cod().contains(k) {
                        return Err(invalid(format!("relabelling unknown atom `{}`", k)));
                    }
                }
                f.renamed(|n| map.get(n).cloned().unwrap_or_else(|| n.to_string()))
            }
            E::Contract { parts, keep } => {
                let ms: Vec<Morphism> = parts.iter().map(|p| p.evaluate(data)).collect::<Result<_>>()?;
                let mut cards: BTreeMap<String, usize> = BTreeMap::new();
                for m in &ms {
                    for a in m.dom().atoms().iter().chain(m.cod().atoms()) {
                        if *cards.entry(a.name.clone()).or_insert(a.card) != a.card {
                            return Err(shape(format!("atom `{}` has two cardinalities", a.name)));
                        }
                    }
                }
                let cod = FinObject::new(
                    keep.iter()
                        .map(|k| cards.get(k).map(|c| Atom::new(k.clone(), *c)).ok_or_else(|| invalid(format!("kept atom `{}` is not produced", k))))
                        .collect::<Result<_>>()?,
                )?;
                let refs: Vec<(&Morphism, Vec<String>, Vec<String>)> = ms.iter().map(|m| (m, m.dom().names(), m.cod().names())).collect();
                contract_named(&refs, &FinObject::unit(), &cod)
            }
        }
    }
}

fn list(v: &[String]) -> String {
    v.join(",")
}

impl fmt::Display for IdentifyingExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E::Data { do_set, outputs, rename } => {
                if do_set.is_empty() {
                    write!(f, "P({})", list(outputs))?;
                } else {
                    write!(f, "P({} ; do({}))", list(outputs), list(do_set))?;
                }
                if !rename.is_empty() {
                    let r: Vec<String> = rename.iter().map(|(a, b)| format!("{}→{}", a, b)).collect();
                    write!(f, "[{}]", r.join(","))?;
                }
                Ok(())
            }
            E::Kernel { name, .. } => write!(f, "{}", name),
            E::SharpState { atom, value, .. } => write!(f, "δ({}={})", atom, value),
            E::Compose { first, then } => write!(f, "({} ; {})", first, then),
            E::Tensor { left, right } => write!(f, "({} ⊗ {})", left, right),
            E::CopyFanout { inner, atom, alias } => write!(f, "copy[{}→{}]({})", atom, alias, inner),
            E::Discard { inner, atoms } => write!(f, "Σ_{{{}}} {}", list(atoms), inner),
            E::SharpEffect { inner, atom, value } => write!(f, "[{}={}]†{}", atom, value, inner),
            E::Conditional { inner, on } => write!(f, "{}|{}", inner, list(on)),
            E::Marginal { inner, keep } => write!(f, "marg[{}]{}", list(keep), inner),
            E::Normalize { inner } => write!(f, "N[{}]", inner),
            E::Relabel { inner, map } => {
                let r: Vec<String> = map.iter().map(|(a, b)| format!("{}→{}", a, b)).collect();
                write!(f, "{}[{}]", inner, r.join(","))
            }
            E::Contract { parts, keep } => {
                let ps: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "Σ→{{{}}} [{}]", list(keep), ps.join(" · "))
            }
        }
    }
}
