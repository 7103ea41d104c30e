//! Named-axis dense tensors and sum-product contraction.
//!
//! Diagram and expression evaluation reduce to one contraction: every box
//! becomes a factor over its wire labels, shared labels are copies, labels
//! absent from the kept set are summed (discarded).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{shape, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub vars: Vec<String>,
    pub cards: Vec<usize>,
    pub data: Vec<f64>,
}

impl Factor {
    pub fn scalar(v: f64) -> Self {
        Factor { vars: vec![], cards: vec![], data: vec![v] }
    }

    pub fn new(vars: Vec<String>, cards: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let size: usize = cards.iter().product();
        if vars.len() != cards.len() || data.len() != size {
            return Err(shape(format!("factor over {:?} expects {} entries, got {}", vars, size, data.len())));
        }
        let uniq: BTreeSet<&String> = vars.iter().collect();
        if uniq.len() != vars.len() {
            return Err(shape(format!("repeated factor variable in {:?}", vars)));
        }
        Ok(Factor { vars, cards, data })
    }

    pub fn size(&self) -> usize {
        self.data.len()
    }

    fn strides(cards: &[usize]) -> Vec<usize> {
        let mut s = vec![1; cards.len()];
        for k in (0..cards.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * cards[k + 1];
        }
        s
    }

    /// Pointwise product over the union of variables (self's first).
    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            match vars.iter().position(|w| w == v) {
                Some(i) if cards[i] != *c => {
                    return Err(shape(format!("variable `{}` has cardinality {} and {}", v, cards[i], c)))
                }
                Some(_) => {}
                None => {
                    vars.push(v.clone());
                    cards.push(*c);
                }
            }
        }
        let map = |f: &Factor| -> Vec<usize> {
            let fs = Self::strides(&f.cards);
            let mut m = vec![0; vars.len()];
            for (k, v) in f.vars.iter().enumerate() {
                let i = vars.iter().position(|w| w == v).unwrap();
                m[i] = fs[k];
            }
            m
        };
        let ma = map(self);
        let mb = map(other);
        let size: usize = cards.iter().product();
        let mut data = vec![0.0; size];
        let mut idx = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for slot in data.iter_mut() {
            *slot = self.data[ia] * other.data[ib];
            // odometer increment
            for k in (0..vars.len()).rev() {
                idx[k] += 1;
                ia += ma[k];
                ib += mb[k];
                if idx[k] < cards[k] {
                    break;
                }
                ia -= ma[k] * cards[k];
                ib -= mb[k] * cards[k];
                idx[k] = 0;
            }
        }
        Ok(Factor { vars, cards, data })
    }

    pub fn sum_out(&self, var: &str) -> Factor {
        let Some(pos) = self.vars.iter().position(|v| v == var) else {
            return self.clone();
        };
        let inner: usize = self.cards[pos + 1..].iter().product();
        let card = self.cards[pos];
        let outer: usize = self.cards[..pos].iter().product();
        let mut data = vec![0.0; outer * inner];
        for o in 0..outer {
            for c in 0..card {
                let base = (o * card + c) * inner;
                for i in 0..inner {
                    data[o * inner + i] += self.data[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        Factor { vars, cards, data }
    }

    /// Reorders axes to `order`, which must be a permutation of `vars`.
    pub fn permuted(&self, order: &[String]) -> Result<Factor> {
        if order.len() != self.vars.len() {
            return Err(shape(format!("cannot permute {:?} into {:?}", self.vars, order)));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|v| self.vars.iter().position(|w| w == v).ok_or_else(|| shape(format!("no axis `{}`", v))))
            .collect::<Result<_>>()?;
        let cards: Vec<usize> = perm.iter().map(|&p| self.cards[p]).collect();
        let src = Self::strides(&self.cards);
        let mapped: Vec<usize> = perm.iter().map(|&p| src[p]).collect();
        let mut data = vec![0.0; self.data.len()];
        let mut idx = vec![0usize; cards.len()];
        let mut s = 0usize;
        for slot in data.iter_mut() {
            *slot = self.data[s];
            for k in (0..cards.len()).rev() {
                idx[k] += 1;
                s += mapped[k];
                if idx[k] < cards[k] {
                    break;
                }
                s -= mapped[k] * cards[k];
                idx[k] = 0;
            }
        }
        Ok(Factor { vars: order.to_vec(), cards, data })
    }

    /// Value at a full assignment given by name.
    pub fn at(&self, assignment: &BTreeMap<String, usize>) -> f64 {
        let strides = Self::strides(&self.cards);
        let mut idx = 0;
        for (k, v) in self.vars.iter().enumerate() {
            idx += assignment[v] * strides[k];
        }
        self.data[idx]
    }
}

/// Multiplies all factors and sums out every variable not in `keep`;
/// the result has axes exactly `keep`, in order. Elimination picks the
/// variable whose elimination touches the smallest table, ties broken by
/// name, so the summation order is reproducible.
pub fn contract(factors: Vec<Factor>, keep: &[String]) -> Result<Factor> {
    let mut pool = factors;
    let keep_set: BTreeSet<&String> = keep.iter().collect();
    loop {
        let mut candidates: BTreeSet<String> = BTreeSet::new();
        for f in &pool {
            for v in &f.vars {
                if !keep_set.contains(v) {
                    candidates.insert(v.clone());
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let mut best: Option<(usize, String)> = None;
        for v in &candidates {
            let mut scope: BTreeMap<&String, usize> = BTreeMap::new();
            for f in pool.iter().filter(|f| f.vars.contains(v)) {
                for (w, c) in f.vars.iter().zip(&f.cards) {
                    scope.insert(w, *c);
                }
            }
            let cost: usize = scope.values().product();
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, v.clone()));
            }
        }
        let (_, var) = best.unwrap();
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = pool.into_iter().partition(|f| f.vars.contains(&var));
        let mut acc = Factor::scalar(1.0);
        for f in &touching {
            acc = acc.product(f)?;
        }
        pool = rest;
        pool.push(acc.sum_out(&var));
    }
    let mut acc = Factor::scalar(1.0);
    for f in &pool {
        acc = acc.product(f)?;
    }
    for v in keep {
        if !acc.vars.contains(v) {
            return Err(shape(format!("kept variable `{}` does not occur in any factor", v)));
        }
    }
    acc.permuted(keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(vars: &[&str], cards: &[usize], data: &[f64]) -> Factor {
        Factor::new(vars.iter().map(|s| s.to_string()).collect(), cards.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn matrix_product_by_contraction() {
        let a = f(&["x", "y"], &[2, 2], &[0.5, 0.5, 0.2, 0.8]);
        let b = f(&["y", "z"], &[2, 2], &[0.9, 0.1, 0.3, 0.7]);
        let c = contract(vec![a, b], &["x".into(), "z".into()]).unwrap();
        let want = [0.6, 0.4, 0.42, 0.58];
        for (g, w) in c.data.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_round_trip() {
        let a = f(&["x", "y", "z"], &[2, 3, 2], &(0..12).map(|i| i as f64).collect::<Vec<_>>());
        let p = a.permuted(&["z".into(), "x".into(), "y".into()]).unwrap();
        let back = p.permuted(&["x".into(), "y".into(), "z".into()]).unwrap();
        assert_eq!(a, back);
        let mut asg = BTreeMap::new();
        asg.insert("x".to_string(), 1);
        asg.insert("y".to_string(), 2);
        asg.insert("z".to_string(), 0);
        assert_eq!(a.at(&asg), p.at(&asg));
    }
}
