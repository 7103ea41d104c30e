use serde::{Deserialize, Serialize};

use super::factor::{contract, Factor};
use super::object::{Atom, FinObject};
use crate::error::{invalid, shape, Error, Result};

/// Default per-entry tolerance for equality and classification.
pub const DEFAULT_TOL: f64 = 1e-9;
/// An input whose total mass is at or below this is treated as unsupported.
pub const ZERO_COLUMN: f64 = 1e-12;

/// A nonnegative matrix `M(cod | dom)`, stored row-major over
/// `(dom index, cod index)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Morphism {
    dom: FinObject,
    cod: FinObject,
    data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Identity,
    Swap,
    Copy(usize),
    Discard,
    Cap,
    UniformState,
    SharpState(Vec<usize>),
    SharpEffect(Vec<usize>),
    Zero,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismClass {
    pub is_channel: bool,
    pub is_partial_channel: bool,
    pub is_deterministic: bool,
    pub is_normalised_state: bool,
    pub is_sharp: bool,
    pub is_zero: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftMode {
    Upper,
    Lower,
}

/// Result of [`Morphism::functional_dilation`]: `c = f ∘ (id ⊗ lambda)`.
#[derive(Clone, Debug)]
pub struct Dilation {
    pub f: Morphism,
    pub noise: FinObject,
    pub lambda: Morphism,
}

impl Morphism {
    pub fn new(dom: FinObject, cod: FinObject, data: Vec<f64>) -> Result<Self> {
        if data.len() != dom.size() * cod.size() {
            return Err(shape(format!(
                "{} → {} needs {} entries, got {}",
                dom,
                cod,
                dom.size() * cod.size(),
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(invalid(format!("entry {} is not a finite nonnegative real", x)));
        }
        Ok(Morphism { dom, cod, data })
    }

    pub fn state(cod: FinObject, data: Vec<f64>) -> Result<Self> {
        Self::new(FinObject::unit(), cod, data)
    }

    pub fn effect(dom: FinObject, data: Vec<f64>) -> Result<Self> {
        Self::new(dom, FinObject::unit(), data)
    }

    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(FinObject::unit(), FinObject::unit(), vec![v])
    }

    pub fn from_fn(dom: FinObject, cod: FinObject, mut f: impl FnMut(&[usize], &[usize]) -> f64) -> Result<Self> {
        let (n, m) = (dom.size(), cod.size());
        let mut data = Vec::with_capacity(n * m);
        for d in 0..n {
            let dt = dom.tuple_of(d);
            for c in 0..m {
                data.push(f(&dt, &cod.tuple_of(c)));
            }
        }
        Self::new(dom, cod, data)
    }

    pub fn dom(&self) -> &FinObject {
        &self.dom
    }

    pub fn cod(&self) -> &FinObject {
        &self.cod
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, d: usize, c: usize) -> f64 {
        self.data[d * self.cod.size() + c]
    }

    pub fn at(&self, dom_tuple: &[usize], cod_tuple: &[usize]) -> Result<f64> {
        Ok(self.get(self.dom.index_of(dom_tuple)?, self.cod.index_of(cod_tuple)?))
    }

    /// Scalar value of a unit-to-unit morphism.
    pub fn value(&self) -> Result<f64> {
        if !self.dom.is_unit() || !self.cod.is_unit() {
            return Err(shape(format!("{} → {} is not a scalar", self.dom, self.cod)));
        }
        Ok(self.data[0])
    }

    pub fn row(&self, d: usize) -> &[f64] {
        let m = self.cod.size();
        &self.data[d * m..(d + 1) * m]
    }

    pub fn is_state(&self) -> bool {
        self.dom.is_unit()
    }

    pub fn is_effect(&self) -> bool {
        self.cod.is_unit()
    }

    pub fn with_objects(&self, dom: FinObject, cod: FinObject) -> Result<Self> {
        if !dom.compatible(&self.dom) || !cod.compatible(&self.cod) {
            return Err(shape(format!("cannot relabel {} → {} as {} → {}", self.dom, self.cod, dom, cod)));
        }
        Ok(Morphism { dom, cod, data: self.data.clone() })
    }

    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        let dom = self.dom.renamed(&f)?;
        let cod = self.cod.renamed(&f)?;
        Ok(Morphism { dom, cod, data: self.data.clone() })
    }

    pub fn generator(kind: &GeneratorKind, obj: &FinObject) -> Result<Self> {
        let n = obj.size();
        match kind {
            GeneratorKind::Identity => Self::from_fn(obj.clone(), obj.clone(), |d, c| (d == c) as u8 as f64),
            GeneratorKind::Swap => {
                if obj.atoms().len() != 2 {
                    return Err(shape("swap needs an object with exactly two atoms"));
                }
                let a = obj.atoms();
                let cod = FinObject::new(vec![a[1].clone(), a[0].clone()])?;
                Self::from_fn(obj.clone(), cod, |d, c| (d[0] == c[1] && d[1] == c[0]) as u8 as f64)
            }
            GeneratorKind::Copy(k) => {
                let mut cod = FinObject::unit();
                for _ in 0..*k {
                    cod = cod.tensor(obj);
                }
                let mut data = vec![0.0; n * cod.size()];
                if *k == 0 {
                    data.iter_mut().for_each(|x| *x = 1.0);
                } else {
                    for x in 0..n {
                        let mut idx = 0;
                        for _ in 0..*k {
                            idx = idx * n + x;
                        }
                        data[x * cod.size() + idx] = 1.0;
                    }
                }
                Self::new(obj.clone(), cod, data)
            }
            GeneratorKind::Discard => Self::generator(&GeneratorKind::Copy(0), obj),
            GeneratorKind::Cap => {
                let dom = obj.tensor(obj);
                let mut data = vec![0.0; n * n];
                for x in 0..n {
                    data[x * n + x] = 1.0;
                }
                Self::effect(dom, data)
            }
            GeneratorKind::UniformState => Self::state(obj.clone(), vec![1.0 / n as f64; n]),
            GeneratorKind::SharpState(v) => {
                let i = obj.index_of(v)?;
                let mut data = vec![0.0; n];
                data[i] = 1.0;
                Self::state(obj.clone(), data)
            }
            GeneratorKind::SharpEffect(v) => {
                let i = obj.index_of(v)?;
                let mut data = vec![0.0; n];
                data[i] = 1.0;
                Self::effect(obj.clone(), data)
            }
            GeneratorKind::Zero => Self::state(obj.clone(), vec![0.0; n]),
        }
    }

    pub fn identity(obj: &FinObject) -> Self {
        Self::generator(&GeneratorKind::Identity, obj).unwrap()
    }

    pub fn discard(obj: &FinObject) -> Self {
        Self::generator(&GeneratorKind::Discard, obj).unwrap()
    }

    pub fn copy(obj: &FinObject) -> Self {
        Self::generator(&GeneratorKind::Copy(2), obj).unwrap()
    }

    pub fn uniform(obj: &FinObject) -> Self {
        Self::generator(&GeneratorKind::UniformState, obj).unwrap()
    }

    pub fn sharp_state(obj: &FinObject, v: &[usize]) -> Result<Self> {
        Self::generator(&GeneratorKind::SharpState(v.to_vec()), obj)
    }

    pub fn sharp_effect(obj: &FinObject, v: &[usize]) -> Result<Self> {
        Self::generator(&GeneratorKind::SharpEffect(v.to_vec()), obj)
    }

    /// `g ∘ self`: `(g∘f)(z|x) = Σ_y g(z|y) f(y|x)`.
    pub fn then(&self, g: &Morphism) -> Result<Morphism> {
        compose(self, g)
    }

    /// Kronecker product.
    pub fn tensor(&self, g: &Morphism) -> Morphism {
        let dom = self.dom.tensor(&g.dom);
        let cod = self.cod.tensor(&g.cod);
        let (m1, m2) = (self.cod.size(), g.cod.size());
        let (n1, n2) = (self.dom.size(), g.dom.size());
        let mut data = vec![0.0; n1 * n2 * m1 * m2];
        for d1 in 0..n1 {
            for d2 in 0..n2 {
                let row = (d1 * n2 + d2) * m1 * m2;
                for c1 in 0..m1 {
                    let a = self.data[d1 * m1 + c1];
                    for c2 in 0..m2 {
                        data[row + c1 * m2 + c2] = a * g.data[d2 * m2 + c2];
                    }
                }
            }
        }
        Morphism { dom, cod, data }
    }

    /// Reorders the codomain atoms to `order` (a permutation of their names).
    pub fn permute_cod(&self, order: &[String]) -> Result<Morphism> {
        let cod = self.cod.select(order)?;
        if cod.atoms().len() != self.cod.atoms().len() {
            return Err(shape("permute_cod needs every codomain atom exactly once"));
        }
        let pos: Vec<usize> = order.iter().map(|n| self.cod.position(n).unwrap()).collect();
        let m = cod.size();
        let mut data = vec![0.0; self.data.len()];
        for c in 0..m {
            let t = cod.tuple_of(c);
            let mut src = vec![0; t.len()];
            for (k, &p) in pos.iter().enumerate() {
                src[p] = t[k];
            }
            let s = self.cod.index_of(&src)?;
            for d in 0..self.dom.size() {
                data[d * m + c] = self.data[d * m + s];
            }
        }
        Ok(Morphism { dom: self.dom.clone(), cod, data })
    }

    /// Reorders the domain atoms to `order`.
    pub fn permute_dom(&self, order: &[String]) -> Result<Morphism> {
        let dom = self.dom.select(order)?;
        if dom.atoms().len() != self.dom.atoms().len() {
            return Err(shape("permute_dom needs every domain atom exactly once"));
        }
        let pos: Vec<usize> = order.iter().map(|n| self.dom.position(n).unwrap()).collect();
        let m = self.cod.size();
        let mut data = vec![0.0; self.data.len()];
        for d in 0..dom.size() {
            let t = dom.tuple_of(d);
            let mut src = vec![0; t.len()];
            for (k, &p) in pos.iter().enumerate() {
                src[p] = t[k];
            }
            let s = self.dom.index_of(&src)?;
            data[d * m..(d + 1) * m].copy_from_slice(&self.data[s * m..(s + 1) * m]);
        }
        Ok(Morphism { dom, cod: self.cod.clone(), data })
    }

    /// Sums over codomain atoms not in `keep`; kept atoms stay in codomain order.
    pub fn marginalize(&self, keep: &[String]) -> Result<Morphism> {
        for k in keep {
            if !self.cod.contains(k) {
                return Err(Error::UnknownName(k.clone()));
            }
        }
        let kept: Vec<String> = self.cod.names().into_iter().filter(|n| keep.contains(n)).collect();
        let cod = self.cod.select(&kept)?;
        let pos: Vec<usize> = kept.iter().map(|n| self.cod.position(n).unwrap()).collect();
        let (m, mk) = (self.cod.size(), cod.size());
        let mut data = vec![0.0; self.dom.size() * mk];
        for c in 0..m {
            let t = self.cod.tuple_of(c);
            let sub: Vec<usize> = pos.iter().map(|&p| t[p]).collect();
            let k = cod.index_of(&sub)?;
            for d in 0..self.dom.size() {
                data[d * mk + k] += self.data[d * m + c];
            }
        }
        Ok(Morphism { dom: self.dom.clone(), cod, data })
    }

    /// Per-input total mass (`discard ∘ self`).
    pub fn masses(&self) -> Vec<f64> {
        (0..self.dom.size()).map(|d| self.row(d).iter().sum()).collect()
    }

    /// Per-input renormalisation; inputs of mass at most [`ZERO_COLUMN`] map to zero.
    pub fn normalize(&self) -> Morphism {
        let m = self.cod.size();
        let mut data = self.data.clone();
        for (d, s) in self.masses().into_iter().enumerate() {
            let row = &mut data[d * m..(d + 1) * m];
            if s > ZERO_COLUMN {
                row.iter_mut().for_each(|x| *x /= s);
            } else {
                row.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        Morphism { dom: self.dom.clone(), cod: self.cod.clone(), data }
    }

    /// `f|_Z : dom ⊗ Z → cod \ Z`, zero where `Z` has no support.
    pub fn conditional(&self, on: &[String]) -> Result<Morphism> {
        for z in on {
            if !self.cod.contains(z) {
                return Err(Error::UnknownName(z.clone()));
            }
        }
        let zobj = self.cod.select(on)?;
        let rest = self.cod.without(on);
        let rest_names = rest.names();
        let mut order = rest_names.clone();
        order.extend(on.iter().cloned());
        // joint(y, z | x) with y first, z last
        let joint = self.permute_cod(&order)?;
        let (ny, nz) = (rest.size(), zobj.size());
        let dom = self.dom.tensor(&zobj);
        if dom.atoms().len() != self.dom.atoms().len() + zobj.atoms().len() || dom.names()[self.dom.atoms().len()..] != *on {
            return Err(shape("conditioned atoms collide with domain atom names"));
        }
        let mut data = vec![0.0; self.dom.size() * nz * ny];
        for x in 0..self.dom.size() {
            let row = joint.row(x);
            for z in 0..nz {
                let denom: f64 = (0..ny).map(|y| row[y * nz + z]).sum();
                if denom > ZERO_COLUMN {
                    for y in 0..ny {
                        data[(x * nz + z) * ny + y] = row[y * nz + z] / denom;
                    }
                }
            }
        }
        Ok(Morphism { dom, cod: rest, data })
    }

    /// Conditioning by soft evidence on `on`: `Upper` takes an effect and
    /// normalises after weighting; `Lower` takes a state and mixes the
    /// sharp conditionals outside the normalisation.
    pub fn soft_conditional(&self, on: &[String], evidence: &Morphism, mode: SoftMode) -> Result<Morphism> {
        let zobj = self.cod.select(on)?;
        let rest = self.cod.without(on);
        match mode {
            SoftMode::Upper => {
                if !evidence.is_effect() || !evidence.dom.compatible(&zobj) {
                    return Err(shape(format!("upper evidence must be an effect on {}", zobj)));
                }
                let mut order = rest.names();
                order.extend(on.iter().cloned());
                let joint = self.permute_cod(&order)?;
                let (ny, nz) = (rest.size(), zobj.size());
                let mut data = vec![0.0; self.dom.size() * ny];
                for x in 0..self.dom.size() {
                    let row = joint.row(x);
                    for y in 0..ny {
                        data[x * ny + y] = (0..nz).map(|z| evidence.data[z] * row[y * nz + z]).sum();
                    }
                }
                Ok(Morphism { dom: self.dom.clone(), cod: rest, data }.normalize())
            }
            SoftMode::Lower => {
                if !evidence.is_state() || !evidence.cod.compatible(&zobj) {
                    return Err(shape(format!("lower evidence must be a state on {}", zobj)));
                }
                let cond = self.conditional(on)?;
                let (ny, nz) = (rest.size(), zobj.size());
                let mut data = vec![0.0; self.dom.size() * ny];
                for x in 0..self.dom.size() {
                    for z in 0..nz {
                        let w = evidence.data[z];
                        for y in 0..ny {
                            data[x * ny + y] += w * cond.data[(x * nz + z) * ny + y];
                        }
                    }
                }
                Ok(Morphism { dom: self.dom.clone(), cod: rest, data })
            }
        }
    }

    pub fn classify(&self, tol: f64) -> MorphismClass {
        let masses = self.masses();
        let is_channel = masses.iter().all(|s| (s - 1.0).abs() <= tol);
        let is_partial_channel = masses.iter().all(|s| (s - 1.0).abs() <= tol || *s <= tol);
        let is_deterministic = self.data.iter().all(|x| x.abs() <= tol || (x - 1.0).abs() <= tol)
            && (0..self.dom.size()).all(|d| self.row(d).iter().filter(|x| (*x - 1.0).abs() <= tol).count() <= 1);
        let is_zero = self.data.iter().all(|x| *x <= tol);
        let is_state = self.is_state();
        MorphismClass {
            is_channel,
            is_partial_channel,
            is_deterministic,
            is_normalised_state: is_state && is_channel,
            is_sharp: is_state && is_deterministic && !is_zero,
            is_zero,
        }
    }

    /// For a deterministic morphism, the output index chosen on each input
    /// (`None` on inputs mapped to zero).
    pub fn as_function(&self, tol: f64) -> Result<Vec<Option<usize>>> {
        if !self.classify(tol).is_deterministic {
            return Err(invalid("morphism is not deterministic"));
        }
        Ok((0..self.dom.size())
            .map(|d| self.row(d).iter().position(|x| (*x - 1.0).abs() <= tol))
            .collect())
    }

    /// Random-function dilation: noise ranges over all functions
    /// `dom → cod`, `lambda` is the product of the per-input output
    /// distributions and `f` evaluates the sampled function.
    pub fn functional_dilation(&self, noise_name: &str) -> Result<Dilation> {
        if !self.classify(DEFAULT_TOL).is_channel {
            return Err(invalid("functional dilation needs a channel"));
        }
        if self.classify(DEFAULT_TOL).is_deterministic {
            let f = Morphism {
                dom: self.dom.tensor(&FinObject::unit()),
                cod: self.cod.clone(),
                data: self.data.iter().map(|x| x.round()).collect(),
            };
            return Ok(Dilation { f, noise: FinObject::unit(), lambda: Morphism::scalar(1.0)? });
        }
        let (n, m) = (self.dom.size(), self.cod.size());
        let card = (m as f64).powi(n as i32);
        if card > 1e7 {
            return Err(Error::Budget(format!("dilation noise space of size {} exceeds 1e7", card)));
        }
        let card = card as usize;
        if self.dom.contains(noise_name) {
            return Err(invalid(format!("noise name `{}` clashes with a domain atom", noise_name)));
        }
        let noise = FinObject::atom(noise_name, card);
        // u encodes (u_0, …, u_{n-1}) with u_0 most significant
        let digit = |u: usize, d: usize| (u / m.pow((n - 1 - d) as u32)) % m;
        let lambda_data: Vec<f64> = (0..card).map(|u| (0..n).map(|d| self.get(d, digit(u, d))).product()).collect();
        let lambda = Morphism::state(noise.clone(), lambda_data)?;
        let dom = self.dom.tensor(&noise);
        let mut data = vec![0.0; n * card * m];
        for d in 0..n {
            for u in 0..card {
                data[(d * card + u) * m + digit(u, d)] = 1.0;
            }
        }
        let f = Morphism::new(dom, self.cod.clone(), data)?;
        Ok(Dilation { f, noise, lambda })
    }

    pub fn max_abs_diff(&self, other: &Morphism) -> Result<f64> {
        if !self.dom.compatible(&other.dom) || !self.cod.compatible(&other.cod) {
            return Err(shape(format!(
                "comparing {} → {} with {} → {}",
                self.dom, self.cod, other.dom, other.cod
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Morphism, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Total-variation distance between two states.
    pub fn total_variation(&self, other: &Morphism) -> Result<f64> {
        self.max_abs_diff(other)?;
        Ok(0.5 * self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    pub fn scale(&self, k: f64) -> Morphism {
        Morphism { dom: self.dom.clone(), cod: self.cod.clone(), data: self.data.iter().map(|x| x * k).collect() }
    }

    /// Factor over `dom_labels ++ cod_labels`.
    pub fn to_factor(&self, dom_labels: &[String], cod_labels: &[String]) -> Result<Factor> {
        if dom_labels.len() != self.dom.atoms().len() || cod_labels.len() != self.cod.atoms().len() {
            return Err(shape("label count does not match atom count"));
        }
        let mut vars = dom_labels.to_vec();
        vars.extend(cod_labels.iter().cloned());
        let mut cards = self.dom.cards();
        cards.extend(self.cod.cards());
        Factor::new(vars, cards, self.data.clone())
    }

    /// Builds `dom → cod` from a factor; atom names are the factor's
    /// variables. A label in both dom and cod denotes an identity wire.
    pub fn from_factor(f: &Factor, dom: &FinObject, cod: &FinObject) -> Result<Morphism> {
        Self::from_fn(dom.clone(), cod.clone(), |d, c| {
            let mut asg = std::collections::BTreeMap::new();
            for (a, v) in dom.atoms().iter().zip(d) {
                asg.insert(a.name.clone(), *v);
            }
            for (a, v) in cod.atoms().iter().zip(c) {
                if let Some(prev) = asg.insert(a.name.clone(), *v) {
                    if prev != *v {
                        return 0.0;
                    }
                }
            }
            f.at(&asg)
        })
    }
}

/// `g ∘ f`. Codomain of `f` and domain of `g` must agree in cardinalities.
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    if !f.cod.compatible(&g.dom) {
        return Err(shape(format!("cannot compose {} → {} with {} → {}", f.dom, f.cod, g.dom, g.cod)));
    }
    let (n, k, m) = (f.dom.size(), f.cod.size(), g.cod.size());
    let mut data = vec![0.0; n * m];
    for x in 0..n {
        for y in 0..k {
            let a = f.data[x * k + y];
            if a == 0.0 {
                continue;
            }
            for z in 0..m {
                data[x * m + z] += a * g.data[y * m + z];
            }
        }
    }
    Ok(Morphism { dom: f.dom.clone(), cod: g.cod.clone(), data })
}

pub fn tensor(f: &Morphism, g: &Morphism) -> Morphism {
    f.tensor(g)
}

/// Contracts named morphisms: each entry gives the morphism with labels
/// for its domain and codomain atoms. The result maps `inputs` to
/// `outputs`; labels shared between entries are copied, others summed.
pub fn contract_named(parts: &[(&Morphism, Vec<String>, Vec<String>)], inputs: &FinObject, outputs: &FinObject) -> Result<Morphism> {
    let mut factors = Vec::with_capacity(parts.len());
    for (m, d, c) in parts {
        factors.push(m.to_factor(d, c)?);
    }
    let mut keep: Vec<String> = inputs.names();
    for n in outputs.names() {
        if !keep.contains(&n) {
            keep.push(n);
        }
    }
    for a in inputs.atoms().iter().chain(outputs.atoms()) {
        factors.push(Factor::new(vec![a.name.clone()], vec![a.card], vec![1.0; a.card])?);
    }
    let f = contract(factors, &keep)?;
    Morphism::from_factor(&f, inputs, outputs)
}

impl Atom {
    pub fn object(&self) -> FinObject {
        FinObject::atom(self.name.clone(), self.card)
    }
}
