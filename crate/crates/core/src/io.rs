//! JSON file schemas and CSV sample ingestion.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::counterfactual::CounterfactualTerms;
use crate::error::{invalid, Error, Result};
use crate::graph::{Admg, Dag};
use crate::identify::{PStarTables, Witness};
use crate::intervention::Intervention;
use crate::model::{fcm_from_model, CausalModel, Fcm, FcmEntry, Mechanism};
use crate::semantics::{Atom, FinObject, Morphism};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default = "two")]
    pub cardinality: usize,
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub target: String,
    #[serde(default)]
    pub parents: Vec<String>,
    /// row-major, one row per parent tuple (last parent fastest)
    pub cpt: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcmBlock {
    pub functions: Vec<FcmEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub variables: Vec<VariableSpec>,
    pub mechanisms: Vec<MechanismSpec>,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fcm: Option<FcmBlock>,
}

impl ModelFile {
    pub fn cards(&self) -> BTreeMap<String, usize> {
        self.variables.iter().map(|v| (v.name.clone(), v.cardinality)).collect()
    }

    /// Every invariant violation, empty when the file describes a model.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let cards = self.cards();
        if cards.len() != self.variables.len() {
            out.push("variable names repeat".to_string());
        }
        for v in &self.variables {
            if v.cardinality == 0 {
                out.push(format!("`{}` has cardinality 0", v.name));
            }
        }
        let mut targets = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for m in &self.mechanisms {
            if !targets.insert(m.target.clone()) {
                out.push(format!("`{}` has two mechanisms", m.target));
            }
            let mut resolved = true;
            for n in m.parents.iter().chain(std::iter::once(&m.target)) {
                if !cards.contains_key(n) {
                    out.push(format!("unknown variable `{}` in the mechanism of `{}`", n, m.target));
                    resolved = false;
                }
            }
            if !resolved {
                continue;
            }
            for p in &m.parents {
                edges.insert((p.clone(), m.target.clone()));
            }
            let rows: usize = m.parents.iter().map(|p| cards[p]).product();
            let card = cards[&m.target];
            if m.cpt.len() != rows * card {
                out.push(format!("cpt of `{}` has {} entries, expected {}", m.target, m.cpt.len(), rows * card));
                continue;
            }
            for (r, row) in m.cpt.chunks(card).enumerate() {
                if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    out.push(format!("cpt of `{}` row {} has a negative or non-finite entry", m.target, r));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > tol {
                    out.push(format!("cpt of `{}` row {} sums to {}", m.target, r, s));
                }
            }
        }
        for v in cards.keys() {
            let is_input = self.inputs.contains(v);
            if is_input && targets.contains(v) {
                out.push(format!("input `{}` also has a mechanism", v));
            }
            if !is_input && !targets.contains(v) {
                out.push(format!("`{}` has neither a mechanism nor is an input", v));
            }
        }
        for n in self.inputs.iter().chain(&self.outputs) {
            if !cards.contains_key(n) {
                out.push(format!("unknown variable `{}` in inputs/outputs", n));
            }
        }
        if let Err(e) = Dag::from_parts(cards.keys().cloned().collect(), edges) {
            out.push(e.to_string());
        }
        if let Some(block) = &self.fcm {
            if let Err(e) = Fcm::new(cards.clone(), block.functions.clone(), self.outputs.clone()) {
                out.push(format!("fcm block: {}", e));
            }
        }
        out
    }

    pub fn to_model(&self) -> Result<CausalModel> {
        let cards = self.cards();
        let mut mechs = Vec::new();
        for m in &self.mechanisms {
            let card = |n: &String| cards.get(n).copied().ok_or_else(|| Error::UnknownName(n.clone()));
            let dom = FinObject::new(m.parents.iter().map(|p| Ok(Atom::new(p.clone(), card(p)?))).collect::<Result<_>>()?)?;
            let cod = FinObject::atom(m.target.clone(), card(&m.target)?);
            mechs.push(Mechanism::new(m.target.clone(), m.parents.clone(), Morphism::new(dom, cod, m.cpt.clone())?));
        }
        CausalModel::from_mechanisms(&cards, mechs, &self.inputs, &self.outputs)
    }

    /// The explicit functional model, or the canonical dilation of the mechanisms.
    pub fn to_fcm(&self) -> Result<Fcm> {
        match &self.fcm {
            Some(b) => Fcm::new(self.cards(), b.functions.clone(), self.outputs.clone()),
            None => fcm_from_model(&self.to_model()?),
        }
    }

    pub fn from_model(m: &CausalModel) -> Self {
        ModelFile {
            variables: m.cards().iter().map(|(n, c)| VariableSpec { name: n.clone(), cardinality: *c }).collect(),
            mechanisms: m
                .mechanisms()
                .into_iter()
                .map(|x| MechanismSpec { target: x.target, parents: x.parents, cpt: x.kernel.data().to_vec() })
                .collect(),
            inputs: m.inputs().to_vec(),
            outputs: m.outputs().to_vec(),
            fcm: None,
        }
    }

    /// Mechanisms are the collapsed channels; the block keeps the functions.
    pub fn from_fcm(f: &Fcm) -> Result<Self> {
        let mut file = Self::from_model(&crate::model::model_from_fcm(f)?);
        file.fcm = Some(FcmBlock { functions: f.entries().to_vec() });
        Ok(file)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmgFile {
    pub vertices: Vec<VariableSpec>,
    #[serde(default)]
    pub directed: Vec<(String, String)>,
    #[serde(default)]
    pub bidirected: Vec<(String, String)>,
}

impl AdmgFile {
    pub fn to_admg(&self) -> Result<Admg> {
        let names: Vec<&str> = self.vertices.iter().map(|v| v.name.as_str()).collect();
        let d: Vec<(&str, &str)> = self.directed.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let b: Vec<(&str, &str)> = self.bidirected.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Admg::new(&names, &d, &b)
    }

    pub fn cards(&self) -> BTreeMap<String, usize> {
        self.vertices.iter().map(|v| (v.name.clone(), v.cardinality)).collect()
    }

    pub fn from_admg(a: &Admg, cards: &BTreeMap<String, usize>) -> Self {
        AdmgFile {
            vertices: a
                .vertices()
                .iter()
                .map(|v| VariableSpec { name: v.clone(), cardinality: cards.get(v).copied().unwrap_or(2) })
                .collect(),
            directed: a.directed().iter().cloned().collect(),
            bidirected: a.bidirected().iter().cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryFile {
    /// is `y` d-separated from `z` given `w`
    Dsep { y: Vec<String>, z: Vec<String>, #[serde(default)] w: Vec<String> },
    /// is `x` independent of `y` given `z` in the output state
    Ci { x: Vec<String>, y: Vec<String>, #[serde(default)] z: Vec<String> },
    Intervene(Vec<Intervention>),
    /// `do(x = value)` when `eta` is absent, otherwise `eta : context ⊗ x → x`;
    /// the result is conditioned on `condition_on`.
    EffectId {
        x: String,
        #[serde(default)]
        value: Option<usize>,
        #[serde(default)]
        context: Vec<String>,
        #[serde(default)]
        eta: Option<Morphism>,
        #[serde(default)]
        condition_on: Vec<String>,
    },
    Cf(CounterfactualTerms),
    CfEval(CounterfactualTerms),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    #[serde(rename = "do")]
    pub do_set: Vec<String>,
    pub table: Morphism,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TablesFile {
    pub cards: BTreeMap<String, usize>,
    pub tables: Vec<TableEntry>,
}

impl TablesFile {
    pub fn to_tables(&self) -> Result<PStarTables> {
        let mut t = PStarTables::new(self.cards.clone());
        for e in &self.tables {
            t.insert(&e.do_set, e.table.clone())?;
        }
        Ok(t)
    }

    pub fn from_tables(t: &PStarTables) -> Self {
        TablesFile {
            cards: t.cards.clone(),
            tables: t.tables.iter().map(|(k, v)| TableEntry { do_set: k.clone(), table: v.clone() }).collect(),
        }
    }
}

/// Everything a command may need, in one file; each piece is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admg: Option<AdmgFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<QueryFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<TablesFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Bundle {
    pub fn named(name: impl Into<String>) -> Self {
        Bundle { name: name.into(), description: None, model: None, admg: None, query: None, tables: None, witness: None }
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Integer-coded samples with a header row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Samples {
    pub header: Vec<String>,
    pub rows: Vec<Vec<usize>>,
}

impl Samples {
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.parse::<usize>().map_err(|_| invalid(format!("row {}: `{}` is not a value index", i + 1, f))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Samples { header, rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(std::fs::File::open(path)?)
    }

    /// Largest value plus one, per column.
    pub fn inferred_cards(&self) -> BTreeMap<String, usize> {
        self.header
            .iter()
            .enumerate()
            .map(|(j, h)| (h.clone(), self.rows.iter().map(|r| r[j] + 1).max().unwrap_or(1)))
            .collect()
    }

    /// Frequency table over `cards` (name order), conditioned on `do_set`.
    pub fn table(&self, cards: &BTreeMap<String, usize>, do_set: &[String]) -> Result<Morphism> {
        if self.rows.is_empty() {
            return Err(invalid("no samples"));
        }
        let cod = FinObject::new(cards.iter().map(|(n, c)| Atom::new(n.clone(), *c)).collect())?;
        let cols: Vec<usize> = cards
            .keys()
            .map(|n| self.header.iter().position(|h| h == n).ok_or_else(|| Error::UnknownName(n.clone())))
            .collect::<Result<_>>()?;
        let mut counts = vec![0.0; cod.size()];
        for row in &self.rows {
            let tuple: Vec<usize> = cols.iter().map(|&j| row[j]).collect();
            counts[cod.index_of(&tuple)?] += 1.0;
        }
        let n = self.rows.len() as f64;
        let joint = Morphism::state(cod, counts.into_iter().map(|c| c / n).collect())?;
        let mut on = do_set.to_vec();
        on.sort();
        if on.is_empty() {
            Ok(joint)
        } else {
            joint.conditional(&on)
        }
    }
}

/// Tables from observational samples plus per-do-set samples.
pub fn ingest(observational: &Samples, interventional: &[(Vec<String>, Samples)], cards: Option<&BTreeMap<String, usize>>) -> Result<PStarTables> {
    let cards = match cards {
        Some(c) => c.clone(),
        None => {
            let mut c = observational.inferred_cards();
            for (_, s) in interventional {
                for (k, v) in s.inferred_cards() {
                    let e = c.entry(k).or_insert(v);
                    *e = (*e).max(v);
                }
            }
            c
        }
    };
    let mut t = PStarTables::new(cards.clone());
    t.insert(&[], observational.table(&cards, &[])?)?;
    for (do_set, s) in interventional {
        t.insert(do_set, s.table(&cards, do_set)?)?;
    }
    Ok(t)
}
