//! Causal-effect identification from interventional data tables.

mod expr;
mod comb;
mod witness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::intervention::{apply, open_at, Intervention};
use crate::model::CausalModel;
use crate::semantics::Morphism;

pub use expr::IdentifyingExpression;
pub use comb::{general_eta_truth, c_component_expression, c_component_identify, c_component_partition, validate_partition, EtaShape, CComponentPartition};
pub use witness::{search_witness, target_distance, target_channel, unconfounded_twin, Witness, WitnessTarget};

/// `P(O\X ; do(X))` for a family of do-sets `X`, each stored as a channel
/// from `X` (name order) to the rest (name order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PStarTables {
    pub cards: BTreeMap<String, usize>,
    pub tables: BTreeMap<Vec<String>, Morphism>,
}

fn key(do_set: &[String]) -> Vec<String> {
    let mut k = do_set.to_vec();
    k.sort();
    k.dedup();
    k
}

impl PStarTables {
    pub fn new(cards: BTreeMap<String, usize>) -> Self {
        PStarTables { cards, tables: BTreeMap::new() }
    }

    pub fn roster(&self) -> Vec<String> {
        self.cards.keys().cloned().collect()
    }

    pub fn insert(&mut self, do_set: &[String], table: Morphism) -> Result<()> {
        let k = key(do_set);
        let rest: Vec<String> = self.roster().into_iter().filter(|v| !k.contains(v)).collect();
        if table.dom().names() != k || table.cod().names() != rest {
            return Err(invalid(format!("table for do({}) must map {:?} to {:?}", k.join(","), k, rest)));
        }
        for a in table.dom().atoms().iter().chain(table.cod().atoms()) {
            if self.cards.get(&a.name) != Some(&a.card) {
                return Err(invalid(format!("atom `{}` disagrees with the roster", a.name)));
            }
        }
        self.tables.insert(k, table);
        Ok(())
    }

    pub fn get(&self, do_set: &[String]) -> Result<&Morphism> {
        self.tables
            .get(&key(do_set))
            .ok_or_else(|| Error::Invalid(format!("no data table for do({})", key(do_set).join(","))))
    }

    pub fn observational(&self) -> Result<&Morphism> {
        self.get(&[])
    }

    /// Tables for the given do-sets computed from a closed model whose
    /// variables include the roster `observed`.
    pub fn from_model_subsets(m: &CausalModel, observed: &[String], do_sets: &[Vec<String>]) -> Result<Self> {
        let cards: BTreeMap<String, usize> = observed.iter().map(|v| Ok((v.clone(), m.card(v)?))).collect::<Result<_>>()?;
        let mut t = PStarTables::new(cards);
        for s in do_sets {
            let k = key(s);
            let rest: Vec<String> = t.roster().into_iter().filter(|v| !k.contains(v)).collect();
            let opened = open_at(&m.with_outputs(&rest)?, &k)?;
            let ch = opened.channel_of()?.permute_dom(&k)?;
            t.insert(&k, ch)?;
        }
        Ok(t)
    }

    /// Every do-set over `observed` (at most 12 variables).
    pub fn from_model(m: &CausalModel, observed: &[String]) -> Result<Self> {
        if observed.len() > 12 {
            return Err(Error::Budget(format!("{} observed variables give too many do-sets", observed.len())));
        }
        let n = observed.len();
        let sets: Vec<Vec<String>> =
            (0..1usize << n).map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| observed[i].clone()).collect()).collect();
        Self::from_model_subsets(m, observed, &sets)
    }
}

/// Post-intervention output state by mechanism surgery.
pub fn truncated_factorization(m: &CausalModel, doset: &BTreeMap<String, usize>) -> Result<Morphism> {
    let mut cur = m.clone();
    for (v, x) in doset {
        cur = apply(&cur, &Intervention::Do { var: v.clone(), value: *x })?;
    }
    cur.output_state()
}
