//! Causal models as interpreted string diagrams over finite stochastic
//! matrices: interventions, d-separation, causal-effect identification and
//! counterfactual simplification/identification.

pub mod error;
pub mod catalog;
pub mod cli;
pub mod counterfactual;
pub mod diagram;
pub mod graph;
pub mod identify;
pub mod intervention;
pub mod io;
pub mod model;
pub mod random;
pub mod semantics;

pub use error::{Error, Result};
