//! Finite nonnegative matrices: objects, morphisms, the copy/discard
//! structure, normalisation and conditioning.

mod factor;
mod morphism;
mod object;

pub use factor::{contract, Factor};
pub use morphism::{
    compose, contract_named, tensor, Dilation, GeneratorKind, Morphism, MorphismClass, SoftMode, DEFAULT_TOL,
    ZERO_COLUMN,
};
pub use object::{Atom, FinObject};
