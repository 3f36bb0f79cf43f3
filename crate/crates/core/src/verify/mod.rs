//! Correctness oracles for merged networks and emitted HDL.

mod extract;
mod iso;

pub use extract::{extract_configuration, ExtractError};
pub use iso::{isomorphic_labeled, IsoWitness};
