//! Datapath merging: fold N networks into one reconfigurable substrate.

mod engine;
mod fifo;
mod moreano;
mod multi;

pub use engine::{
    merge_all, merge_pair, ActorEquality, MergeAlgorithm, MergeError, MergeOrder, MergePolicy,
};
pub use fifo::place_fifos;
pub use moreano::{build_moreano_mapping, Correspondence};
pub use multi::{
    mask_bit, mask_contains, ConfigMask, ConfigurationTable, CtabRow, MultiDataflow, Provenance,
};
