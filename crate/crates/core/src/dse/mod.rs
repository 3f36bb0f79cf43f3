//! Structural profiler: cost models and merge-partition exploration.

mod annotate;
mod cost;
mod explore;
mod partitions;

pub use annotate::{AnnotationError, ComponentAnnotation, ComponentCosts, TechRow, TechnologyModel};
pub use cost::{
    cost_area, cost_critical_path, cost_power, longest_sbox_cascade, CostError, CriticalPath,
    PowerBreakdown,
};
pub use explore::{
    explore, network_critical_path, DseReport, ExploreError, ExploreLimits, GroupSummary,
    MergeCandidate, RankKey,
};
pub use partitions::{bell_number, partition_blocks, set_partitions};
