//! Dynamic power management: logic regions, gating plans, power intent.

mod gating;
mod intent;
mod regions;

pub use gating::{
    plan_clock_gating, GatingCell, GatingCellKind, GatingError, GatingPlan, GatingTarget,
};
pub use intent::{emit_power_intent, parse_power_intent, IntentError, PowerDomain};
pub use regions::{
    identify_logic_regions, reduce_regions, GatingMode, LogicRegion, LogicRegionPartition,
};
