//! Clock gating plans over logic regions.
//!
//! One gating cell per gateable region: an AND cell on the clock for
//! ASIC targets, a BUFGCE global buffer for FPGA targets. The enable
//! of a region is the OR of the configuration-select lines in its
//! signature; the always-on region keeps the free-running clock.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::regions::{GatingMode, LogicRegionPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatingTarget {
    Asic,
    Fpga,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatingCellKind {
    ClockAnd,
    Bufg,
}

/// One clock gate: drives `clk_r<region>` for the region's members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatingCell {
    pub region_id: u32,
    pub kind: GatingCellKind,
    pub instance: String,
    /// Configurations in which the gated clock runs.
    pub enable_configs: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatingPlan {
    pub target: GatingTarget,
    pub cells: Vec<GatingCell>,
    /// Region left on the free-running clock, if any.
    pub always_on_region: Option<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GatingError {
    #[error("clock gating plan requires a clock-gating partition")]
    WrongMode,
    #[error("{regions} gateable regions exceed the device budget of {budget} clock buffers")]
    BudgetExceeded { regions: usize, budget: usize },
    #[error("fpga clock gating needs a buffer budget")]
    MissingBudget,
}

/// Plan one gating cell per gateable region. FPGA targets check the
/// global-buffer budget; run the region reduction first when over it.
pub fn plan_clock_gating(
    p: &LogicRegionPartition,
    target: GatingTarget,
    bufg_budget: Option<usize>,
) -> Result<GatingPlan, GatingError> {
    if p.mode != GatingMode::ClockGating {
        return Err(GatingError::WrongMode);
    }
    let gateable: Vec<_> = p.gateable().collect();
    let kind = match target {
        GatingTarget::Asic => GatingCellKind::ClockAnd,
        GatingTarget::Fpga => {
            let budget = bufg_budget.ok_or(GatingError::MissingBudget)?;
            if gateable.len() > budget {
                return Err(GatingError::BudgetExceeded { regions: gateable.len(), budget });
            }
            GatingCellKind::Bufg
        }
    };
    let prefix = match kind {
        GatingCellKind::ClockAnd => "cg_and",
        GatingCellKind::Bufg => "cg_bufg",
    };
    let cells = gateable
        .iter()
        .map(|r| GatingCell {
            region_id: r.id,
            kind,
            instance: format!("{prefix}_r{}", r.id),
            enable_configs: (0..p.config_count as u32)
                .filter(|c| r.signature & (1 << c) != 0)
                .collect(),
        })
        .collect();
    Ok(GatingPlan {
        target,
        cells,
        always_on_region: p.always_on().map(|r| r.id),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::regions::LogicRegion;

    fn three_region_partition(mode: GatingMode) -> LogicRegionPartition {
        LogicRegionPartition {
            mode,
            config_count: 2,
            regions: vec![
                LogicRegion { id: 0, members: vec!["A".into()], signature: 0b11, always_on: true },
                LogicRegion { id: 1, members: vec!["B".into()], signature: 0b01, always_on: false },
                LogicRegion { id: 2, members: vec!["C".into()], signature: 0b10, always_on: false },
            ],
        }
    }

    #[test]
    fn asic_plan_uses_and_cells_and_skips_always_on() {
        let p = three_region_partition(GatingMode::ClockGating);
        let plan = plan_clock_gating(&p, GatingTarget::Asic, None).unwrap();
        assert_eq!(plan.cells.len(), 2);
        assert!(plan.cells.iter().all(|c| c.kind == GatingCellKind::ClockAnd));
        assert_eq!(plan.always_on_region, Some(0));
        assert_eq!(plan.cells[0].enable_configs, vec![0]);
        assert_eq!(plan.cells[1].enable_configs, vec![1]);
    }

    #[test]
    fn fpga_plan_uses_bufg_cells_within_budget() {
        let p = three_region_partition(GatingMode::ClockGating);
        let plan = plan_clock_gating(&p, GatingTarget::Fpga, Some(32)).unwrap();
        assert_eq!(plan.cells.len(), 2);
        assert!(plan.cells.iter().all(|c| c.kind == GatingCellKind::Bufg));
    }

    #[test]
    fn fpga_over_budget_is_rejected() {
        let p = three_region_partition(GatingMode::ClockGating);
        assert_eq!(
            plan_clock_gating(&p, GatingTarget::Fpga, Some(1)),
            Err(GatingError::BudgetExceeded { regions: 2, budget: 1 })
        );
    }

    #[test]
    fn forced_single_region_budget() {
        use crate::power::regions::reduce_regions;
        let p = three_region_partition(GatingMode::ClockGating);
        let reduced = reduce_regions(&p, 1);
        let plan = plan_clock_gating(&reduced, GatingTarget::Fpga, Some(1)).unwrap();
        assert_eq!(plan.cells.len(), 1);
        assert_eq!(plan.cells[0].enable_configs, vec![0, 1]);
    }

    #[test]
    fn power_gating_partition_is_rejected() {
        let p = three_region_partition(GatingMode::PowerGating);
        assert_eq!(
            plan_clock_gating(&p, GatingTarget::Asic, None),
            Err(GatingError::WrongMode)
        );
    }
}
