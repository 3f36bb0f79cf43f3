//! Structural cost models over merged networks.
//!
//! Area and power are plain sums of the back-annotated per-vertex
//! costs. The critical path is the larger of the worst input network
//! delay (`cp_static`) and the delay of the longest combinatorial sbox
//! cascade, modeled as `f(b) * ln(n) + g(b)` for an `n`-deep cascade
//! of `b`-bit sboxes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::Endpoint;
use crate::merge::MultiDataflow;

use super::annotate::{ComponentAnnotation, TechnologyModel};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("component type `{0}` is not annotated")]
    MissingAnnotation(String),
    #[error("technology table has no row for bit width {0}")]
    MissingTechRow(u32),
}

/// Static/dynamic/total power, all in the annotation's power unit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub static_power: f64,
    pub dynamic_power: f64,
    pub total: f64,
}

impl PowerBreakdown {
    pub fn add(&self, other: &PowerBreakdown) -> PowerBreakdown {
        PowerBreakdown {
            static_power: self.static_power + other.static_power,
            dynamic_power: self.dynamic_power + other.dynamic_power,
            total: self.total + other.total,
        }
    }
}

/// Sum of annotated areas over every vertex, sboxes included.
pub fn cost_area(m: &MultiDataflow, ann: &ComponentAnnotation) -> Result<f64, CostError> {
    let mut total = 0.0;
    for a in &m.base.actors {
        let c = ann
            .get(&a.component_type)
            .ok_or_else(|| CostError::MissingAnnotation(a.component_type.clone()))?;
        total += c.area;
    }
    Ok(total)
}

/// Sum of annotated powers over every vertex, split per contribution.
pub fn cost_power(m: &MultiDataflow, ann: &ComponentAnnotation) -> Result<PowerBreakdown, CostError> {
    let mut out = PowerBreakdown::default();
    for a in &m.base.actors {
        let c = ann
            .get(&a.component_type)
            .ok_or_else(|| CostError::MissingAnnotation(a.component_type.clone()))?;
        out.static_power += c.power_static;
        out.dynamic_power += c.power_dynamic;
    }
    out.total = out.static_power + out.dynamic_power;
    Ok(out)
}

/// Length of the longest chain of sboxes connected by depth-0 channels
/// (combinatorial continuity); 0 when the network has no sboxes.
pub fn longest_sbox_cascade(m: &MultiDataflow) -> usize {
    let sboxes: Vec<&str> = m
        .base
        .sbox_actors()
        .map(|a| a.instance_name.as_str())
        .collect();
    if sboxes.is_empty() {
        return 0;
    }
    let index: BTreeMap<&str, usize> = sboxes.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); sboxes.len()];
    let mut indegree = vec![0usize; sboxes.len()];
    for c in &m.base.channels {
        if c.fifo_depth != 0 {
            continue;
        }
        let (Some(sa), Some(ka)) = (c.source.actor_name(), c.sink.actor_name()) else { continue };
        if let Endpoint::ActorPort { port, .. } = &c.sink {
            if port == "sel" {
                continue;
            }
        }
        if let (Some(&i), Some(&j)) = (index.get(sa), index.get(ka)) {
            succ[i].push(j);
            indegree[j] += 1;
        }
    }

    // Longest path over the cascade DAG. A combinatorial sbox cycle
    // cannot come out of merging; if one appears in a hand-built
    // network the count of sboxes bounds any simple path.
    let mut order: Vec<usize> = Vec::with_capacity(sboxes.len());
    let mut queue: Vec<usize> = (0..sboxes.len()).filter(|&i| indegree[i] == 0).collect();
    queue.sort();
    while let Some(i) = queue.pop() {
        order.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push(j);
            }
        }
    }
    if order.len() != sboxes.len() {
        return sboxes.len();
    }
    let mut depth = vec![1usize; sboxes.len()];
    for &i in order.iter().rev() {
        for &j in &succ[i] {
            depth[i] = depth[i].max(1 + depth[j]);
        }
    }
    depth.into_iter().max().unwrap_or(0)
}

/// Critical path and operating frequency of a merged network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPath {
    /// Worst back-annotated input network delay, ns.
    pub cp_static: f64,
    /// Delay of the longest sbox cascade, ns; 0 without a cascade.
    pub cp_cascade: f64,
    /// max(cp_static, cp_cascade), ns.
    pub cp: f64,
    /// 1000 / cp, MHz; infinite for an all-zero delay model.
    pub freq_mhz: f64,
    pub cascade_len: usize,
}

/// Evaluate the critical-path model. `input_cps` are the back-annotated
/// critical paths of the group's input networks.
pub fn cost_critical_path(
    m: &MultiDataflow,
    input_cps: &[f64],
    tech: &TechnologyModel,
) -> Result<CriticalPath, CostError> {
    let cp_static = input_cps.iter().copied().fold(0.0f64, f64::max);
    let cascade_len = longest_sbox_cascade(m);
    let cp_cascade = if cascade_len >= 1 {
        let width = sbox_bus_width(m);
        let (f, g) = tech.lookup(width).ok_or(CostError::MissingTechRow(width))?;
        f * (cascade_len as f64).ln() + g
    } else {
        0.0
    };
    let cp = cp_static.max(cp_cascade);
    let freq_mhz = if cp > 0.0 { 1000.0 / cp } else { f64::INFINITY };
    Ok(CriticalPath { cp_static, cp_cascade, cp, freq_mhz, cascade_len })
}

/// Data width governing the cascade delay: the widest sbox data port.
fn sbox_bus_width(m: &MultiDataflow) -> u32 {
    m.base
        .sbox_actors()
        .flat_map(|a| a.ports.iter())
        .filter(|p| p.name != "sel")
        .map(|p| p.width)
        .max()
        .unwrap_or(0)
}
