//! Logic-region identification and budget-driven reduction.
//!
//! A logic region groups elements that are active in exactly the same
//! configurations; the activity signature is the provenance bit
//! vector. Clock gating regions cover the actors only (sboxes are
//! combinatorial and keep their clockless paths); power gating regions
//! include the sboxes.

use serde::{Deserialize, Serialize};

use crate::ir::ActorKind;
use crate::merge::{ConfigMask, ConfigurationTable, MultiDataflow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatingMode {
    ClockGating,
    PowerGating,
}

/// One group of elements sharing an activity signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicRegion {
    pub id: u32,
    /// Actor instance names, sorted.
    pub members: Vec<String>,
    /// Bit `c` set: members are active in configuration `c`.
    pub signature: ConfigMask,
    /// Identified as active in every configuration; never gated and
    /// exempt from cell budgets. Fixed at identification time: a
    /// reduction that happens to OR signatures up to all-ones still
    /// leaves its merged region gateable.
    pub always_on: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicRegionPartition {
    pub mode: GatingMode,
    pub config_count: usize,
    /// Disjoint regions covering every eligible element; the all-ones
    /// region (if any) first, then descending by signature.
    pub regions: Vec<LogicRegion>,
}

impl LogicRegionPartition {
    pub fn full_mask(&self) -> ConfigMask {
        if self.config_count >= 64 {
            u64::MAX
        } else {
            (1u64 << self.config_count) - 1
        }
    }

    /// The region active in every configuration, if one exists.
    pub fn always_on(&self) -> Option<&LogicRegion> {
        self.regions.iter().find(|r| r.always_on)
    }

    /// Regions under gating control (a cell each).
    pub fn gateable(&self) -> impl Iterator<Item = &LogicRegion> {
        self.regions.iter().filter(|r| !r.always_on)
    }
}

/// Group the eligible elements of a merged network into minimal
/// logic regions: one region per distinct activity signature.
pub fn identify_logic_regions(
    m: &MultiDataflow,
    _ctab: &ConfigurationTable,
    mode: GatingMode,
) -> LogicRegionPartition {
    let mut by_signature: std::collections::BTreeMap<ConfigMask, Vec<String>> =
        std::collections::BTreeMap::new();

    for actor in &m.base.actors {
        if actor.kind.is_sbox() && mode == GatingMode::ClockGating {
            continue;
        }
        let signature = if matches!(actor.kind, ActorKind::Fanout) {
            // A fanout copies its driving channel; it is active exactly
            // when data flows into it.
            actor
                .input_ports()
                .next()
                .map(|p| {
                    m.channel_mask(&crate::ir::Endpoint::actor(&actor.instance_name, &p.name))
                })
                .filter(|mask| *mask != 0)
                .unwrap_or_else(|| m.actor_mask(&actor.instance_name))
        } else {
            m.actor_mask(&actor.instance_name)
        };
        if signature == 0 {
            continue;
        }
        by_signature.entry(signature).or_default().push(actor.instance_name.clone());
    }

    let full = if m.config_count() >= 64 { u64::MAX } else { (1u64 << m.config_count()) - 1 };
    let mut regions: Vec<LogicRegion> = by_signature
        .into_iter()
        .map(|(signature, mut members)| {
            members.sort();
            LogicRegion { id: 0, members, signature, always_on: signature == full }
        })
        .collect();
    regions.sort_by(|a, b| {
        b.always_on
            .cmp(&a.always_on)
            .then(b.signature.cmp(&a.signature))
            .then_with(|| a.members.cmp(&b.members))
    });
    for (i, r) in regions.iter_mut().enumerate() {
        r.id = i as u32;
    }
    LogicRegionPartition { mode, config_count: m.config_count(), regions }
}

/// Reduce the gateable region count to `budget` by repeatedly merging
/// the pair with the least added waste. Merging ORs signatures, so a
/// member is never gated off in a configuration where it was active;
/// the always-on region does not count against the budget.
pub fn reduce_regions(p: &LogicRegionPartition, budget: usize) -> LogicRegionPartition {
    assert!(budget >= 1, "budget must be positive");
    let mut out = p.clone();

    loop {
        let gateable: Vec<usize> = out
            .regions
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.always_on)
            .map(|(i, _)| i)
            .collect();
        if gateable.len() <= budget {
            break;
        }

        // Added waste of merging i and j: members of one region become
        // enabled in the configurations only the other one needed.
        let mut best: Option<(u64, u32, (String, String), usize, usize)> = None;
        for (a_pos, &i) in gateable.iter().enumerate() {
            for &j in &gateable[a_pos + 1..] {
                let (ri, rj) = (&out.regions[i], &out.regions[j]);
                let waste = ri.members.len() as u64
                    * (rj.signature & !ri.signature).count_ones() as u64
                    + rj.members.len() as u64 * (ri.signature & !rj.signature).count_ones() as u64;
                let hamming = (ri.signature ^ rj.signature).count_ones();
                let names = (ri.members[0].clone(), rj.members[0].clone());
                let cand = (waste, hamming, names, i, j);
                if best
                    .as_ref()
                    .map(|b| (cand.0, cand.1, &cand.2) < (b.0, b.1, &b.2))
                    .unwrap_or(true)
                {
                    best = Some(cand);
                }
            }
        }
        let (_, _, _, i, j) = best.expect("more gateable regions than budget");
        let absorbed = out.regions.remove(j);
        let target = &mut out.regions[i];
        target.signature |= absorbed.signature;
        target.members.extend(absorbed.members);
        target.members.sort();
    }

    for (i, r) in out.regions.iter_mut().enumerate() {
        r.id = i as u32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{flatten, Actor, ActorPort, Channel, DataflowNetwork, Endpoint, NetworkPort, PortDirection};
    use crate::merge::{merge_all, MergePolicy};

    fn port(dir: PortDirection, name: &str) -> ActorPort {
        ActorPort { direction: dir, name: name.into(), width: 32, open: false }
    }

    fn io(dir: PortDirection, name: &str) -> NetworkPort {
        NetworkPort { direction: dir, name: name.into(), width: 32 }
    }

    fn unit(name: &str, ty: &str) -> Actor {
        Actor::atomic(name, ty, vec![port(PortDirection::In, "in"), port(PortDirection::Out, "out")])
    }

    fn two_config_multi() -> (MultiDataflow, ConfigurationTable) {
        // a: in -> A -> B -> out_a ; b: in -> A -> C -> out_b
        // A serves both, B only a, C only b.
        let mut a = DataflowNetwork::new("a");
        a.io_ports = vec![io(PortDirection::In, "in"), io(PortDirection::Out, "out_a")];
        a.actors = vec![unit("A", "ta"), unit("B", "tb")];
        a.channels = vec![
            Channel { source: Endpoint::network("in"), sink: Endpoint::actor("A", "in"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("A", "out"), sink: Endpoint::actor("B", "in"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("B", "out"), sink: Endpoint::network("out_a"), fifo_depth: 1 },
        ];
        let mut b = DataflowNetwork::new("b");
        b.io_ports = vec![io(PortDirection::In, "in"), io(PortDirection::Out, "out_b")];
        b.actors = vec![unit("A", "ta"), unit("C", "tc")];
        b.channels = vec![
            Channel { source: Endpoint::network("in"), sink: Endpoint::actor("A", "in"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("A", "out"), sink: Endpoint::actor("C", "in"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("C", "out"), sink: Endpoint::network("out_b"), fifo_depth: 1 },
        ];
        let a = flatten(&a).unwrap();
        let b = flatten(&b).unwrap();
        merge_all(&[a, b], &MergePolicy::default()).unwrap()
    }

    #[test]
    fn signature_classes_become_regions() {
        let (m, ctab) = two_config_multi();
        let p = identify_logic_regions(&m, &ctab, GatingMode::ClockGating);
        // {A} always-on, {B} config 0 only, {C} config 1 only.
        assert_eq!(p.regions.len(), 3);
        assert_eq!(p.always_on().unwrap().members, vec!["A".to_string()]);
        assert_eq!(p.gateable().count(), 2);
        let sigs: Vec<ConfigMask> = p.regions.iter().map(|r| r.signature).collect();
        assert_eq!(sigs, vec![0b11, 0b10, 0b01]);
    }

    #[test]
    fn clock_mode_excludes_sboxes_power_mode_includes_them() {
        let (m, ctab) = two_config_multi();
        let sbox_count = m.base.sbox_actors().count();
        assert!(sbox_count > 0);
        let clock = identify_logic_regions(&m, &ctab, GatingMode::ClockGating);
        let power = identify_logic_regions(&m, &ctab, GatingMode::PowerGating);
        let members = |p: &LogicRegionPartition| -> usize {
            p.regions.iter().map(|r| r.members.len()).sum()
        };
        assert_eq!(members(&power), members(&clock) + sbox_count);
        // Every sbox lands in exactly one region.
        for sbox in m.base.sbox_actors() {
            let holders = power
                .regions
                .iter()
                .filter(|r| r.members.contains(&sbox.instance_name))
                .count();
            assert_eq!(holders, 1);
        }
    }

    #[test]
    fn single_configuration_gives_one_always_on_region() {
        let mut net = DataflowNetwork::new("solo");
        net.io_ports = vec![io(PortDirection::In, "in"), io(PortDirection::Out, "out")];
        net.actors = vec![unit("x", "t")];
        net.channels = vec![
            Channel { source: Endpoint::network("in"), sink: Endpoint::actor("x", "in"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("x", "out"), sink: Endpoint::network("out"), fifo_depth: 1 },
        ];
        let (m, ctab) = merge_all(&[net], &MergePolicy::default()).unwrap();
        let p = identify_logic_regions(&m, &ctab, GatingMode::ClockGating);
        assert_eq!(p.regions.len(), 1);
        assert!(p.always_on().is_some());
        assert_eq!(p.gateable().count(), 0);
    }

    #[test]
    fn reduction_is_a_no_op_at_or_under_budget() {
        let (m, ctab) = two_config_multi();
        let p = identify_logic_regions(&m, &ctab, GatingMode::ClockGating);
        assert_eq!(reduce_regions(&p, 2), p);
        assert_eq!(reduce_regions(&p, 5), p);
    }

    #[test]
    fn budget_one_ors_all_gateable_signatures() {
        let (m, ctab) = two_config_multi();
        let p = identify_logic_regions(&m, &ctab, GatingMode::ClockGating);
        let reduced = reduce_regions(&p, 1);
        assert_eq!(reduced.gateable().count(), 1);
        let merged = reduced.gateable().next().unwrap();
        assert_eq!(merged.signature, 0b11);
        assert_eq!(merged.members, vec!["B".to_string(), "C".to_string()]);
        // Always-on region is untouched and exempt.
        assert_eq!(reduced.always_on().unwrap().members, vec!["A".to_string()]);
    }

    #[test]
    fn reduction_preserves_activity_safety() {
        let (m, ctab) = two_config_multi();
        let p = identify_logic_regions(&m, &ctab, GatingMode::PowerGating);
        let count = p.regions.len();
        for budget in 1..=count {
            let reduced = reduce_regions(&p, budget);
            for region in &p.regions {
                for member in &region.members {
                    let holder = reduced
                        .regions
                        .iter()
                        .find(|r| r.members.contains(member))
                        .expect("member survives reduction");
                    assert_eq!(
                        holder.signature & region.signature,
                        region.signature,
                        "`{member}` lost an active configuration"
                    );
                }
            }
        }
    }

    #[test]
    fn chosen_merge_minimizes_added_waste() {
        // Three gateable regions with crafted sizes/signatures; check
        // the greedy picks the exhaustive minimum-waste pair first.
        let p = LogicRegionPartition {
            mode: GatingMode::ClockGating,
            config_count: 3,
            regions: vec![
                LogicRegion { id: 0, members: vec!["a".into(), "b".into(), "c".into()], signature: 0b001, always_on: false },
                LogicRegion { id: 1, members: vec!["d".into()], signature: 0b011, always_on: false },
                LogicRegion { id: 2, members: vec!["e".into(), "f".into()], signature: 0b100, always_on: false },
            ],
        };
        // Exhaustive waste: (0,1): 3*1+0=3 ; (0,2): 3*1+2*1=5 ; (1,2): 1*1+2*2=5.
        let reduced = reduce_regions(&p, 2);
        assert_eq!(reduced.regions.len(), 2);
        let merged = reduced
            .regions
            .iter()
            .find(|r| r.members.len() == 4)
            .expect("regions 0 and 1 merged");
        assert_eq!(merged.signature, 0b011);
    }
}
