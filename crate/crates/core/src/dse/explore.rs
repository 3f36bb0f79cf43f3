//! Design-space exploration over merge partitions.
//!
//! A merging configuration is a set partition of the input networks:
//! each group merges into one substrate, groups deploy side by side.
//! Every partition is costed (sum of group areas and powers, minimum
//! of group frequencies) and ranked; the all-singletons partition is
//! always present as the non-reconfigurable baseline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::DataflowNetwork;
use crate::merge::{merge_all, MergeError, MergePolicy, MultiDataflow};

use super::annotate::{ComponentAnnotation, TechnologyModel};
use super::cost::{
    cost_area, cost_critical_path, cost_power, longest_sbox_cascade, CostError, PowerBreakdown,
};
use super::partitions::{partition_blocks, set_partitions};

/// Guard rails for the exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    /// Partition enumeration cap (Bell(6) = 203 partitions).
    pub max_networks: usize,
    /// Groups up to this size try every merge order; larger groups use
    /// canonical (name-sorted) order only.
    pub order_exhaustion: usize,
    /// Lift `max_networks`.
    pub allow_large: bool,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits { max_networks: 6, order_exhaustion: 4, allow_large: false }
    }
}

/// Primary ranking key of the report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKey {
    #[default]
    Area,
    Power,
    Freq,
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("{n} networks exceed the enumeration limit {limit}; pass the override to proceed")]
    LimitExceeded { n: usize, limit: usize },
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Costs of one merged group of a candidate partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSummary {
    /// Member networks in the merge order that was chosen.
    pub networks: Vec<String>,
    pub actor_count: usize,
    pub sbox_count: usize,
    pub cascade_len: usize,
    pub area: f64,
    pub power: PowerBreakdown,
    pub cp: f64,
    pub freq_mhz: f64,
}

/// One costed merging configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeCandidate {
    /// Blocks of input indices, each sorted, ordered by first member.
    pub partition: Vec<Vec<usize>>,
    /// Canonical string like `{a,b}{c}` used for deterministic ties.
    pub partition_key: String,
    pub groups: Vec<GroupSummary>,
    pub area: f64,
    pub power: PowerBreakdown,
    pub freq_mhz: f64,
    /// Whether the candidate is Pareto-optimal over
    /// (area min, total power min, frequency max).
    pub pareto: bool,
}

/// The full exploration report, serialized as `*.dse.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DseReport {
    pub inputs: Vec<String>,
    pub rank_key: RankKey,
    pub candidates: Vec<MergeCandidate>,
}

/// Enumerate, cost, and rank every merging configuration.
pub fn explore(
    nets: &[DataflowNetwork],
    ann: &ComponentAnnotation,
    tech: &TechnologyModel,
    policy: &MergePolicy,
    limits: &ExploreLimits,
    key: RankKey,
) -> Result<DseReport, ExploreError> {
    if nets.is_empty() {
        return Err(ExploreError::Merge(MergeError::EmptyInput));
    }
    if nets.len() > limits.max_networks && !limits.allow_large {
        return Err(ExploreError::LimitExceeded { n: nets.len(), limit: limits.max_networks });
    }

    let mut candidates = Vec::new();
    for rgs in set_partitions(nets.len()) {
        let blocks = partition_blocks(&rgs);
        let mut groups = Vec::with_capacity(blocks.len());
        for block in &blocks {
            groups.push(best_group(nets, block, ann, tech, policy, limits, key)?);
        }
        let area = groups.iter().map(|g| g.area).sum();
        let power = groups
            .iter()
            .map(|g| g.power)
            .fold(PowerBreakdown::default(), |acc, p| acc.add(&p));
        let freq_mhz = groups.iter().map(|g| g.freq_mhz).fold(f64::INFINITY, f64::min);
        let partition_key = blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.iter().map(|&i| nets[i].name.as_str()).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect::<String>();
        candidates.push(MergeCandidate {
            partition: blocks,
            partition_key,
            groups,
            area,
            power,
            freq_mhz,
            pareto: false,
        });
    }

    mark_pareto(&mut candidates);
    sort_candidates(&mut candidates, key);
    Ok(DseReport {
        inputs: nets.iter().map(|n| n.name.clone()).collect(),
        rank_key: key,
        candidates,
    })
}

/// Merge one group under every admissible order and keep the best.
fn best_group(
    nets: &[DataflowNetwork],
    block: &[usize],
    ann: &ComponentAnnotation,
    tech: &TechnologyModel,
    policy: &MergePolicy,
    limits: &ExploreLimits,
    key: RankKey,
) -> Result<GroupSummary, ExploreError> {
    let orders: Vec<Vec<usize>> = if block.len() <= limits.order_exhaustion {
        permutations(block)
    } else {
        let mut canonical = block.to_vec();
        canonical.sort_by(|&i, &j| nets[i].name.cmp(&nets[j].name));
        vec![canonical]
    };

    let mut best: Option<GroupSummary> = None;
    for order in orders {
        let members: Vec<DataflowNetwork> = order.iter().map(|&i| nets[i].clone()).collect();
        let (multi, _ctab) = merge_all(&members, policy)?;
        let summary = summarize(&multi, &members, ann, tech)?;
        let better = match &best {
            None => true,
            Some(cur) => match key {
                RankKey::Area => summary.area < cur.area,
                RankKey::Power => summary.power.total < cur.power.total,
                RankKey::Freq => summary.freq_mhz > cur.freq_mhz,
            },
        };
        if better {
            best = Some(summary);
        }
    }
    Ok(best.expect("at least one order per group"))
}

fn summarize(
    multi: &MultiDataflow,
    members: &[DataflowNetwork],
    ann: &ComponentAnnotation,
    tech: &TechnologyModel,
) -> Result<GroupSummary, ExploreError> {
    let area = cost_area(multi, ann)?;
    let power = cost_power(multi, ann)?;
    let input_cps = members
        .iter()
        .map(|net| network_critical_path(net, ann))
        .collect::<Result<Vec<f64>, CostError>>()?;
    let cp = cost_critical_path(multi, &input_cps, tech)?;
    Ok(GroupSummary {
        networks: members.iter().map(|n| n.name.clone()).collect(),
        actor_count: multi.base.actors.iter().filter(|a| !a.kind.is_sbox()).count(),
        sbox_count: multi.base.sbox_actors().count(),
        cascade_len: longest_sbox_cascade(multi),
        area,
        power,
        cp: cp.cp,
        freq_mhz: cp.freq_mhz,
    })
}

/// Back-annotated critical path of an input network: actors are
/// register-bounded by their FIFOs, so the network delay is the worst
/// single component delay.
pub fn network_critical_path(
    net: &DataflowNetwork,
    ann: &ComponentAnnotation,
) -> Result<f64, CostError> {
    let mut cp = 0.0f64;
    for a in &net.actors {
        let c = ann
            .get(&a.component_type)
            .ok_or_else(|| CostError::MissingAnnotation(a.component_type.clone()))?;
        cp = cp.max(c.critical_path);
    }
    Ok(cp)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = items.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(items.len());
    let mut used = vec![false; sorted.len()];
    permute(&sorted, &mut used, &mut current, &mut out);
    out
}

fn permute(items: &[usize], used: &mut [bool], current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == items.len() {
        out.push(current.clone());
        return;
    }
    for i in 0..items.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        current.push(items[i]);
        permute(items, used, current, out);
        current.pop();
        used[i] = false;
    }
}

fn mark_pareto(candidates: &mut [MergeCandidate]) {
    let dominated = |a: &MergeCandidate, b: &MergeCandidate| -> bool {
        // b dominates a.
        let no_worse =
            b.area <= a.area && b.power.total <= a.power.total && b.freq_mhz >= a.freq_mhz;
        let strictly_better =
            b.area < a.area || b.power.total < a.power.total || b.freq_mhz > a.freq_mhz;
        no_worse && strictly_better
    };
    let snapshot: Vec<(f64, f64, f64)> = candidates
        .iter()
        .map(|c| (c.area, c.power.total, c.freq_mhz))
        .collect();
    for i in 0..candidates.len() {
        let a = &candidates[i];
        let is_dominated = snapshot.iter().enumerate().any(|(j, _)| {
            j != i && dominated(a, &candidates[j])
        });
        candidates[i].pareto = !is_dominated;
    }
}

fn sort_candidates(candidates: &mut [MergeCandidate], key: RankKey) {
    candidates.sort_by(|a, b| {
        let primary = match key {
            RankKey::Area => a.area.partial_cmp(&b.area),
            RankKey::Power => a.power.total.partial_cmp(&b.power.total),
            RankKey::Freq => b.freq_mhz.partial_cmp(&a.freq_mhz),
        };
        primary
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.partition_key.cmp(&b.partition_key))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dse::annotate::{ComponentCosts, TechRow};
    use crate::ir::{Actor, ActorPort, Channel, Endpoint, NetworkPort, PortDirection};

    fn simple_net(name: &str, ty: &str) -> DataflowNetwork {
        let mut n = DataflowNetwork::new(name);
        n.io_ports = vec![
            NetworkPort { direction: PortDirection::In, name: format!("in_{name}"), width: 32 },
            NetworkPort { direction: PortDirection::Out, name: format!("out_{name}"), width: 32 },
        ];
        n.actors = vec![Actor::atomic(
            "x",
            ty,
            vec![
                ActorPort { direction: PortDirection::In, name: "in".into(), width: 32, open: false },
                ActorPort { direction: PortDirection::Out, name: "out".into(), width: 32, open: false },
            ],
        )];
        n.channels = vec![
            Channel {
                source: Endpoint::network(&format!("in_{name}")),
                sink: Endpoint::actor("x", "in"),
                fifo_depth: 1,
            },
            Channel {
                source: Endpoint::actor("x", "out"),
                sink: Endpoint::network(&format!("out_{name}")),
                fifo_depth: 1,
            },
        ];
        n
    }

    fn unit_annotation() -> ComponentAnnotation {
        let mut ann = ComponentAnnotation::default();
        for ty in ["t", "u", "v", "w", "sbox2x1_32", "sbox1x2_32"] {
            ann.insert(
                ty,
                ComponentCosts { area: 1.0, power_static: 1.0, power_dynamic: 1.0, critical_path: 2.0 },
            );
        }
        ann
    }

    fn tech() -> TechnologyModel {
        TechnologyModel { rows: vec![TechRow { bit_width: 32, f: 0.8, g: 1.5 }] }
    }

    #[test]
    fn single_network_yields_one_candidate() {
        let nets = [simple_net("a", "t")];
        let report = explore(
            &nets,
            &unit_annotation(),
            &tech(),
            &MergePolicy::default(),
            &ExploreLimits::default(),
            RankKey::Area,
        )
        .unwrap();
        assert_eq!(report.candidates.len(), 1);
        let c = &report.candidates[0];
        assert_eq!(c.area, 1.0);
        assert_eq!(c.power.total, 2.0);
        assert!(c.pareto);
    }

    #[test]
    fn candidate_counts_follow_bell_numbers() {
        let names = ["a", "b", "c", "d"];
        let types = ["t", "u", "v", "w"];
        for n in 1..=4usize {
            let nets: Vec<DataflowNetwork> = (0..n)
                .map(|i| simple_net(names[i], types[i]))
                .collect();
            let report = explore(
                &nets,
                &unit_annotation(),
                &tech(),
                &MergePolicy::default(),
                &ExploreLimits::default(),
                RankKey::Area,
            )
            .unwrap();
            let expected = [1usize, 1, 2, 5, 15][n];
            assert_eq!(report.candidates.len(), expected, "Bell({n})");
        }
    }

    #[test]
    fn baseline_partition_is_present_with_zero_cascades() {
        let nets = [simple_net("a", "t"), simple_net("b", "u"), simple_net("c", "v")];
        let report = explore(
            &nets,
            &unit_annotation(),
            &tech(),
            &MergePolicy::default(),
            &ExploreLimits::default(),
            RankKey::Area,
        )
        .unwrap();
        let baseline = report
            .candidates
            .iter()
            .find(|c| c.partition.len() == nets.len())
            .expect("all-singletons candidate");
        assert!(baseline.groups.iter().all(|g| g.cascade_len == 0));
        // Unmerged: every group contributes its own actor.
        assert_eq!(baseline.area, 3.0);
    }

    #[test]
    fn enumeration_limit_is_enforced_and_overridable() {
        let nets: Vec<DataflowNetwork> = (0..7)
            .map(|i| simple_net(&format!("n{i}"), "t"))
            .collect();
        let err = explore(
            &nets,
            &unit_annotation(),
            &tech(),
            &MergePolicy::default(),
            &ExploreLimits::default(),
            RankKey::Area,
        )
        .unwrap_err();
        assert!(matches!(err, ExploreError::LimitExceeded { n: 7, limit: 6 }));

        let relaxed = ExploreLimits { allow_large: true, ..Default::default() };
        assert!(explore(
            &nets,
            &unit_annotation(),
            &tech(),
            &MergePolicy::default(),
            &relaxed,
            RankKey::Area,
        )
        .is_ok());
    }

    #[test]
    fn area_scaling_preserves_the_argmin_set() {
        let nets = [simple_net("a", "t"), simple_net("b", "t"), simple_net("c", "u")];
        let run = |scale: f64| {
            let mut ann = unit_annotation();
            for c in ann.components.values_mut() {
                c.area *= scale;
            }
            explore(
                &nets,
                &ann,
                &tech(),
                &MergePolicy::default(),
                &ExploreLimits::default(),
                RankKey::Area,
            )
            .unwrap()
        };
        let base = run(1.0);
        let scaled = run(3.0);
        let min_base = base.candidates[0].area;
        let min_scaled = scaled.candidates[0].area;
        assert!((min_scaled - 3.0 * min_base).abs() < 1e-12);
        let argmin_base: Vec<&String> = base
            .candidates
            .iter()
            .filter(|c| c.area == min_base)
            .map(|c| &c.partition_key)
            .collect();
        let argmin_scaled: Vec<&String> = scaled
            .candidates
            .iter()
            .filter(|c| c.area == min_scaled)
            .map(|c| &c.partition_key)
            .collect();
        assert_eq!(argmin_base, argmin_scaled);
    }

    #[test]
    fn cp_equals_one_of_its_arguments() {
        let nets = [simple_net("a", "t"), simple_net("b", "t")];
        let report = explore(
            &nets,
            &unit_annotation(),
            &tech(),
            &MergePolicy::default(),
            &ExploreLimits::default(),
            RankKey::Freq,
        )
        .unwrap();
        for c in &report.candidates {
            for g in &c.groups {
                assert!(g.cp >= 2.0 - 1e-12, "cp >= cp_static");
            }
        }
    }
}
