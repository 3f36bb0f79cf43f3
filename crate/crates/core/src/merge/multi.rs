//! Merged multi-functional network and its configuration table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::{DataflowNetwork, Endpoint};

/// Bit set over configuration indices; bit `c` set means the element
/// serves configuration `c`. Caps the number of merged networks at 64.
pub type ConfigMask = u64;

pub fn mask_bit(c: usize) -> ConfigMask {
    1u64 << c
}

pub fn mask_contains(mask: ConfigMask, c: usize) -> bool {
    mask & mask_bit(c) != 0
}

/// Which configurations each element of the merged network serves.
/// Channels are keyed by their sink endpoint key: channels are
/// point-to-point, so the sink identifies the channel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub actors: BTreeMap<String, ConfigMask>,
    pub channels: BTreeMap<String, ConfigMask>,
    pub io_ports: BTreeMap<String, ConfigMask>,
}

/// A merged network: the base graph (including switching boxes), the
/// ordered names of the source configurations, and per-element
/// provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiDataflow {
    pub base: DataflowNetwork,
    pub config_names: Vec<String>,
    pub provenance: Provenance,
}

impl MultiDataflow {
    /// Wrap a single network as a one-configuration merge result.
    pub fn from_single(net: &DataflowNetwork) -> Self {
        let mut prov = Provenance::default();
        for a in &net.actors {
            prov.actors.insert(a.instance_name.clone(), mask_bit(0));
        }
        for c in &net.channels {
            prov.channels.insert(c.sink.key(), mask_bit(0));
        }
        for p in &net.io_ports {
            prov.io_ports.insert(p.name.clone(), mask_bit(0));
        }
        MultiDataflow {
            base: net.clone(),
            config_names: vec![net.name.clone()],
            provenance: prov,
        }
    }

    pub fn config_count(&self) -> usize {
        self.config_names.len()
    }

    pub fn actor_mask(&self, name: &str) -> ConfigMask {
        self.provenance.actors.get(name).copied().unwrap_or(0)
    }

    pub fn channel_mask(&self, sink: &Endpoint) -> ConfigMask {
        self.provenance.channels.get(&sink.key()).copied().unwrap_or(0)
    }

    /// Structural sanity used by tests and the verifier: every non-sbox
    /// actor serves at least one configuration, every sbox at least two,
    /// and provenance covers exactly the base elements.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for a in &self.base.actors {
            let mask = self.actor_mask(&a.instance_name);
            if a.kind.is_sbox() {
                if mask.count_ones() < 2 {
                    problems.push(format!(
                        "sbox `{}` serves {} configurations, expected >= 2",
                        a.instance_name,
                        mask.count_ones()
                    ));
                }
            } else if mask == 0 {
                problems.push(format!("actor `{}` has empty provenance", a.instance_name));
            }
        }
        for c in &self.base.channels {
            if self.channel_mask(&c.sink) == 0 {
                problems.push(format!("channel into `{}` has empty provenance", c.sink.key()));
            }
        }
        if self.provenance.actors.len() != self.base.actors.len() {
            problems.push("actor provenance does not cover the actor set".into());
        }
        if self.provenance.channels.len() != self.base.channels.len() {
            problems.push("channel provenance does not cover the channel set".into());
        }
        let top = mask_bit(self.config_count()) - 1;
        for (key, mask) in self
            .provenance
            .actors
            .iter()
            .chain(self.provenance.channels.iter())
            .chain(self.provenance.io_ports.iter())
        {
            if *mask & !top != 0 {
                problems.push(format!("element `{key}` references configurations out of range"));
            }
        }
        problems
    }
}

/// One configuration table row: a configuration name, its dense
/// network id, and a selector bit for every sbox instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtabRow {
    pub config_name: String,
    pub network_id: u32,
    pub selectors: BTreeMap<String, u8>,
}

/// Selector assignments for every configuration of a merged network.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationTable {
    pub rows: Vec<CtabRow>,
}

impl ConfigurationTable {
    pub fn row(&self, config: usize) -> Option<&CtabRow> {
        self.rows.get(config)
    }

    pub fn selector(&self, config: usize, sbox: &str) -> Option<u8> {
        self.rows.get(config).and_then(|r| r.selectors.get(sbox)).copied()
    }

    /// All sbox instance names keyed anywhere in the table, sorted.
    pub fn sbox_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .rows
            .iter()
            .flat_map(|r| r.selectors.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }
}
