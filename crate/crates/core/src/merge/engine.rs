//! Iterative pairwise datapath merging.
//!
//! For N input networks, N-1 pair iterations fold each network into
//! the accumulated multi-dataflow. Actors deemed interchangeable
//! appear once; wherever the surviving actor's wiring differs between
//! configurations, switching boxes are inserted: a 2-to-1 sbox where
//! paths join in front of a shared input, a 1-to-2 sbox where a shared
//! output forks to configuration-distinct consumers. A configuration
//! table records the selector bit of every sbox for every
//! configuration.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ir::{Actor, ActorKind, Channel, DataflowNetwork, Endpoint, PortDirection};

use super::fifo::place_fifos;
use super::moreano::build_moreano_mapping;
use super::multi::{
    mask_bit, ConfigMask, ConfigurationTable, CtabRow, MultiDataflow, Provenance,
};

/// Which pairing rule declares two actors interchangeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ActorEquality {
    /// Same component type and same ordered port signature.
    #[default]
    TypeAndSignature,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MergeAlgorithm {
    /// Connectivity-seeded greedy pairing.
    #[default]
    Heuristic,
    /// Compatibility-graph clique pairing over edge mappings.
    Moreano,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MergeOrder {
    /// Fold networks in the order given.
    #[default]
    Given,
    /// Sort networks by name first.
    Canonical,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MergePolicy {
    pub algorithm: MergeAlgorithm,
    pub equality: ActorEquality,
    pub order: MergeOrder,
}

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("no input networks")]
    EmptyInput,
    #[error("{n} input networks exceed the supported maximum of 64")]
    TooManyNetworks { n: usize },
    #[error("duplicate network name `{name}`")]
    DuplicateNetworkName { name: String },
    #[error("network `{name}` is not flattened")]
    NotFlattened { name: String },
    #[error("actors `{a}` and `{b}` declared equal but their widths conflict")]
    WidthConflict { a: String, b: String },
    #[error("network port `{port}` redeclared with a different shape ({details})")]
    IoPortConflict { port: String, details: String },
    #[error("merge invariant violated: {0}")]
    Internal(String),
}

/// Merge all networks into one multi-dataflow with its configuration
/// table. Inputs must be flattened and valid.
pub fn merge_all(
    nets: &[DataflowNetwork],
    policy: &MergePolicy,
) -> Result<(MultiDataflow, ConfigurationTable), MergeError> {
    if nets.is_empty() {
        return Err(MergeError::EmptyInput);
    }
    if nets.len() > 64 {
        return Err(MergeError::TooManyNetworks { n: nets.len() });
    }
    let mut ordered: Vec<&DataflowNetwork> = nets.iter().collect();
    if policy.order == MergeOrder::Canonical {
        ordered.sort_by(|a, b| a.name.cmp(&b.name));
    }
    let mut seen = BTreeSet::new();
    for net in &ordered {
        if !net.is_flat() {
            return Err(MergeError::NotFlattened { name: net.name.clone() });
        }
        if !seen.insert(net.name.clone()) {
            return Err(MergeError::DuplicateNetworkName { name: net.name.clone() });
        }
    }

    let mut multi = MultiDataflow::from_single(ordered[0]);
    if ordered.len() > 1 {
        multi.base.name = "multi_dataflow".into();
    }
    let mut ctab = ConfigurationTable {
        rows: vec![CtabRow {
            config_name: ordered[0].name.clone(),
            network_id: 0,
            selectors: BTreeMap::new(),
        }],
    };
    for net in ordered.iter().skip(1) {
        let (m, t) = merge_pair(&multi, &ctab, net, policy)?;
        multi = m;
        ctab = t;
    }
    multi = place_fifos(&multi);
    fill_missing_selectors(&multi, &mut ctab);
    Ok((multi, ctab))
}

/// Fold one more network into an accumulated multi-dataflow.
pub fn merge_pair(
    a: &MultiDataflow,
    ctab: &ConfigurationTable,
    b: &DataflowNetwork,
    policy: &MergePolicy,
) -> Result<(MultiDataflow, ConfigurationTable), MergeError> {
    if !b.is_flat() {
        return Err(MergeError::NotFlattened { name: b.name.clone() });
    }
    let config = a.config_count();
    let bit = mask_bit(config);

    let matching = match policy.algorithm {
        MergeAlgorithm::Heuristic => heuristic_matching(&a.base, b),
        MergeAlgorithm::Moreano => {
            build_moreano_mapping(&a.base, b, None).vertex_map_b_to_a()
        }
    };
    for (bx, ay) in &matching {
        let x = b.actor(bx).expect("matching references b actor");
        let y = a.base.actor(ay).expect("matching references merged actor");
        if x.port_signature() != y.port_signature() {
            return Err(MergeError::WidthConflict { a: ay.clone(), b: bx.clone() });
        }
    }

    let mut builder = Builder {
        base: a.base.clone(),
        prov: a.provenance.clone(),
        rows: ctab.rows.clone(),
        sbox_counter: a.base.sbox_actors().count(),
    };
    builder.rows.push(CtabRow {
        config_name: b.name.clone(),
        network_id: config as u32,
        selectors: BTreeMap::new(),
    });

    // Network I/O ports: union by name; shape disagreements are not
    // merged, they are rejected.
    for p in &b.io_ports {
        match builder.base.io_port(&p.name) {
            Some(existing) => {
                if existing.width != p.width || existing.direction != p.direction {
                    return Err(MergeError::IoPortConflict {
                        port: p.name.clone(),
                        details: format!(
                            "{}:{} vs {}:{}",
                            direction_name(existing.direction),
                            existing.width,
                            direction_name(p.direction),
                            p.width
                        ),
                    });
                }
            }
            None => builder.base.io_ports.push(p.clone()),
        }
        *builder.prov.io_ports.entry(p.name.clone()).or_insert(0) |= bit;
    }

    // Unmatched actors join the graph under a collision-free name;
    // matched ones gain the new configuration in their provenance.
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    let taken: BTreeSet<String> =
        builder.base.actors.iter().map(|x| x.instance_name.clone()).collect();
    for x in &b.actors {
        if let Some(y) = matching.get(&x.instance_name) {
            rename.insert(x.instance_name.clone(), y.clone());
            *builder.prov.actors.entry(y.clone()).or_insert(0) |= bit;
            continue;
        }
        let mut name = x.instance_name.clone();
        if taken.contains(&name) || rename.values().any(|v| v == &name) {
            name = format!("{}_{}", b.name, x.instance_name);
            let mut k = 2;
            while taken.contains(&name) || rename.values().any(|v| v == &name) {
                name = format!("{}_{}_{k}", b.name, x.instance_name);
                k += 1;
            }
        }
        let mut added = x.clone();
        added.instance_name = name.clone();
        builder.base.actors.push(added);
        builder.prov.actors.insert(name.clone(), bit);
        rename.insert(x.instance_name.clone(), name);
    }

    let translate = |ep: &Endpoint| -> Endpoint {
        match ep {
            Endpoint::ActorPort { actor, port } => {
                Endpoint::actor(rename.get(actor).unwrap_or(actor), port)
            }
            Endpoint::NetworkPort { port } => Endpoint::network(port),
        }
    };

    // Wire the new configuration channel by channel, in a fixed order.
    let mut channels: Vec<&Channel> = b.channels.iter().collect();
    channels.sort_by_key(|c| (c.sink.key(), c.source.key()));
    for c in channels {
        let src = translate(&c.source);
        let sink = translate(&c.sink);
        builder.wire(config, &src, &sink, c.fifo_depth)?;
    }

    let multi = MultiDataflow {
        base: builder.base,
        config_names: {
            let mut names = a.config_names.clone();
            names.push(b.name.clone());
            names
        },
        provenance: builder.prov,
    };
    let mut table = ConfigurationTable { rows: builder.rows };
    let multi = place_fifos(&multi);
    fill_missing_selectors(&multi, &mut table);
    Ok((multi, table))
}

fn direction_name(d: PortDirection) -> &'static str {
    match d {
        PortDirection::In => "in",
        PortDirection::Out => "out",
    }
}

/// Every sbox gets a selector bit in every row; bits not pinned by any
/// path default to 0.
fn fill_missing_selectors(multi: &MultiDataflow, ctab: &mut ConfigurationTable) {
    for row in &mut ctab.rows {
        for sbox in multi.base.sbox_actors() {
            row.selectors.entry(sbox.instance_name.clone()).or_insert(0);
        }
    }
}

// ---------------------------------------------------------------------------
// wiring machinery
// ---------------------------------------------------------------------------

struct Builder {
    base: DataflowNetwork,
    prov: Provenance,
    rows: Vec<CtabRow>,
    sbox_counter: usize,
}

impl Builder {
    /// Realize one channel of configuration `config` from `src` to
    /// `sink` (both already translated into the merged namespace).
    /// Reuses an existing sbox path when one reaches the sink from the
    /// source; otherwise inserts at most one fork and one join sbox.
    fn wire(
        &mut self,
        config: usize,
        src: &Endpoint,
        sink: &Endpoint,
        depth: u32,
    ) -> Result<(), MergeError> {
        let bit = mask_bit(config);

        if let Some(path) = self.find_sbox_path(config, src, sink) {
            for step in &path {
                *self.prov.channels.entry(step.channel_sink.clone()).or_insert(0) |= bit;
                if let Some((sbox, sel)) = &step.selector {
                    *self.prov.actors.entry(sbox.clone()).or_insert(0) |= bit;
                    self.pin_selector(config, sbox, *sel)?;
                }
            }
            // The path's buffering must satisfy the larger requirement.
            let carrier = path
                .iter()
                .map(|s| s.channel_sink.clone())
                .max_by_key(|key| self.channel_depth(key))
                .expect("path has at least one channel");
            let idx = self.channel_index(&carrier).expect("carrier exists");
            let d = self.base.channels[idx].fifo_depth.max(depth);
            self.base.channels[idx].fifo_depth = d;
            return Ok(());
        }

        let src_free = self.attach_source(config, src, depth)?;
        let sink_free = self.attach_sink(config, sink, depth)?;
        self.add_channel(&src_free, &sink_free, depth, bit);
        Ok(())
    }

    /// Free output endpoint to drive the new channel from. If `src`
    /// already drives a channel, a 1-to-2 sbox is inserted at the root
    /// and its second leg returned.
    fn attach_source(
        &mut self,
        config: usize,
        src: &Endpoint,
        _depth: u32,
    ) -> Result<Endpoint, MergeError> {
        let bit = mask_bit(config);
        let Some(old_idx) = self.base.channels.iter().position(|c| &c.source == src) else {
            return Ok(src.clone());
        };
        let width = self
            .base
            .endpoint_width(src)
            .ok_or_else(|| MergeError::Internal(format!("unresolved endpoint {}", src.key())))?;
        let name = self.next_sbox_name();
        let fork = Actor::sbox_1x2(&name, width);
        self.base.actors.push(fork);

        let old_sink = self.base.channels[old_idx].sink.clone();
        let old_depth = self.base.channels[old_idx].fifo_depth;
        let old_mask = self.take_channel(old_idx);

        // src -> fork.in, fork.out0 -> old sink, fork.out1 free.
        self.add_channel(src, &Endpoint::actor(&name, "in"), 0, old_mask | bit);
        self.add_channel(&Endpoint::actor(&name, "out0"), &old_sink, old_depth, old_mask);
        self.prov.actors.insert(name.clone(), old_mask | bit);
        self.pin_selector(config, &name, 1)?;
        Ok(Endpoint::actor(&name, "out1"))
    }

    /// Free input endpoint for the new channel to land on. If `sink`
    /// already has a driver, a 2-to-1 sbox is inserted in front of it
    /// and its second input returned.
    fn attach_sink(
        &mut self,
        config: usize,
        sink: &Endpoint,
        _depth: u32,
    ) -> Result<Endpoint, MergeError> {
        let bit = mask_bit(config);
        let Some(old_idx) = self.base.channels.iter().position(|c| &c.sink == sink) else {
            return Ok(sink.clone());
        };
        let width = self
            .base
            .endpoint_width(sink)
            .ok_or_else(|| MergeError::Internal(format!("unresolved endpoint {}", sink.key())))?;
        let name = self.next_sbox_name();
        let join = Actor::sbox_2x1(&name, width);
        self.base.actors.push(join);

        let old_src = self.base.channels[old_idx].source.clone();
        let old_depth = self.base.channels[old_idx].fifo_depth;
        let old_mask = self.take_channel(old_idx);

        // old source -> join.in0, join.out -> sink, join.in1 free.
        self.add_channel(&old_src, &Endpoint::actor(&name, "in0"), old_depth, old_mask);
        self.add_channel(&Endpoint::actor(&name, "out"), sink, 0, old_mask | bit);
        self.prov.actors.insert(name.clone(), old_mask | bit);
        self.pin_selector(config, &name, 1)?;
        Ok(Endpoint::actor(&name, "in1"))
    }

    fn next_sbox_name(&mut self) -> String {
        let name = format!("sbox_{}", self.sbox_counter);
        self.sbox_counter += 1;
        name
    }

    fn channel_index(&self, sink_key: &str) -> Option<usize> {
        self.base.channels.iter().position(|c| c.sink.key() == sink_key)
    }

    fn channel_depth(&self, sink_key: &str) -> u32 {
        self.channel_index(sink_key)
            .map(|i| self.base.channels[i].fifo_depth)
            .unwrap_or(0)
    }

    /// Remove a channel and return its provenance mask.
    fn take_channel(&mut self, idx: usize) -> ConfigMask {
        let c = self.base.channels.remove(idx);
        self.prov.channels.remove(&c.sink.key()).unwrap_or(0)
    }

    fn add_channel(&mut self, src: &Endpoint, sink: &Endpoint, depth: u32, mask: ConfigMask) {
        self.base.channels.push(Channel {
            source: src.clone(),
            sink: sink.clone(),
            fifo_depth: depth,
        });
        *self.prov.channels.entry(sink.key()).or_insert(0) |= mask;
    }

    fn pin_selector(&mut self, config: usize, sbox: &str, value: u8) -> Result<(), MergeError> {
        let row = &mut self.rows[config];
        match row.selectors.insert(sbox.to_string(), value) {
            Some(prev) if prev != value => Err(MergeError::Internal(format!(
                "configuration `{}` pins selector of `{sbox}` to both {prev} and {value}",
                row.config_name
            ))),
            _ => Ok(()),
        }
    }

    /// Bit already pinned for `config` on `sbox` (by an earlier channel
    /// of the same configuration), if any.
    fn pinned(&self, config: usize, sbox: &str) -> Option<u8> {
        self.rows[config].selectors.get(sbox).copied()
    }

    /// Search for a selector-consistent path from `src` to `sink`
    /// whose intermediate vertices are all sboxes and whose required
    /// bits do not contradict bits the configuration already pinned.
    /// Returns the hops in order; deterministic (input 0 / output 0
    /// explored first).
    fn find_sbox_path(
        &self,
        config: usize,
        src: &Endpoint,
        sink: &Endpoint,
    ) -> Option<Vec<PathStep>> {
        let mut path = Vec::new();
        if self.dfs_path(config, src, sink, &mut path) {
            Some(path)
        } else {
            None
        }
    }

    fn dfs_path(
        &self,
        config: usize,
        from: &Endpoint,
        goal: &Endpoint,
        path: &mut Vec<PathStep>,
    ) -> bool {
        let Some(channel) = self.base.channels.iter().find(|c| &c.source == from) else {
            return false;
        };
        let hop_sink = channel.sink.clone();
        if &hop_sink == goal {
            path.push(PathStep { channel_sink: hop_sink.key(), selector: None });
            return true;
        }
        let Endpoint::ActorPort { actor, port } = &hop_sink else {
            return false;
        };
        let Some(node) = self.base.actor(actor) else { return false };
        match node.kind {
            ActorKind::Sbox2x1 => {
                let sel = match port.as_str() {
                    "in0" => 0,
                    "in1" => 1,
                    _ => return false,
                };
                if self.pinned(config, actor).is_some_and(|p| p != sel) {
                    return false;
                }
                path.push(PathStep {
                    channel_sink: hop_sink.key(),
                    selector: Some((actor.clone(), sel)),
                });
                if self.dfs_path(config, &Endpoint::actor(actor, "out"), goal, path) {
                    return true;
                }
                path.pop();
                false
            }
            ActorKind::Sbox1x2 => {
                if port != "in" {
                    return false;
                }
                for (sel, out) in [(0u8, "out0"), (1u8, "out1")] {
                    if self.pinned(config, actor).is_some_and(|p| p != sel) {
                        continue;
                    }
                    path.push(PathStep {
                        channel_sink: hop_sink.key(),
                        selector: Some((actor.clone(), sel)),
                    });
                    if self.dfs_path(config, &Endpoint::actor(actor, out), goal, path) {
                        return true;
                    }
                    path.pop();
                }
                false
            }
            _ => false,
        }
    }
}

struct PathStep {
    channel_sink: String,
    /// `(sbox, bit)` the configuration must pin to traverse this hop;
    /// `None` for the final hop into the goal.
    selector: Option<(String, u8)>,
}

// ---------------------------------------------------------------------------
// heuristic actor pairing
// ---------------------------------------------------------------------------

/// Greedy pairing of interchangeable actors, seeded at matching
/// network ports and grown along channels, then completed with a
/// name-ordered sweep so every shareable actor is shared.
fn heuristic_matching(a: &DataflowNetwork, b: &DataflowNetwork) -> BTreeMap<String, String> {
    let mut matched: BTreeMap<String, String> = BTreeMap::new(); // b -> a
    let mut used_a: BTreeSet<String> = BTreeSet::new();
    let mut queue: Vec<(String, String)> = Vec::new(); // (a actor, b actor)

    let equal = |ya: &Actor, xb: &Actor| -> bool {
        !ya.kind.is_sbox()
            && !xb.kind.is_sbox()
            && ya.component_type == xb.component_type
            && ya.port_signature() == xb.port_signature()
    };

    let try_match = |ya: &str,
                         xb: &str,
                         matched: &mut BTreeMap<String, String>,
                         used_a: &mut BTreeSet<String>,
                         queue: &mut Vec<(String, String)>| {
        if matched.contains_key(xb) || used_a.contains(ya) {
            return;
        }
        let (Some(actor_a), Some(actor_b)) = (a.actor(ya), b.actor(xb)) else { return };
        if !equal(actor_a, actor_b) {
            return;
        }
        matched.insert(xb.to_string(), ya.to_string());
        used_a.insert(ya.to_string());
        queue.push((ya.to_string(), xb.to_string()));
    };

    // Seeds: actors behind the same-named network ports.
    for p in &b.io_ports {
        if a.io_port(&p.name).is_none() {
            continue;
        }
        let ep = Endpoint::network(&p.name);
        let (ends_a, ends_b) = match p.direction {
            PortDirection::In => (forward_targets(a, &ep), forward_targets(b, &ep)),
            PortDirection::Out => (backward_sources(a, &ep), backward_sources(b, &ep)),
        };
        for (ya, _) in &ends_a {
            for (xb, _) in &ends_b {
                try_match(ya, xb, &mut matched, &mut used_a, &mut queue);
            }
        }
    }

    // Grow along channels from matched pairs.
    while let Some((ya, xb)) = queue.pop() {
        let actor_b = b.actor(&xb).expect("queued b actor");
        for port in &actor_b.ports {
            if port.open {
                continue;
            }
            let ep_a = Endpoint::actor(&ya, &port.name);
            let ep_b = Endpoint::actor(&xb, &port.name);
            let (neigh_a, neigh_b) = match port.direction {
                PortDirection::In => (backward_sources(a, &ep_a), backward_sources(b, &ep_b)),
                PortDirection::Out => (forward_targets(a, &ep_a), forward_targets(b, &ep_b)),
            };
            for (na, pa) in &neigh_a {
                for (nb, pb) in &neigh_b {
                    if pa == pb {
                        try_match(na, nb, &mut matched, &mut used_a, &mut queue);
                    }
                }
            }
        }
    }

    // Completion sweep: any remaining interchangeable pair shares.
    let mut actors_b: Vec<&Actor> = b.actors.iter().collect();
    actors_b.sort_by_key(|x| x.instance_name.clone());
    for xb in actors_b {
        if matched.contains_key(&xb.instance_name) {
            continue;
        }
        let mut candidates: Vec<&Actor> = a
            .actors
            .iter()
            .filter(|ya| !used_a.contains(&ya.instance_name) && equal(ya, xb))
            .collect();
        candidates.sort_by_key(|ya| ya.instance_name.clone());
        if let Some(ya) = candidates.first() {
            used_a.insert(ya.instance_name.clone());
            matched.insert(xb.instance_name.clone(), ya.instance_name.clone());
        }
    }
    matched
}

/// Non-sbox endpoints reachable forward from `ep` through sboxes only:
/// the effective consumers of the data produced at `ep`.
fn forward_targets(net: &DataflowNetwork, ep: &Endpoint) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut stack = vec![ep.clone()];
    while let Some(from) = stack.pop() {
        let Some(channel) = net.channel_out_of(&from) else { continue };
        match &channel.sink {
            Endpoint::ActorPort { actor, port } => {
                let node = net.actor(actor).expect("channel sink resolves");
                match node.kind {
                    ActorKind::Sbox2x1 => stack.push(Endpoint::actor(actor, "out")),
                    ActorKind::Sbox1x2 => {
                        stack.push(Endpoint::actor(actor, "out0"));
                        stack.push(Endpoint::actor(actor, "out1"));
                    }
                    _ => out.push((actor.clone(), port.clone())),
                }
            }
            Endpoint::NetworkPort { .. } => {}
        }
    }
    out.sort();
    out
}

/// Non-sbox endpoints reachable backward from `ep` through sboxes
/// only: the effective producers feeding `ep`.
fn backward_sources(net: &DataflowNetwork, ep: &Endpoint) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut stack = vec![ep.clone()];
    while let Some(to) = stack.pop() {
        let Some(channel) = net.channel_into(&to) else { continue };
        match &channel.source {
            Endpoint::ActorPort { actor, port } => {
                let node = net.actor(actor).expect("channel source resolves");
                match node.kind {
                    ActorKind::Sbox2x1 => {
                        stack.push(Endpoint::actor(actor, "in0"));
                        stack.push(Endpoint::actor(actor, "in1"));
                    }
                    ActorKind::Sbox1x2 => stack.push(Endpoint::actor(actor, "in")),
                    _ => out.push((actor.clone(), port.clone())),
                }
            }
            Endpoint::NetworkPort { .. } => {}
        }
    }
    out.sort();
    out
}
