//! Hierarchy flattening.
//!
//! Hierarchical actors are replaced by their sub-network contents.
//! Child instance names are prefixed with the parent instance name
//! (`parent_child`); boundary ports are removed by splicing the outer
//! channel with the inner channel attached to the same port.

use std::collections::BTreeSet;

use thiserror::Error;

use super::model::{ActorKind, Channel, DataflowNetwork, Endpoint};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlattenError {
    #[error("recursive hierarchy: {}", .chain.join(" -> "))]
    RecursiveHierarchy { chain: Vec<String> },
    #[error("instance name `{name}` collides after flattening")]
    NameCollision { name: String },
    #[error("boundary port `{port}` of `{actor}` has no matching channel on the {side} side")]
    DanglingBoundary { actor: String, port: String, side: &'static str },
}

/// Flatten all hierarchy; the result contains only atomic, fanout, and
/// sbox actors. Idempotent on already-flat networks.
pub fn flatten(net: &DataflowNetwork) -> Result<DataflowNetwork, FlattenError> {
    let mut chain = vec![net.name.clone()];
    flatten_inner(net, &mut chain)
}

fn flatten_inner(
    net: &DataflowNetwork,
    chain: &mut Vec<String>,
) -> Result<DataflowNetwork, FlattenError> {
    let mut out = DataflowNetwork::new(&net.name);
    out.io_ports = net.io_ports.clone();

    let mut channels: Vec<Channel> = net.channels.clone();
    // Instance names of hierarchical actors removed at this level;
    // endpoints still referencing them are boundary points to splice.
    let mut boundary_actors: BTreeSet<String> = BTreeSet::new();

    for actor in &net.actors {
        let sub = match &actor.kind {
            ActorKind::Hierarchical(sub) => sub,
            _ => {
                out.actors.push(actor.clone());
                continue;
            }
        };
        if chain.contains(&sub.name) {
            let mut cycle = chain.clone();
            cycle.push(sub.name.clone());
            return Err(FlattenError::RecursiveHierarchy { chain: cycle });
        }
        chain.push(sub.name.clone());
        let flat_sub = flatten_inner(sub, chain)?;
        chain.pop();

        let prefix = format!("{}_", actor.instance_name);
        let rename = |ep: &Endpoint| -> Endpoint {
            match ep {
                Endpoint::ActorPort { actor: a, port } => {
                    Endpoint::actor(&format!("{prefix}{a}"), port)
                }
                // Sub-network ports become boundary points attached to
                // the enclosing instance, matching the outer channels.
                Endpoint::NetworkPort { port } => Endpoint::actor(&actor.instance_name, port),
            }
        };
        for mut child in flat_sub.actors {
            child.instance_name = format!("{prefix}{}", child.instance_name);
            out.actors.push(child);
        }
        for c in &flat_sub.channels {
            channels.push(Channel {
                source: rename(&c.source),
                sink: rename(&c.sink),
                fifo_depth: c.fifo_depth,
            });
        }
        boundary_actors.insert(actor.instance_name.clone());
    }

    // Splice channel pairs meeting at boundary points. Each splice
    // removes one boundary crossing, so this terminates.
    loop {
        let boundary_ep = channels.iter().find_map(|c| {
            [&c.source, &c.sink].into_iter().find(|ep| {
                ep.actor_name().is_some_and(|a| boundary_actors.contains(a))
            })
        });
        let Some(ep) = boundary_ep.cloned() else { break };

        let upstream = channels.iter().position(|c| c.sink == ep);
        let downstream = channels.iter().position(|c| c.source == ep);
        let (actor, port) = match &ep {
            Endpoint::ActorPort { actor, port } => (actor.clone(), port.clone()),
            Endpoint::NetworkPort { .. } => unreachable!("boundary points are actor endpoints"),
        };
        let (Some(up), Some(down)) = (upstream, downstream) else {
            let side = if upstream.is_none() { "outer" } else { "inner" };
            return Err(FlattenError::DanglingBoundary { actor, port, side });
        };
        let merged = Channel {
            source: channels[up].source.clone(),
            sink: channels[down].sink.clone(),
            // The two halves model the same physical buffer seen from
            // both sides of the boundary; keep the larger requirement.
            fifo_depth: channels[up].fifo_depth.max(channels[down].fifo_depth),
        };
        let (first, second) = if up > down { (up, down) } else { (down, up) };
        channels.remove(first);
        channels.remove(second);
        channels.push(merged);
    }

    out.channels = channels;

    let mut seen = BTreeSet::new();
    for a in &out.actors {
        if !seen.insert(a.instance_name.clone()) {
            return Err(FlattenError::NameCollision { name: a.instance_name.clone() });
        }
    }
    Ok(out)
}
