//! FIFO placement around switching boxes.
//!
//! SBoxes are combinatorial multiplexers and never own buffers. The
//! buffering of a producer-to-consumer path that crosses sboxes lives
//! on exactly one channel of the path:
//!
//! * paths ending in a join chain keep the FIFO before the first
//!   2-to-1 sbox (on the incoming connection);
//! * paths through fork sboxes carry one FIFO per outgoing connection,
//!   i.e. on the channel leaving the last 1-to-2 sbox.
//!
//! Combined, the carrier is the channel following the last 1-to-2 sbox
//! of the path, or the channel leaving the producer when the path has
//! none. Every other channel of the path is a plain wire (depth 0), as
//! are channels into selector pins.

use std::collections::BTreeMap;

use crate::ir::{ActorKind, DataflowNetwork, Endpoint};

use super::multi::MultiDataflow;

/// Normalize buffer placement. Idempotent; networks without sboxes are
/// returned unchanged.
pub fn place_fifos(m: &MultiDataflow) -> MultiDataflow {
    let mut out = m.clone();
    let net = &mut out.base;

    let mut zero: Vec<usize> = Vec::new();
    let mut carriers: BTreeMap<usize, u32> = BTreeMap::new();

    for (idx, c) in net.channels.iter().enumerate() {
        if is_selector_pin(net, &c.sink) {
            zero.push(idx);
            continue;
        }
        // Path roots: non-sbox source feeding an sbox data port.
        if !endpoint_is_sbox(net, &c.source) && endpoint_is_sbox(net, &c.sink) {
            let mut path = vec![idx];
            walk_paths(net, idx, &mut path, &mut |path| {
                let depth = path.iter().map(|&i| net.channels[i].fifo_depth).max().unwrap_or(0);
                let carrier = path
                    .iter()
                    .rposition(|&i| sink_is_fork_input(net, &net.channels[i].sink))
                    .map(|last_fork| path[last_fork + 1])
                    .unwrap_or(path[0]);
                for &i in path {
                    zero.push(i);
                }
                // Merge-produced graphs give every path its own carrier;
                // fold with max so arbitrary graphs stay safe too.
                carriers.entry(carrier).and_modify(|d| *d = (*d).max(depth)).or_insert(depth);
            });
        }
    }

    for idx in zero {
        net.channels[idx].fifo_depth = 0;
    }
    for (idx, depth) in carriers {
        net.channels[idx].fifo_depth = depth;
    }
    out
}

fn endpoint_is_sbox(net: &DataflowNetwork, ep: &Endpoint) -> bool {
    ep.actor_name()
        .and_then(|a| net.actor(a))
        .is_some_and(|a| a.kind.is_sbox())
}

fn is_selector_pin(net: &DataflowNetwork, ep: &Endpoint) -> bool {
    endpoint_is_sbox(net, ep) && ep.port_name() == "sel"
}

fn sink_is_fork_input(net: &DataflowNetwork, ep: &Endpoint) -> bool {
    ep.actor_name()
        .and_then(|a| net.actor(a))
        .is_some_and(|a| matches!(a.kind, ActorKind::Sbox1x2))
        && ep.port_name() == "in"
}

/// Depth-first enumeration of sbox paths starting at channel
/// `path[0]`; `emit` is called once per complete producer-to-consumer
/// path. The channel at the top of `path` is the current frontier.
fn walk_paths(
    net: &DataflowNetwork,
    frontier: usize,
    path: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    let sink = net.channels[frontier].sink.clone();
    let Some(actor_name) = sink.actor_name() else {
        emit(path);
        return;
    };
    let Some(actor) = net.actor(actor_name) else {
        emit(path);
        return;
    };
    let outs: &[&str] = match actor.kind {
        ActorKind::Sbox2x1 => &["out"],
        ActorKind::Sbox1x2 => &["out0", "out1"],
        _ => {
            emit(path);
            return;
        }
    };
    for out in outs {
        let ep = Endpoint::actor(actor_name, out);
        let Some(next) = net.channels.iter().position(|c| c.source == ep) else { continue };
        if path.contains(&next) {
            continue;
        }
        path.push(next);
        walk_paths(net, next, path, emit);
        path.pop();
    }
}
