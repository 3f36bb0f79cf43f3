//! Labeled graph isomorphism between flattened networks.
//!
//! Two networks are isomorphic when a bijection over their actors
//! preserves component types, port signatures, and channel structure
//! (including port names and network port attachment). Network I/O
//! ports are interface: they match by name, never by bijection. Buffer
//! depths are not part of the label set.
//!
//! Labels make realistic netlists nearly rigid, so a color-refinement
//! pass (iterated neighborhood hashing) usually leaves singleton
//! classes; a backtracking pass resolves whatever symmetry remains.

use std::collections::BTreeMap;

use crate::ir::{Actor, Channel, DataflowNetwork, Endpoint};

/// The witness bijection from actors of `a` to actors of `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoWitness {
    pub actor_map: BTreeMap<String, String>,
}

/// Find a label-preserving bijection, or `None` when the networks are
/// not isomorphic.
pub fn isomorphic_labeled(a: &DataflowNetwork, b: &DataflowNetwork) -> Option<IsoWitness> {
    if a.actors.len() != b.actors.len() || a.channels.len() != b.channels.len() {
        return None;
    }
    let mut io_a: Vec<_> = a.io_ports.iter().map(|p| (p.name.clone(), p.direction, p.width)).collect();
    let mut io_b: Vec<_> = b.io_ports.iter().map(|p| (p.name.clone(), p.direction, p.width)).collect();
    io_a.sort();
    io_b.sort();
    if io_a != io_b {
        return None;
    }

    let colors_a = refine(a);
    let colors_b = refine(b);
    let mut class_sizes_a: BTreeMap<&str, usize> = BTreeMap::new();
    let mut class_sizes_b: BTreeMap<&str, usize> = BTreeMap::new();
    for c in colors_a.values() {
        *class_sizes_a.entry(c).or_insert(0) += 1;
    }
    for c in colors_b.values() {
        *class_sizes_b.entry(c).or_insert(0) += 1;
    }
    if class_sizes_a != class_sizes_b {
        return None;
    }

    // Most-constrained-first assignment order.
    let mut order: Vec<&Actor> = a.actors.iter().collect();
    order.sort_by_key(|x| {
        (
            class_sizes_a[colors_a[&x.instance_name].as_str()],
            x.instance_name.clone(),
        )
    });

    let mut assignment: BTreeMap<String, String> = BTreeMap::new();
    let mut used: BTreeMap<String, String> = BTreeMap::new();
    if assign(a, b, &colors_a, &colors_b, &order, 0, &mut assignment, &mut used) {
        Some(IsoWitness { actor_map: assignment })
    } else {
        None
    }
}

/// Edge labels as seen from one endpoint.
fn channel_tuple(c: &Channel) -> (String, String, String, String) {
    let side = |ep: &Endpoint| match ep {
        Endpoint::ActorPort { actor, port } => (actor.clone(), port.clone()),
        Endpoint::NetworkPort { port } => ("@".to_string(), port.clone()),
    };
    let (sa, sp) = side(&c.source);
    let (ka, kp) = side(&c.sink);
    (sa, sp, ka, kp)
}

fn actor_label(a: &Actor) -> String {
    let sig: Vec<String> = a
        .port_signature()
        .iter()
        .map(|(d, n, w)| format!("{d:?}:{n}:{w}"))
        .collect();
    format!("{}|{}", a.component_type, sig.join(","))
}

/// Iterated color refinement over actor labels and neighborhoods.
fn refine(net: &DataflowNetwork) -> BTreeMap<String, String> {
    let mut colors: BTreeMap<String, String> = net
        .actors
        .iter()
        .map(|a| (a.instance_name.clone(), actor_label(a)))
        .collect();

    for _ in 0..net.actors.len().max(1) {
        let mut next: BTreeMap<String, String> = BTreeMap::new();
        for a in &net.actors {
            let mut neigh: Vec<String> = Vec::new();
            for c in &net.channels {
                let (sa, sp, ka, kp) = channel_tuple(c);
                if sa == a.instance_name {
                    let peer = if ka == "@" {
                        format!("@{kp}")
                    } else {
                        colors[&ka].clone()
                    };
                    neigh.push(format!(">{sp}:{kp}:{peer}"));
                } else if ka == a.instance_name {
                    let peer = if sa == "@" {
                        format!("@{sp}")
                    } else {
                        colors[&sa].clone()
                    };
                    neigh.push(format!("<{kp}:{sp}:{peer}"));
                }
            }
            neigh.sort();
            next.insert(
                a.instance_name.clone(),
                format!("{}#{}", colors[&a.instance_name], neigh.join(";")),
            );
        }
        if stable(&colors, &next) {
            break;
        }
        colors = next;
    }
    colors
}

/// Same partition into classes, even if color strings grew.
fn stable(prev: &BTreeMap<String, String>, next: &BTreeMap<String, String>) -> bool {
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (name, c) in prev {
        groups.entry(c).or_default().push(name);
    }
    let mut groups_next: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (name, c) in next {
        groups_next.entry(c).or_default().push(name);
    }
    let mut parts: Vec<Vec<&str>> = groups.into_values().collect();
    let mut parts_next: Vec<Vec<&str>> = groups_next.into_values().collect();
    parts.sort();
    parts_next.sort();
    parts == parts_next
}

#[allow(clippy::too_many_arguments)]
fn assign(
    a: &DataflowNetwork,
    b: &DataflowNetwork,
    colors_a: &BTreeMap<String, String>,
    colors_b: &BTreeMap<String, String>,
    order: &[&Actor],
    idx: usize,
    assignment: &mut BTreeMap<String, String>,
    used: &mut BTreeMap<String, String>,
) -> bool {
    if idx == order.len() {
        return channels_correspond(a, b, assignment);
    }
    let x = order[idx];
    let color = &colors_a[&x.instance_name];
    let mut candidates: Vec<&Actor> = b
        .actors
        .iter()
        .filter(|y| !used.contains_key(&y.instance_name) && &colors_b[&y.instance_name] == color)
        .collect();
    candidates.sort_by_key(|y| y.instance_name.clone());
    for y in candidates {
        assignment.insert(x.instance_name.clone(), y.instance_name.clone());
        used.insert(y.instance_name.clone(), x.instance_name.clone());
        if consistent_so_far(a, b, assignment, &x.instance_name)
            && assign(a, b, colors_a, colors_b, order, idx + 1, assignment, used)
        {
            return true;
        }
        assignment.remove(&x.instance_name);
        used.remove(&y.instance_name);
    }
    false
}

/// Channels of `a` incident to `just_assigned` whose both endpoints
/// are assigned must exist in `b` under the mapping, and with equal
/// incident-channel counts there is no need to check the converse.
fn consistent_so_far(
    a: &DataflowNetwork,
    b: &DataflowNetwork,
    assignment: &BTreeMap<String, String>,
    just_assigned: &str,
) -> bool {
    for c in &a.channels {
        let (sa, sp, ka, kp) = channel_tuple(c);
        if sa != just_assigned && ka != just_assigned {
            continue;
        }
        let mapped_src = if sa == "@" {
            Some(Endpoint::network(&sp))
        } else {
            assignment.get(&sa).map(|m| Endpoint::actor(m, &sp))
        };
        let mapped_sink = if ka == "@" {
            Some(Endpoint::network(&kp))
        } else {
            assignment.get(&ka).map(|m| Endpoint::actor(m, &kp))
        };
        if let (Some(src), Some(sink)) = (mapped_src, mapped_sink) {
            if !b.channels.iter().any(|cb| cb.source == src && cb.sink == sink) {
                return false;
            }
        }
    }
    true
}

/// Full structural check: mapping every channel of `a` yields exactly
/// the channel set of `b` (buffer depths excluded).
fn channels_correspond(
    a: &DataflowNetwork,
    b: &DataflowNetwork,
    assignment: &BTreeMap<String, String>,
) -> bool {
    let map_ep = |ep: &Endpoint| -> Option<Endpoint> {
        match ep {
            Endpoint::ActorPort { actor, port } => {
                assignment.get(actor).map(|m| Endpoint::actor(m, port))
            }
            Endpoint::NetworkPort { port } => Some(Endpoint::network(port)),
        }
    };
    let mut mapped: Vec<(String, String)> = Vec::with_capacity(a.channels.len());
    for c in &a.channels {
        let (Some(src), Some(sink)) = (map_ep(&c.source), map_ep(&c.sink)) else {
            return false;
        };
        mapped.push((src.key(), sink.key()));
    }
    let mut expected: Vec<(String, String)> = b
        .channels
        .iter()
        .map(|c| (c.source.key(), c.sink.key()))
        .collect();
    mapped.sort();
    expected.sort();
    mapped == expected
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ActorPort, NetworkPort, PortDirection};

    fn port(dir: PortDirection, name: &str) -> ActorPort {
        ActorPort { direction: dir, name: name.into(), width: 32, open: false }
    }

    fn io(dir: PortDirection, name: &str) -> NetworkPort {
        NetworkPort { direction: dir, name: name.into(), width: 32 }
    }

    fn unit(name: &str, ty: &str) -> Actor {
        Actor::atomic(name, ty, vec![port(PortDirection::In, "in"), port(PortDirection::Out, "out")])
    }

    fn chan(src: Endpoint, sink: Endpoint) -> Channel {
        Channel { source: src, sink, fifo_depth: 1 }
    }

    fn diamondish(name: &str, names: [&str; 3], ty_mid: &str) -> DataflowNetwork {
        // in -> n0 -> n1 -> out ; n0 -> n2 -> out2
        let mut n = DataflowNetwork::new(name);
        n.io_ports = vec![
            io(PortDirection::In, "in"),
            io(PortDirection::Out, "out"),
            io(PortDirection::Out, "out2"),
        ];
        n.actors = vec![
            Actor::atomic(
                names[0],
                "src",
                vec![
                    port(PortDirection::In, "in"),
                    port(PortDirection::Out, "o1"),
                    port(PortDirection::Out, "o2"),
                ],
            ),
            unit(names[1], ty_mid),
            unit(names[2], ty_mid),
        ];
        n.channels = vec![
            chan(Endpoint::network("in"), Endpoint::actor(names[0], "in")),
            chan(Endpoint::actor(names[0], "o1"), Endpoint::actor(names[1], "in")),
            chan(Endpoint::actor(names[0], "o2"), Endpoint::actor(names[2], "in")),
            chan(Endpoint::actor(names[1], "out"), Endpoint::network("out")),
            chan(Endpoint::actor(names[2], "out"), Endpoint::network("out2")),
        ];
        n
    }

    #[test]
    fn network_is_isomorphic_to_itself_with_identity_witness() {
        let n = diamondish("n", ["a", "b", "c"], "mid");
        let w = isomorphic_labeled(&n, &n).unwrap();
        for (k, v) in &w.actor_map {
            assert_eq!(k, v);
        }
    }

    #[test]
    fn renamed_instances_are_isomorphic() {
        let a = diamondish("a", ["x", "y", "z"], "mid");
        let b = diamondish("b", ["p", "q", "r"], "mid");
        let w = isomorphic_labeled(&a, &b).unwrap();
        assert_eq!(w.actor_map["x"], "p");
        // y and z are distinguished by which output port feeds them.
        assert_eq!(w.actor_map["y"], "q");
        assert_eq!(w.actor_map["z"], "r");
    }

    #[test]
    fn redirected_channel_breaks_isomorphism() {
        let a = diamondish("a", ["x", "y", "z"], "mid");
        let mut b = diamondish("b", ["x", "y", "z"], "mid");
        // Swap which source port feeds y and z.
        for c in &mut b.channels {
            if c.source == Endpoint::actor("x", "o1") {
                c.sink = Endpoint::actor("z", "in");
            } else if c.source == Endpoint::actor("x", "o2") {
                c.sink = Endpoint::actor("y", "in");
            }
        }
        // y/z feed different network ports, so the swap is structural.
        assert!(isomorphic_labeled(&a, &b).is_none());
    }

    #[test]
    fn differing_component_type_breaks_isomorphism() {
        let a = diamondish("a", ["x", "y", "z"], "mid");
        let b = diamondish("b", ["x", "y", "z"], "other");
        assert!(isomorphic_labeled(&a, &b).is_none());
    }

    #[test]
    fn fifo_depths_are_not_labels() {
        let a = diamondish("a", ["x", "y", "z"], "mid");
        let mut b = diamondish("b", ["x", "y", "z"], "mid");
        for c in &mut b.channels {
            c.fifo_depth = 9;
        }
        assert!(isomorphic_labeled(&a, &b).is_some());
    }

    #[test]
    fn symmetric_instances_still_match() {
        // Two interchangeable parallel actors both wired to the same
        // fanout-ish source and the same io ports cannot be told apart
        // by refinement; backtracking must find a witness.
        let mut a = DataflowNetwork::new("a");
        a.io_ports = vec![io(PortDirection::In, "i0"), io(PortDirection::In, "i1"),
                          io(PortDirection::Out, "o0"), io(PortDirection::Out, "o1")];
        a.actors = vec![unit("m0", "t"), unit("m1", "t")];
        a.channels = vec![
            chan(Endpoint::network("i0"), Endpoint::actor("m0", "in")),
            chan(Endpoint::network("i1"), Endpoint::actor("m1", "in")),
            chan(Endpoint::actor("m0", "out"), Endpoint::network("o0")),
            chan(Endpoint::actor("m1", "out"), Endpoint::network("o1")),
        ];
        let mut b = a.clone();
        b.name = "b".into();
        // Swap the roles of the two instances.
        for c in &mut b.channels {
            for ep in [&mut c.source, &mut c.sink] {
                if let Endpoint::ActorPort { actor, .. } = ep {
                    *actor = if actor == "m0" { "m1".into() } else { "m0".into() };
                }
            }
        }
        let w = isomorphic_labeled(&a, &b).unwrap();
        assert_eq!(w.actor_map["m0"], "m1");
    }
}
