//! Structural validation of dataflow networks.
//!
//! `validate` never fails; it returns one diagnostic per violated
//! invariant. An empty list means the network is well-formed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{ActorKind, DataflowNetwork, Endpoint, PortDirection};

/// What a diagnostic is about; stable for tests and machine consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    DuplicateActor,
    DuplicateIoPort,
    DuplicateActorPort,
    UnknownEndpoint,
    WidthMismatch,
    DirectionMismatch,
    MultipleChannels,
    DanglingPort,
    SboxShape,
    BoundaryMismatch,
}

/// One invariant violation, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Key of the offending element (actor, port, or endpoint key).
    pub element: String,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, element: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { kind, element: element.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Check every structural invariant; empty result means valid.
pub fn validate(net: &DataflowNetwork) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    validate_into(net, "", &mut out);
    out
}

fn validate_into(net: &DataflowNetwork, path: &str, out: &mut Vec<Diagnostic>) {
    let at = |name: &str| {
        if path.is_empty() {
            name.to_string()
        } else {
            format!("{path}/{name}")
        }
    };

    // Unique names.
    let mut seen = BTreeMap::new();
    for a in &net.actors {
        *seen.entry(a.instance_name.as_str()).or_insert(0u32) += 1;
    }
    for (name, count) in &seen {
        if *count > 1 {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateActor,
                at(name),
                format!("actor name `{name}` used {count} times"),
            ));
        }
    }
    let mut seen_io = BTreeMap::new();
    for p in &net.io_ports {
        *seen_io.entry(p.name.as_str()).or_insert(0u32) += 1;
    }
    for (name, count) in &seen_io {
        if *count > 1 {
            out.push(Diagnostic::new(
                DiagnosticKind::DuplicateIoPort,
                at(&format!("@{name}")),
                format!("network port `{name}` declared {count} times"),
            ));
        }
    }
    for a in &net.actors {
        let mut seen_p = BTreeMap::new();
        for p in &a.ports {
            *seen_p.entry(p.name.as_str()).or_insert(0u32) += 1;
        }
        for (name, count) in &seen_p {
            if *count > 1 {
                out.push(Diagnostic::new(
                    DiagnosticKind::DuplicateActorPort,
                    at(&format!("{}.{}", a.instance_name, name)),
                    format!("port `{name}` declared {count} times on `{}`", a.instance_name),
                ));
            }
        }
    }

    // SBox shapes.
    for a in &net.actors {
        let (want_in, want_out) = match a.kind {
            ActorKind::Sbox2x1 => (2, 1),
            ActorKind::Sbox1x2 => (1, 2),
            _ => continue,
        };
        let data_in = a.input_ports().filter(|p| !p.open).count();
        let data_out = a.output_ports().count();
        let selectors = a.ports.iter().filter(|p| p.open && p.name == "sel").count();
        if data_in != want_in || data_out != want_out || selectors != 1 {
            out.push(Diagnostic::new(
                DiagnosticKind::SboxShape,
                at(&a.instance_name),
                format!(
                    "sbox `{}` has {data_in} data inputs / {data_out} outputs / {selectors} selectors, expected {want_in}/{want_out}/1",
                    a.instance_name
                ),
            ));
        }
    }

    // Channel endpoints resolve, widths agree, directions agree.
    for c in &net.channels {
        let src_w = net.endpoint_width(&c.source);
        let snk_w = net.endpoint_width(&c.sink);
        for (ep, w) in [(&c.source, src_w), (&c.sink, snk_w)] {
            if w.is_none() {
                out.push(Diagnostic::new(
                    DiagnosticKind::UnknownEndpoint,
                    at(&ep.key()),
                    format!("channel endpoint `{}` does not resolve to a port", ep.key()),
                ));
            }
        }
        if let (Some(sw), Some(kw)) = (src_w, snk_w) {
            if sw != kw {
                out.push(Diagnostic::new(
                    DiagnosticKind::WidthMismatch,
                    at(&format!("{}->{}", c.source.key(), c.sink.key())),
                    format!(
                        "channel `{}` -> `{}` joins widths {sw} and {kw}",
                        c.source.key(),
                        c.sink.key()
                    ),
                ));
            }
        }
        if net.endpoint_is_source(&c.source) == Some(false) {
            out.push(Diagnostic::new(
                DiagnosticKind::DirectionMismatch,
                at(&c.source.key()),
                format!("channel source `{}` is not a data source", c.source.key()),
            ));
        }
        if net.endpoint_is_source(&c.sink) == Some(true) {
            out.push(Diagnostic::new(
                DiagnosticKind::DirectionMismatch,
                at(&c.sink.key()),
                format!("channel sink `{}` is not a data sink", c.sink.key()),
            ));
        }
    }

    // Point-to-point: at most one channel per endpoint on either side.
    let mut incoming: BTreeMap<String, u32> = BTreeMap::new();
    let mut outgoing: BTreeMap<String, u32> = BTreeMap::new();
    for c in &net.channels {
        *incoming.entry(c.sink.key()).or_insert(0) += 1;
        *outgoing.entry(c.source.key()).or_insert(0) += 1;
    }
    for (key, count) in &incoming {
        if *count > 1 {
            out.push(Diagnostic::new(
                DiagnosticKind::MultipleChannels,
                at(key),
                format!("port `{key}` has {count} incoming channels; channels are point-to-point"),
            ));
        }
    }
    for (key, count) in &outgoing {
        if *count > 1 {
            out.push(Diagnostic::new(
                DiagnosticKind::MultipleChannels,
                at(key),
                format!(
                    "port `{key}` drives {count} channels; use an explicit fanout actor for one-to-many"
                ),
            ));
        }
    }

    // Dangling ports: every declared non-open port carries a channel.
    for a in &net.actors {
        for p in &a.ports {
            if p.open {
                continue;
            }
            let key = Endpoint::actor(&a.instance_name, &p.name).key();
            let connected = match p.direction {
                PortDirection::In => incoming.contains_key(&key),
                PortDirection::Out => outgoing.contains_key(&key),
            };
            if !connected {
                out.push(Diagnostic::new(
                    DiagnosticKind::DanglingPort,
                    at(&key),
                    format!("port `{key}` is neither connected nor marked open"),
                ));
            }
        }
    }
    for p in &net.io_ports {
        let key = Endpoint::network(&p.name).key();
        let connected = match p.direction {
            PortDirection::In => outgoing.contains_key(&key),
            PortDirection::Out => incoming.contains_key(&key),
        };
        if !connected {
            out.push(Diagnostic::new(
                DiagnosticKind::DanglingPort,
                at(&key),
                format!("network port `{}` is not connected", p.name),
            ));
        }
    }

    // Hierarchy: boundary contract and recursive validation.
    for a in &net.actors {
        if let ActorKind::Hierarchical(sub) = &a.kind {
            for p in &a.ports {
                match sub.io_port(&p.name) {
                    None => out.push(Diagnostic::new(
                        DiagnosticKind::BoundaryMismatch,
                        at(&format!("{}.{}", a.instance_name, p.name)),
                        format!(
                            "hierarchical actor `{}` declares port `{}` absent from sub-network `{}`",
                            a.instance_name, p.name, sub.name
                        ),
                    )),
                    Some(sp) => {
                        if sp.width != p.width || sp.direction != p.direction {
                            out.push(Diagnostic::new(
                                DiagnosticKind::BoundaryMismatch,
                                at(&format!("{}.{}", a.instance_name, p.name)),
                                format!(
                                    "boundary port `{}` of `{}` disagrees with sub-network declaration",
                                    p.name, a.instance_name
                                ),
                            ));
                        }
                    }
                }
            }
            validate_into(sub, &at(&a.instance_name), out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::model::{Actor, ActorPort, Channel, NetworkPort};

    fn port(dir: PortDirection, name: &str, width: u32) -> ActorPort {
        ActorPort { direction: dir, name: name.into(), width, open: false }
    }

    fn chain_net() -> DataflowNetwork {
        // @in -> a -> b -> @out, all width 8
        let mut n = DataflowNetwork::new("chain");
        n.io_ports = vec![
            NetworkPort { direction: PortDirection::In, name: "in".into(), width: 8 },
            NetworkPort { direction: PortDirection::Out, name: "out".into(), width: 8 },
        ];
        n.actors = vec![
            Actor::atomic("a", "ta", vec![port(PortDirection::In, "i", 8), port(PortDirection::Out, "o", 8)]),
            Actor::atomic("b", "tb", vec![port(PortDirection::In, "i", 8), port(PortDirection::Out, "o", 8)]),
        ];
        n.channels = vec![
            Channel { source: Endpoint::network("in"), sink: Endpoint::actor("a", "i"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("a", "o"), sink: Endpoint::actor("b", "i"), fifo_depth: 1 },
            Channel { source: Endpoint::actor("b", "o"), sink: Endpoint::network("out"), fifo_depth: 1 },
        ];
        n
    }

    #[test]
    fn valid_network_yields_no_diagnostics() {
        assert_eq!(validate(&chain_net()), vec![]);
    }

    #[test]
    fn width_mismatch_cites_both_endpoints() {
        let mut n = chain_net();
        n.actor_mut("b").unwrap().ports[0].width = 16;
        let diags = validate(&n);
        let wm: Vec<_> = diags.iter().filter(|d| d.kind == DiagnosticKind::WidthMismatch).collect();
        assert_eq!(wm.len(), 1);
        assert!(wm[0].message.contains("a.o") && wm[0].message.contains("b.i"));
    }

    #[test]
    fn duplicate_actor_yields_one_diagnostic_per_name() {
        let mut n = chain_net();
        let mut dup = n.actors[0].clone();
        dup.ports.iter_mut().for_each(|p| p.open = true);
        n.actors.push(dup);
        let diags = validate(&n);
        assert_eq!(
            diags.iter().filter(|d| d.kind == DiagnosticKind::DuplicateActor).count(),
            1
        );
    }

    #[test]
    fn two_channels_into_one_port_names_the_port() {
        let mut n = chain_net();
        n.channels.push(Channel {
            source: Endpoint::actor("b", "o"),
            sink: Endpoint::actor("b", "i"),
            fifo_depth: 1,
        });
        let diags = validate(&n);
        assert!(diags
            .iter()
            .any(|d| d.kind == DiagnosticKind::MultipleChannels && d.element == "b.i"));
    }

    #[test]
    fn dangling_port_detected_unless_open() {
        let mut n = chain_net();
        n.actors[1].ports.push(port(PortDirection::In, "spare", 8));
        let diags = validate(&n);
        assert!(diags
            .iter()
            .any(|d| d.kind == DiagnosticKind::DanglingPort && d.element == "b.spare"));

        n.actors[1].ports.last_mut().unwrap().open = true;
        assert_eq!(validate(&n), vec![]);
    }
}
