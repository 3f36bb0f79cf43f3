//! Graph types for dataflow networks.

use serde::{Deserialize, Serialize};

/// Direction of a port relative to its owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDirection {
    In,
    Out,
}

impl PortDirection {
    pub fn flipped(self) -> Self {
        match self {
            PortDirection::In => PortDirection::Out,
            PortDirection::Out => PortDirection::In,
        }
    }
}

/// An I/O port of the network itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkPort {
    pub direction: PortDirection,
    pub name: String,
    pub width: u32,
}

/// A data port of an actor instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorPort {
    pub direction: PortDirection,
    pub name: String,
    pub width: u32,
    /// Ports marked open are legal without an attached channel
    /// (e.g. SBox selector pins, wired later by the backend).
    #[serde(default, skip_serializing_if = "is_false")]
    pub open: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// What an actor instance is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorKind {
    /// Opaque processing element backed by external HDL.
    Atomic,
    /// Encloses a sub-network; removed by flattening.
    Hierarchical(Box<DataflowNetwork>),
    /// Switching box forking one path into two.
    Sbox1x2,
    /// Switching box joining two paths into one.
    Sbox2x1,
    /// Explicit one-to-many copy actor.
    Fanout,
}

impl ActorKind {
    pub fn is_sbox(&self) -> bool {
        matches!(self, ActorKind::Sbox1x2 | ActorKind::Sbox2x1)
    }
}

/// An actor instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub instance_name: String,
    /// Key into the external HDL component library. Parameterized
    /// actors bake their parameters into this key, so equal types
    /// imply interchangeable hardware.
    pub component_type: String,
    pub ports: Vec<ActorPort>,
    pub kind: ActorKind,
}

impl Actor {
    pub fn atomic(name: &str, component_type: &str, ports: Vec<ActorPort>) -> Self {
        Actor {
            instance_name: name.to_string(),
            component_type: component_type.to_string(),
            ports,
            kind: ActorKind::Atomic,
        }
    }

    /// 2-to-1 switching box: data inputs `in0`/`in1`, output `out`,
    /// selector `sel` (left open; driven by the configuration LUT).
    pub fn sbox_2x1(name: &str, width: u32) -> Self {
        Actor {
            instance_name: name.to_string(),
            component_type: format!("sbox2x1_{width}"),
            ports: vec![
                ActorPort { direction: PortDirection::In, name: "in0".into(), width, open: false },
                ActorPort { direction: PortDirection::In, name: "in1".into(), width, open: false },
                ActorPort { direction: PortDirection::Out, name: "out".into(), width, open: false },
                ActorPort { direction: PortDirection::In, name: "sel".into(), width: 1, open: true },
            ],
            kind: ActorKind::Sbox2x1,
        }
    }

    /// 1-to-2 switching box: data input `in`, outputs `out0`/`out1`,
    /// selector `sel` (left open; driven by the configuration LUT).
    pub fn sbox_1x2(name: &str, width: u32) -> Self {
        Actor {
            instance_name: name.to_string(),
            component_type: format!("sbox1x2_{width}"),
            ports: vec![
                ActorPort { direction: PortDirection::In, name: "in".into(), width, open: false },
                ActorPort { direction: PortDirection::Out, name: "out0".into(), width, open: false },
                ActorPort { direction: PortDirection::Out, name: "out1".into(), width, open: false },
                ActorPort { direction: PortDirection::In, name: "sel".into(), width: 1, open: true },
            ],
            kind: ActorKind::Sbox1x2,
        }
    }

    pub fn port(&self, name: &str) -> Option<&ActorPort> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// Ordered port signature: equality of `(component_type, signature)`
    /// is the actor interchangeability criterion used by merging.
    pub fn port_signature(&self) -> Vec<(PortDirection, &str, u32)> {
        self.ports
            .iter()
            .map(|p| (p.direction, p.name.as_str(), p.width))
            .collect()
    }

    pub fn input_ports(&self) -> impl Iterator<Item = &ActorPort> {
        self.ports.iter().filter(|p| p.direction == PortDirection::In)
    }

    pub fn output_ports(&self) -> impl Iterator<Item = &ActorPort> {
        self.ports.iter().filter(|p| p.direction == PortDirection::Out)
    }
}

/// One end of a channel: either an actor port or a network I/O port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    ActorPort { actor: String, port: String },
    NetworkPort { port: String },
}

impl Endpoint {
    pub fn actor(actor: &str, port: &str) -> Self {
        Endpoint::ActorPort { actor: actor.to_string(), port: port.to_string() }
    }

    pub fn network(port: &str) -> Self {
        Endpoint::NetworkPort { port: port.to_string() }
    }

    /// Stable textual key, unique per endpoint within a network.
    /// Network ports are prefixed with `@` so they cannot collide with
    /// actor endpoints.
    pub fn key(&self) -> String {
        match self {
            Endpoint::ActorPort { actor, port } => format!("{actor}.{port}"),
            Endpoint::NetworkPort { port } => format!("@{port}"),
        }
    }

    pub fn actor_name(&self) -> Option<&str> {
        match self {
            Endpoint::ActorPort { actor, .. } => Some(actor),
            Endpoint::NetworkPort { .. } => None,
        }
    }

    pub fn port_name(&self) -> &str {
        match self {
            Endpoint::ActorPort { port, .. } => port,
            Endpoint::NetworkPort { port } => port,
        }
    }
}

/// A point-to-point FIFO channel. `fifo_depth` 0 means a plain
/// combinatorial wire. Sizing is fixed before merging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub source: Endpoint,
    pub sink: Endpoint,
    #[serde(default = "default_fifo_depth")]
    pub fifo_depth: u32,
}

pub(crate) fn default_fifo_depth() -> u32 {
    1
}

/// A dataflow process network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataflowNetwork {
    pub name: String,
    #[serde(default)]
    pub actors: Vec<Actor>,
    #[serde(default)]
    pub channels: Vec<Channel>,
    #[serde(default)]
    pub io_ports: Vec<NetworkPort>,
}

impl DataflowNetwork {
    pub fn new(name: &str) -> Self {
        DataflowNetwork {
            name: name.to_string(),
            actors: Vec::new(),
            channels: Vec::new(),
            io_ports: Vec::new(),
        }
    }

    pub fn actor(&self, name: &str) -> Option<&Actor> {
        self.actors.iter().find(|a| a.instance_name == name)
    }

    pub fn actor_mut(&mut self, name: &str) -> Option<&mut Actor> {
        self.actors.iter_mut().find(|a| a.instance_name == name)
    }

    pub fn io_port(&self, name: &str) -> Option<&NetworkPort> {
        self.io_ports.iter().find(|p| p.name == name)
    }

    /// The unique channel whose sink is `ep`, if any.
    pub fn channel_into(&self, ep: &Endpoint) -> Option<&Channel> {
        self.channels.iter().find(|c| &c.sink == ep)
    }

    /// The unique channel whose source is `ep`, if any.
    pub fn channel_out_of(&self, ep: &Endpoint) -> Option<&Channel> {
        self.channels.iter().find(|c| &c.source == ep)
    }

    /// Width of the port an endpoint refers to, if the endpoint resolves.
    pub fn endpoint_width(&self, ep: &Endpoint) -> Option<u32> {
        match ep {
            Endpoint::ActorPort { actor, port } => {
                self.actor(actor).and_then(|a| a.port(port)).map(|p| p.width)
            }
            Endpoint::NetworkPort { port } => self.io_port(port).map(|p| p.width),
        }
    }

    /// Whether the endpoint is a data source (actor out port or network
    /// in port). `None` if it does not resolve.
    pub fn endpoint_is_source(&self, ep: &Endpoint) -> Option<bool> {
        match ep {
            Endpoint::ActorPort { actor, port } => self
                .actor(actor)
                .and_then(|a| a.port(port))
                .map(|p| p.direction == PortDirection::Out),
            Endpoint::NetworkPort { port } => {
                self.io_port(port).map(|p| p.direction == PortDirection::In)
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        self.actors
            .iter()
            .all(|a| !matches!(a.kind, ActorKind::Hierarchical(_)))
    }

    pub fn sbox_actors(&self) -> impl Iterator<Item = &Actor> {
        self.actors.iter().filter(|a| a.kind.is_sbox())
    }
}
