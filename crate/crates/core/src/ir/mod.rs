//! Dataflow network intermediate representation.
//!
//! A network is a labeled directed graph of actors connected by
//! order-preserving point-to-point channels. Actors are opaque
//! processing elements; their bodies live in an external HDL component
//! library and are never inspected here.

mod flatten;
mod model;
mod parse;
mod protocol;
mod validate;
mod xdf;

pub use flatten::{flatten, FlattenError};
pub use model::{
    Actor, ActorKind, ActorPort, Channel, DataflowNetwork, Endpoint, NetworkPort, PortDirection,
};
pub use parse::{parse_network, to_json_string, NetworkFormat, ParseError};
pub use protocol::{
    parse_protocol, FlowDirection, ProtocolSpec, SignalRole, SignalSpec, WidthRule,
};
pub use validate::{validate, Diagnostic};
pub use xdf::to_xdf_string;
