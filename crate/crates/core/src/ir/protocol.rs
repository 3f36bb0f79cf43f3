//! Inter-actor communication protocol description.
//!
//! The HDL backend expands every logical channel into one physical
//! signal per protocol role. The protocol is read from a
//! `*.protocol.xml` file; when none is given a handshake in the
//! RVC-CAL style (data, valid, ack, full) is used.

use serde::{Deserialize, Serialize};

use super::parse::ParseError;

/// Semantic role of a physical signal within a channel bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalRole {
    /// The payload; exactly one per port.
    Data,
    /// Producer-side strobe (valid/push).
    Valid,
    /// Consumer-side backpressure (ready/full).
    Ready,
    /// Consumer acknowledge.
    Ack,
}

impl SignalRole {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "data" => Some(SignalRole::Data),
            "valid" | "push" => Some(SignalRole::Valid),
            "ready" | "full" => Some(SignalRole::Ready),
            "ack" => Some(SignalRole::Ack),
            _ => None,
        }
    }
}

/// Which way a signal travels relative to the data flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthRule {
    /// Signal is as wide as the data port.
    PortWidth,
    /// Fixed width in bits.
    Bits(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub role: SignalRole,
    /// Name suffix appended to port and wire names.
    pub suffix: String,
    pub width: WidthRule,
    pub direction: FlowDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub handshake: String,
    pub clock: String,
    pub reset: String,
    pub signals: Vec<SignalSpec>,
}

impl ProtocolSpec {
    pub fn signal(&self, role: SignalRole) -> Option<&SignalSpec> {
        self.signals.iter().find(|s| s.role == role)
    }

    pub fn forward_signals(&self) -> impl Iterator<Item = &SignalSpec> {
        self.signals.iter().filter(|s| s.direction == FlowDirection::Forward)
    }

    pub fn backward_signals(&self) -> impl Iterator<Item = &SignalSpec> {
        self.signals.iter().filter(|s| s.direction == FlowDirection::Backward)
    }
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec {
            handshake: "rvc-cal".into(),
            clock: "clk".into(),
            reset: "rst".into(),
            signals: vec![
                SignalSpec {
                    role: SignalRole::Data,
                    suffix: "data".into(),
                    width: WidthRule::PortWidth,
                    direction: FlowDirection::Forward,
                },
                SignalSpec {
                    role: SignalRole::Valid,
                    suffix: "valid".into(),
                    width: WidthRule::Bits(1),
                    direction: FlowDirection::Forward,
                },
                SignalSpec {
                    role: SignalRole::Ack,
                    suffix: "ack".into(),
                    width: WidthRule::Bits(1),
                    direction: FlowDirection::Backward,
                },
                SignalSpec {
                    role: SignalRole::Ready,
                    suffix: "full".into(),
                    width: WidthRule::Bits(1),
                    direction: FlowDirection::Backward,
                },
            ],
        }
    }
}

/// Read a `*.protocol.xml` document.
///
/// ```xml
/// <protocol handshake="rvc-cal">
///   <clock name="clk"/>
///   <reset name="rst"/>
///   <signal role="data" suffix="data" width="port" direction="forward"/>
///   <signal role="valid" suffix="valid" width="1" direction="forward"/>
/// </protocol>
/// ```
pub fn parse_protocol(source: &str) -> Result<ProtocolSpec, ParseError> {
    let doc = roxmltree::Document::parse(source).map_err(|e| ParseError::Syntax {
        position: format!("{}:{}", e.pos().row, e.pos().col),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    let bad = |msg: String| ParseError::Syntax { position: "protocol".into(), message: msg };
    if root.tag_name().name() != "protocol" {
        return Err(bad("root element must be <protocol>".into()));
    }

    let mut spec = ProtocolSpec {
        handshake: root.attribute("handshake").unwrap_or("custom").to_string(),
        clock: "clk".into(),
        reset: "rst".into(),
        signals: Vec::new(),
    };
    for child in root.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "clock" => spec.clock = child.attribute("name").unwrap_or("clk").to_string(),
            "reset" => spec.reset = child.attribute("name").unwrap_or("rst").to_string(),
            "signal" => {
                let role_s = child
                    .attribute("role")
                    .ok_or_else(|| bad("signal misses `role`".into()))?;
                let role = SignalRole::parse(role_s)
                    .ok_or_else(|| bad(format!("unknown signal role `{role_s}`")))?;
                let width = match child.attribute("width").unwrap_or("port") {
                    "port" => WidthRule::PortWidth,
                    n => WidthRule::Bits(
                        n.parse().map_err(|_| bad(format!("invalid signal width `{n}`")))?,
                    ),
                };
                let direction = match child.attribute("direction").unwrap_or("forward") {
                    "forward" => FlowDirection::Forward,
                    "backward" => FlowDirection::Backward,
                    other => return Err(bad(format!("invalid direction `{other}`"))),
                };
                spec.signals.push(SignalSpec {
                    role,
                    suffix: child.attribute("suffix").unwrap_or(role_s).to_string(),
                    width,
                    direction,
                });
            }
            other => return Err(bad(format!("unexpected element <{other}>"))),
        }
    }

    // Exactly one data-role signal; every role named at most once.
    let data_count = spec.signals.iter().filter(|s| s.role == SignalRole::Data).count();
    if data_count != 1 {
        return Err(bad(format!("protocol must declare exactly one data signal, got {data_count}")));
    }
    let mut roles: Vec<SignalRole> = spec.signals.iter().map(|s| s.role).collect();
    roles.sort();
    let before = roles.len();
    roles.dedup();
    if roles.len() != before {
        return Err(bad("a signal role is declared more than once".into()));
    }
    Ok(spec)
}
