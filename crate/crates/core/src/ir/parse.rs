//! Network parsing: JSON (`*.df.json`) and an XDF-subset XML (`*.xdf`).
//!
//! Both formats describe the same information; schemas and examples
//! live in `docs/`. Parsing always validates: a returned network
//! satisfies every structural invariant.

use thiserror::Error;

use super::model::DataflowNetwork;
use super::validate::{validate, Diagnostic};
use super::xdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    Json,
    Xdf,
}

impl NetworkFormat {
    /// Guess from a file name; defaults to JSON.
    pub fn from_path(path: &str) -> Self {
        if path.ends_with(".xdf") || path.ends_with(".xml") {
            NetworkFormat::Xdf
        } else {
            NetworkFormat::Json
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: String, message: String },
    #[error("semantic error: {}", format_diagnostics(.0))]
    Semantic(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parse and validate a network document.
pub fn parse_network(source: &str, format: NetworkFormat) -> Result<DataflowNetwork, ParseError> {
    let net = match format {
        NetworkFormat::Json => serde_json::from_str::<DataflowNetwork>(source).map_err(|e| {
            ParseError::Syntax {
                position: format!("{}:{}", e.line(), e.column()),
                message: e.to_string(),
            }
        })?,
        NetworkFormat::Xdf => xdf::parse_xdf(source)?,
    };
    let diags = validate(&net);
    if diags.is_empty() {
        Ok(net)
    } else {
        Err(ParseError::Semantic(diags))
    }
}

/// Serialize to the JSON schema. `parse_network` of the result is the
/// identity on valid networks.
pub fn to_json_string(net: &DataflowNetwork) -> String {
    let mut s = serde_json::to_string_pretty(net).expect("network serialization cannot fail");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::model::{ActorKind, Endpoint};

    #[test]
    fn minimal_json_network_parses() {
        // One actor, one in port wired to it, one out port: |V|=1, |E|=2.
        let src = r#"{
            "name": "tiny",
            "actors": [{
                "instance_name": "A",
                "component_type": "acc",
                "ports": [
                    {"direction": "in", "name": "in", "width": 32},
                    {"direction": "out", "name": "out", "width": 32}
                ],
                "kind": "atomic"
            }],
            "channels": [
                {"source": {"port": "in"}, "sink": {"actor": "A", "port": "in"}},
                {"source": {"actor": "A", "port": "out"}, "sink": {"port": "out"}}
            ],
            "io_ports": [
                {"direction": "in", "name": "in", "width": 32},
                {"direction": "out", "name": "out", "width": 32}
            ]
        }"#;
        let net = parse_network(src, NetworkFormat::Json).unwrap();
        assert_eq!(net.actors.len(), 1);
        assert_eq!(net.channels.len(), 2);
        // fifo_depth defaults to 1 when absent.
        assert!(net.channels.iter().all(|c| c.fifo_depth == 1));
        assert!(matches!(net.actors[0].kind, ActorKind::Atomic));
    }

    #[test]
    fn json_syntax_error_reports_position() {
        let err = parse_network("{\"name\": ", NetworkFormat::Json).unwrap_err();
        match err {
            ParseError::Syntax { position, .. } => assert!(!position.is_empty()),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn two_channels_into_one_port_is_a_semantic_error_naming_the_port() {
        let src = r#"{
            "name": "bad",
            "actors": [{
                "instance_name": "A",
                "component_type": "acc",
                "ports": [
                    {"direction": "in", "name": "in", "width": 8},
                    {"direction": "out", "name": "out", "width": 8, "open": true}
                ],
                "kind": "atomic"
            }],
            "channels": [
                {"source": {"port": "p"}, "sink": {"actor": "A", "port": "in"}},
                {"source": {"port": "q"}, "sink": {"actor": "A", "port": "in"}}
            ],
            "io_ports": [
                {"direction": "in", "name": "p", "width": 8},
                {"direction": "in", "name": "q", "width": 8}
            ]
        }"#;
        let err = parse_network(src, NetworkFormat::Json).unwrap_err();
        match err {
            ParseError::Semantic(diags) => {
                assert!(diags.iter().any(|d| d.element == "A.in"));
            }
            other => panic!("expected semantic error, got {other}"),
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let src = r#"{
            "name": "rt",
            "actors": [{
                "instance_name": "A",
                "component_type": "acc",
                "ports": [
                    {"direction": "in", "name": "in", "width": 32},
                    {"direction": "out", "name": "out", "width": 32}
                ],
                "kind": "atomic"
            }],
            "channels": [
                {"source": {"port": "in"}, "sink": {"actor": "A", "port": "in"}, "fifo_depth": 4},
                {"source": {"actor": "A", "port": "out"}, "sink": {"port": "out"}}
            ],
            "io_ports": [
                {"direction": "in", "name": "in", "width": 32},
                {"direction": "out", "name": "out", "width": 32}
            ]
        }"#;
        let net = parse_network(src, NetworkFormat::Json).unwrap();
        let round = parse_network(&to_json_string(&net), NetworkFormat::Json).unwrap();
        assert_eq!(net, round);
        assert_eq!(
            round.channel_into(&Endpoint::actor("A", "in")).unwrap().fifo_depth,
            4
        );
    }
}
