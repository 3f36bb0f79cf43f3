//! XDF-subset XML reader and writer.
//!
//! The subset keeps the Instance/Connection/Port vocabulary of XDF
//! network files, with two local conventions:
//!
//! * instance ports are declared inline (actors are opaque, so there
//!   is no actor class file to pull signatures from);
//! * a hierarchical instance nests a full `<XDF>` element instead of
//!   referencing a class by name.
//!
//! Network endpoints use the XDF convention of an empty `src`/`dst`
//! attribute plus the port name in `src-port`/`dst-port`.

use super::model::{
    Actor, ActorKind, ActorPort, Channel, DataflowNetwork, Endpoint, NetworkPort, PortDirection,
};
use super::parse::ParseError;

pub(crate) fn parse_xdf(source: &str) -> Result<DataflowNetwork, ParseError> {
    let doc = roxmltree::Document::parse(source).map_err(|e| ParseError::Syntax {
        position: format!("{}:{}", e.pos().row, e.pos().col),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "XDF" {
        return Err(syntax(&doc, root.range().start, "root element must be <XDF>"));
    }
    parse_network_element(&doc, root)
}

fn syntax(doc: &roxmltree::Document, pos: usize, message: impl Into<String>) -> ParseError {
    let p = doc.text_pos_at(pos);
    ParseError::Syntax { position: format!("{}:{}", p.row, p.col), message: message.into() }
}

fn required<'a>(
    doc: &roxmltree::Document,
    node: roxmltree::Node<'a, 'a>,
    attr: &str,
) -> Result<&'a str, ParseError> {
    node.attribute(attr)
        .ok_or_else(|| syntax(doc, node.range().start, format!("missing attribute `{attr}`")))
}

fn parse_width(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    value: &str,
) -> Result<u32, ParseError> {
    value
        .parse()
        .map_err(|_| syntax(doc, node.range().start, format!("invalid width `{value}`")))
}

fn parse_direction(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
    value: &str,
) -> Result<PortDirection, ParseError> {
    match value {
        "Input" => Ok(PortDirection::In),
        "Output" => Ok(PortDirection::Out),
        other => Err(syntax(
            doc,
            node.range().start,
            format!("port kind must be Input or Output, got `{other}`"),
        )),
    }
}

fn parse_network_element(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
) -> Result<DataflowNetwork, ParseError> {
    let mut net = DataflowNetwork::new(required(doc, node, "name")?);

    for child in node.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "Port" => {
                net.io_ports.push(NetworkPort {
                    direction: parse_direction(doc, child, required(doc, child, "kind")?)?,
                    name: required(doc, child, "name")?.to_string(),
                    width: parse_width(doc, child, required(doc, child, "width")?)?,
                });
            }
            "Instance" => net.actors.push(parse_instance(doc, child)?),
            "Connection" => {
                let src = required(doc, child, "src")?;
                let src_port = required(doc, child, "src-port")?;
                let dst = required(doc, child, "dst")?;
                let dst_port = required(doc, child, "dst-port")?;
                let endpoint = |inst: &str, port: &str| {
                    if inst.is_empty() {
                        Endpoint::network(port)
                    } else {
                        Endpoint::actor(inst, port)
                    }
                };
                let fifo_depth = match child.attribute("fifo-depth") {
                    Some(v) => parse_width(doc, child, v)?,
                    None => super::model::default_fifo_depth(),
                };
                net.channels.push(Channel {
                    source: endpoint(src, src_port),
                    sink: endpoint(dst, dst_port),
                    fifo_depth,
                });
            }
            other => {
                return Err(syntax(
                    doc,
                    child.range().start,
                    format!("unexpected element <{other}>"),
                ))
            }
        }
    }
    Ok(net)
}

fn parse_instance(
    doc: &roxmltree::Document,
    node: roxmltree::Node,
) -> Result<Actor, ParseError> {
    let id = required(doc, node, "id")?.to_string();
    let mut ports = Vec::new();
    let mut subnetwork = None;
    for child in node.children().filter(|c| c.is_element()) {
        match child.tag_name().name() {
            "Port" => ports.push(ActorPort {
                direction: parse_direction(doc, child, required(doc, child, "kind")?)?,
                name: required(doc, child, "name")?.to_string(),
                width: parse_width(doc, child, required(doc, child, "width")?)?,
                open: child.attribute("open") == Some("true"),
            }),
            "XDF" => subnetwork = Some(parse_network_element(doc, child)?),
            other => {
                return Err(syntax(
                    doc,
                    child.range().start,
                    format!("unexpected element <{other}> in Instance"),
                ))
            }
        }
    }

    let kind = match (node.attribute("kind"), subnetwork) {
        (_, Some(sub)) => ActorKind::Hierarchical(Box::new(sub)),
        (None | Some("atomic"), None) => ActorKind::Atomic,
        (Some("fanout"), None) => ActorKind::Fanout,
        (Some("sbox1x2"), None) => ActorKind::Sbox1x2,
        (Some("sbox2x1"), None) => ActorKind::Sbox2x1,
        (Some(other), None) => {
            return Err(syntax(
                doc,
                node.range().start,
                format!("unknown instance kind `{other}`"),
            ))
        }
    };
    let component_type = match &kind {
        ActorKind::Hierarchical(sub) => node
            .attribute("class")
            .map(str::to_string)
            .unwrap_or_else(|| sub.name.clone()),
        _ => required(doc, node, "class")?.to_string(),
    };
    Ok(Actor { instance_name: id, component_type, ports, kind })
}

/// Serialize to the XDF subset. `parse_network` of the result is the
/// identity on valid networks.
pub fn to_xdf_string(net: &DataflowNetwork) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    write_network(net, 0, &mut out);
    out
}

fn write_network(net: &DataflowNetwork, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    out.push_str(&format!("{pad}<XDF name=\"{}\">\n", xml_escape(&net.name)));
    let inner = "  ".repeat(indent + 1);
    for p in &net.io_ports {
        out.push_str(&format!(
            "{inner}<Port kind=\"{}\" name=\"{}\" width=\"{}\"/>\n",
            direction_str(p.direction),
            xml_escape(&p.name),
            p.width
        ));
    }
    for a in &net.actors {
        let kind_attr = match a.kind {
            ActorKind::Atomic | ActorKind::Hierarchical(_) => String::new(),
            ActorKind::Fanout => " kind=\"fanout\"".to_string(),
            ActorKind::Sbox1x2 => " kind=\"sbox1x2\"".to_string(),
            ActorKind::Sbox2x1 => " kind=\"sbox2x1\"".to_string(),
        };
        out.push_str(&format!(
            "{inner}<Instance id=\"{}\" class=\"{}\"{kind_attr}>\n",
            xml_escape(&a.instance_name),
            xml_escape(&a.component_type),
        ));
        let pp = "  ".repeat(indent + 2);
        for p in &a.ports {
            let open = if p.open { " open=\"true\"" } else { "" };
            out.push_str(&format!(
                "{pp}<Port kind=\"{}\" name=\"{}\" width=\"{}\"{open}/>\n",
                direction_str(p.direction),
                xml_escape(&p.name),
                p.width
            ));
        }
        if let ActorKind::Hierarchical(sub) = &a.kind {
            write_network(sub, indent + 2, out);
        }
        out.push_str(&format!("{inner}</Instance>\n"));
    }
    for c in &net.channels {
        let (src, src_port) = endpoint_attrs(&c.source);
        let (dst, dst_port) = endpoint_attrs(&c.sink);
        out.push_str(&format!(
            "{inner}<Connection src=\"{src}\" src-port=\"{src_port}\" dst=\"{dst}\" dst-port=\"{dst_port}\" fifo-depth=\"{}\"/>\n",
            c.fifo_depth
        ));
    }
    out.push_str(&format!("{pad}</XDF>\n"));
}

fn endpoint_attrs(ep: &Endpoint) -> (String, String) {
    match ep {
        Endpoint::ActorPort { actor, port } => (xml_escape(actor), xml_escape(port)),
        Endpoint::NetworkPort { port } => (String::new(), xml_escape(port)),
    }
}

fn direction_str(d: PortDirection) -> &'static str {
    match d {
        PortDirection::In => "Input",
        PortDirection::Out => "Output",
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse::{parse_network, NetworkFormat};

    const BETA: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<XDF name="beta">
  <Port kind="Input" name="in_b" width="32"/>
  <Port kind="Output" name="out" width="32"/>
  <Instance id="E" class="edge">
    <Port kind="Input" name="in" width="32"/>
    <Port kind="Output" name="out" width="32"/>
  </Instance>
  <Instance id="C" class="coll">
    <Port kind="Input" name="in" width="32"/>
    <Port kind="Output" name="out" width="32"/>
  </Instance>
  <Connection src="" src-port="in_b" dst="E" dst-port="in"/>
  <Connection src="E" src-port="out" dst="C" dst-port="in"/>
  <Connection src="C" src-port="out" dst="" dst-port="out"/>
</XDF>
"#;

    #[test]
    fn xdf_document_with_atomic_actors_parses() {
        let net = parse_network(BETA, NetworkFormat::Xdf).unwrap();
        assert_eq!(net.name, "beta");
        assert_eq!(net.actors.len(), 2);
        assert!(net.actors.iter().all(|a| matches!(a.kind, ActorKind::Atomic)));
        assert!(net.is_flat());
        assert_eq!(net.channels[0].fifo_depth, 1);
    }

    #[test]
    fn xdf_round_trip_is_identity() {
        let net = parse_network(BETA, NetworkFormat::Xdf).unwrap();
        let text = to_xdf_string(&net);
        let round = parse_network(&text, NetworkFormat::Xdf).unwrap();
        assert_eq!(net, round);
    }

    #[test]
    fn nested_xdf_parses_as_hierarchy() {
        let src = r#"<XDF name="outer">
  <Port kind="Input" name="in" width="8"/>
  <Port kind="Output" name="out" width="8"/>
  <Instance id="h">
    <Port kind="Input" name="in" width="8"/>
    <Port kind="Output" name="out" width="8"/>
    <XDF name="sub">
      <Port kind="Input" name="in" width="8"/>
      <Port kind="Output" name="out" width="8"/>
      <Instance id="x" class="t">
        <Port kind="Input" name="in" width="8"/>
        <Port kind="Output" name="out" width="8"/>
      </Instance>
      <Connection src="" src-port="in" dst="x" dst-port="in"/>
      <Connection src="x" src-port="out" dst="" dst-port="out"/>
    </XDF>
  </Instance>
  <Connection src="" src-port="in" dst="h" dst-port="in"/>
  <Connection src="h" src-port="out" dst="" dst-port="out"/>
</XDF>"#;
        let net = parse_network(src, NetworkFormat::Xdf).unwrap();
        assert!(!net.is_flat());
        let round = parse_network(&to_xdf_string(&net), NetworkFormat::Xdf).unwrap();
        assert_eq!(net, round);
    }

    #[test]
    fn malformed_xml_reports_position() {
        let err = parse_network("<XDF name=\"x\"><Port", NetworkFormat::Xdf).unwrap_err();
        assert!(err.to_string().contains("syntax error"));
    }
}
