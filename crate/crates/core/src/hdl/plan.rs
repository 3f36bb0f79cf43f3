//! Netlist planning: from a merged network to instances, wires, and
//! port bindings ready for structural Verilog emission.
//!
//! Every logical channel expands into one wire per protocol signal
//! role, named `w_<src>_<dst>_<role>`. Channels with a buffer get a
//! `fifo_wrapper` instance between two wire bundles (the downstream
//! bundle carries a `q` marker). SBox selectors come from a single
//! configuration LUT indexed by the network id.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{
    ActorKind, Channel, Endpoint, PortDirection, ProtocolSpec, SignalRole, SignalSpec, WidthRule,
};
use crate::merge::{ConfigurationTable, MultiDataflow};
use crate::power::{GatingCellKind, GatingPlan, LogicRegionPartition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HdlError {
    #[error("protocol does not define the `{role}` signal role required by port `{port}`")]
    ProtocolMissingRole { role: String, port: String },
    #[error("netlist wire `{wire}` would have {drivers} drivers")]
    MultipleDrivers { wire: String, drivers: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopPort {
    pub name: String,
    pub direction: PortDirection,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireDecl {
    pub name: String,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assign {
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstancePlan {
    pub instance: String,
    pub module: String,
    /// `#(name, value)` parameter overrides.
    pub params: Vec<(String, String)>,
    /// Named port bindings `(port, expression)`.
    pub bindings: Vec<(String, String)>,
}

/// Configuration LUT contents: selector bits per network id, one bit
/// per sbox in cascade-ordinal order (bit i drives `sbox_<i>`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutPlan {
    pub id_bits: u32,
    /// SBox instance names in output bit order.
    pub sboxes: Vec<String>,
    /// `(network id, selector bits)`, bits indexed like `sboxes`.
    pub rows: Vec<(u32, Vec<u8>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetlistPlan {
    pub top_name: String,
    pub clock: String,
    pub reset: String,
    pub top_ports: Vec<TopPort>,
    pub wires: Vec<WireDecl>,
    pub assigns: Vec<Assign>,
    pub instances: Vec<InstancePlan>,
    pub lut: Option<LutPlan>,
    pub uses_fifo: bool,
    /// SBox template modules referenced (`sbox_1x2`, `sbox_2x1`).
    pub sbox_modules: BTreeSet<String>,
}

/// Numeric ordinal of an sbox instance name (`sbox_12` -> 12); names
/// without the counter sort after all counted ones, alphabetically.
pub(crate) fn sbox_ordinal(name: &str) -> (u64, String) {
    name.strip_prefix("sbox_")
        .and_then(|s| s.parse::<u64>().ok())
        .map(|n| (n, String::new()))
        .unwrap_or((u64::MAX, name.to_string()))
}

fn endpoint_token(ep: &Endpoint) -> String {
    match ep {
        Endpoint::ActorPort { actor, port } => format!("{actor}_{port}"),
        Endpoint::NetworkPort { port } => port.clone(),
    }
}

fn role_width(spec: &SignalSpec, data_width: u32) -> u32 {
    match spec.width {
        WidthRule::PortWidth => data_width,
        WidthRule::Bits(b) => b,
    }
}

/// Build the netlist plan for a merged network.
pub fn plan_netlist(
    m: &MultiDataflow,
    ctab: &ConfigurationTable,
    protocol: &ProtocolSpec,
    gating: Option<(&GatingPlan, &LogicRegionPartition)>,
) -> Result<NetlistPlan, HdlError> {
    if protocol.signal(SignalRole::Data).is_none() {
        return Err(HdlError::ProtocolMissingRole {
            role: "data".into(),
            port: m
                .base
                .io_ports
                .first()
                .map(|p| p.name.clone())
                .unwrap_or_else(|| "-".into()),
        });
    }

    let mut plan = NetlistPlan {
        top_name: m.base.name.clone(),
        clock: protocol.clock.clone(),
        reset: protocol.reset.clone(),
        top_ports: Vec::new(),
        wires: Vec::new(),
        assigns: Vec::new(),
        instances: Vec::new(),
        lut: None,
        uses_fifo: false,
        sbox_modules: BTreeSet::new(),
    };

    plan.top_ports.push(TopPort { name: protocol.clock.clone(), direction: PortDirection::In, width: 1 });
    plan.top_ports.push(TopPort { name: protocol.reset.clone(), direction: PortDirection::In, width: 1 });

    // Network ports expand per protocol role.
    for p in &m.base.io_ports {
        for s in &protocol.signals {
            let towards_design = matches!(
                (p.direction, s.direction),
                (PortDirection::In, crate::ir::FlowDirection::Forward)
                    | (PortDirection::Out, crate::ir::FlowDirection::Backward)
            );
            plan.top_ports.push(TopPort {
                name: format!("{}_{}", p.name, s.suffix),
                direction: if towards_design { PortDirection::In } else { PortDirection::Out },
                width: role_width(s, p.width),
            });
        }
    }

    // Configuration LUT.
    let mut sboxes: Vec<String> = m
        .base
        .sbox_actors()
        .map(|a| a.instance_name.clone())
        .collect();
    sboxes.sort_by_key(|name| sbox_ordinal(name));
    if !sboxes.is_empty() {
        let n = m.config_count() as u32;
        let id_bits = (32 - (n - 1).leading_zeros()).max(1);
        let rows = ctab
            .rows
            .iter()
            .map(|row| {
                let bits = sboxes
                    .iter()
                    .map(|s| row.selectors.get(s).copied().unwrap_or(0))
                    .collect();
                (row.network_id, bits)
            })
            .collect();
        plan.top_ports.push(TopPort {
            name: "config_id".into(),
            direction: PortDirection::In,
            width: id_bits,
        });
        plan.lut = Some(LutPlan { id_bits, sboxes: sboxes.clone(), rows });
    }

    // Gated clock infrastructure.
    let mut clock_of: BTreeMap<String, String> = BTreeMap::new();
    if let Some((gplan, regions)) = gating {
        let n = m.config_count() as u32;
        let id_bits = plan.lut.as_ref().map(|l| l.id_bits).unwrap_or(1);
        let mut decoded: BTreeSet<u32> = BTreeSet::new();
        for cell in &gplan.cells {
            for c in &cell.enable_configs {
                decoded.insert(*c);
            }
        }
        if !gplan.cells.is_empty() {
            // Decode needs the id even when no sboxes asked for it.
            if plan.lut.is_none() && !plan.top_ports.iter().any(|p| p.name == "config_id") {
                plan.top_ports.push(TopPort {
                    name: "config_id".into(),
                    direction: PortDirection::In,
                    width: (32 - (n.max(2) - 1).leading_zeros()).max(1),
                });
            }
            for c in &decoded {
                plan.wires.push(WireDecl { name: format!("cfg_sel_{c}"), width: 1 });
                plan.assigns.push(Assign {
                    lhs: format!("cfg_sel_{c}"),
                    rhs: format!("(config_id == {id_bits}'d{c})"),
                });
            }
        }
        for cell in &gplan.cells {
            let en = cell
                .enable_configs
                .iter()
                .map(|c| format!("cfg_sel_{c}"))
                .collect::<Vec<_>>()
                .join(" | ");
            let en_wire = format!("en_r{}", cell.region_id);
            let clk_wire = format!("clk_r{}", cell.region_id);
            plan.wires.push(WireDecl { name: en_wire.clone(), width: 1 });
            plan.wires.push(WireDecl { name: clk_wire.clone(), width: 1 });
            plan.assigns.push(Assign { lhs: en_wire.clone(), rhs: en });
            match cell.kind {
                GatingCellKind::ClockAnd => plan.assigns.push(Assign {
                    lhs: clk_wire.clone(),
                    rhs: format!("({} & {en_wire})", protocol.clock),
                }),
                GatingCellKind::Bufg => plan.instances.push(InstancePlan {
                    instance: cell.instance.clone(),
                    module: "BUFGCE".into(),
                    params: Vec::new(),
                    bindings: vec![
                        ("I".into(), protocol.clock.clone()),
                        ("CE".into(), en_wire.clone()),
                        ("O".into(), clk_wire.clone()),
                    ],
                }),
            }
            for region in &regions.regions {
                if region.id == cell.region_id {
                    for member in &region.members {
                        clock_of.insert(member.clone(), clk_wire.clone());
                    }
                }
            }
        }
    }

    // Channels: wires, top-port assigns, fifo instances.
    let mut bindings: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut channels: Vec<&Channel> = m.base.channels.iter().collect();
    channels.sort_by_key(|c| (c.sink.key(), c.source.key()));
    for c in &channels {
        let data_width = m.base.endpoint_width(&c.source).unwrap_or(32);
        let token = format!("{}_{}", endpoint_token(&c.source), endpoint_token(&c.sink));
        let fifo = c.fifo_depth > 0;

        for s in &protocol.signals {
            let w = role_width(s, data_width);
            let near = format!("w_{token}_{}", s.suffix);
            plan.wires.push(WireDecl { name: near.clone(), width: w });
            let far = if fifo {
                let far = format!("w_{token}_q_{}", s.suffix);
                plan.wires.push(WireDecl { name: far.clone(), width: w });
                far
            } else {
                near.clone()
            };

            let forward = s.direction == crate::ir::FlowDirection::Forward;
            // Source side.
            match &c.source {
                Endpoint::NetworkPort { port } => {
                    let pin = format!("{port}_{}", s.suffix);
                    if forward {
                        plan.assigns.push(Assign { lhs: near.clone(), rhs: pin });
                    } else {
                        plan.assigns.push(Assign { lhs: pin, rhs: near.clone() });
                    }
                }
                Endpoint::ActorPort { actor, port } => {
                    bindings
                        .entry(actor.clone())
                        .or_default()
                        .push((format!("{port}_{}", s.suffix), near.clone()));
                }
            }
            // Sink side.
            match &c.sink {
                Endpoint::NetworkPort { port } => {
                    let pin = format!("{port}_{}", s.suffix);
                    if forward {
                        plan.assigns.push(Assign { lhs: pin, rhs: far.clone() });
                    } else {
                        plan.assigns.push(Assign { lhs: far.clone(), rhs: pin });
                    }
                }
                Endpoint::ActorPort { actor, port } => {
                    bindings
                        .entry(actor.clone())
                        .or_default()
                        .push((format!("{port}_{}", s.suffix), far.clone()));
                }
            }
        }

        if fifo {
            plan.uses_fifo = true;
            let mut fifo_bindings = vec![
                (protocol.clock.clone(), clock_for_fifo(&c.sink, &clock_of, &protocol.clock)),
                (protocol.reset.clone(), protocol.reset.clone()),
            ];
            for s in &protocol.signals {
                fifo_bindings.push((format!("i_{}", s.suffix), format!("w_{token}_{}", s.suffix)));
                fifo_bindings.push((format!("o_{}", s.suffix), format!("w_{token}_q_{}", s.suffix)));
            }
            plan.instances.push(InstancePlan {
                instance: format!("fifo_{token}"),
                module: "fifo_wrapper".into(),
                params: vec![
                    ("WIDTH".into(), data_width.to_string()),
                    ("DEPTH".into(), c.fifo_depth.to_string()),
                ],
                bindings: fifo_bindings,
            });
        }
    }

    // Actor and sbox instances.
    for a in &m.base.actors {
        let mut inst_bindings = Vec::new();
        let mut params = Vec::new();
        let module = match a.kind {
            ActorKind::Sbox1x2 => {
                plan.sbox_modules.insert("sbox_1x2".to_string());
                params.push(("WIDTH".to_string(), sbox_width(a).to_string()));
                "sbox_1x2".to_string()
            }
            ActorKind::Sbox2x1 => {
                plan.sbox_modules.insert("sbox_2x1".to_string());
                params.push(("WIDTH".to_string(), sbox_width(a).to_string()));
                "sbox_2x1".to_string()
            }
            _ => {
                let clk = clock_of
                    .get(&a.instance_name)
                    .cloned()
                    .unwrap_or_else(|| protocol.clock.clone());
                inst_bindings.push((protocol.clock.clone(), clk));
                inst_bindings.push((protocol.reset.clone(), protocol.reset.clone()));
                a.component_type.clone()
            }
        };
        if a.kind.is_sbox() {
            let ordinal = sboxes
                .iter()
                .position(|s| s == &a.instance_name)
                .expect("sbox indexed");
            let sel = if sboxes.len() == 1 {
                "lut_sel".to_string()
            } else {
                format!("lut_sel[{ordinal}]")
            };
            inst_bindings.push(("sel".to_string(), sel));
        }
        if let Some(port_bindings) = bindings.get(&a.instance_name) {
            let mut sorted = port_bindings.clone();
            sorted.sort();
            inst_bindings.extend(sorted);
        }
        plan.instances.push(InstancePlan {
            instance: a.instance_name.clone(),
            module,
            params,
            bindings: inst_bindings,
        });
    }

    // LUT instance and its selector bus.
    if let Some(lut) = &plan.lut {
        plan.wires.push(WireDecl { name: "lut_sel".into(), width: lut.sboxes.len() as u32 });
        plan.instances.push(InstancePlan {
            instance: "u_config_lut".into(),
            module: "config_lut".into(),
            params: Vec::new(),
            bindings: vec![
                ("config_id".into(), "config_id".into()),
                ("sel".into(), "lut_sel".into()),
            ],
        });
    }

    plan.wires.sort_by(|a, b| a.name.cmp(&b.name));
    plan.wires.dedup();
    check_single_drivers(&plan)?;
    Ok(plan)
}

fn sbox_width(a: &crate::ir::Actor) -> u32 {
    a.ports
        .iter()
        .filter(|p| p.name != "sel")
        .map(|p| p.width)
        .max()
        .unwrap_or(1)
}

fn clock_for_fifo(
    sink: &Endpoint,
    clock_of: &BTreeMap<String, String>,
    default: &str,
) -> String {
    sink.actor_name()
        .and_then(|a| clock_of.get(a))
        .cloned()
        .unwrap_or_else(|| default.to_string())
}

/// Every wire must have exactly one driver: an assign, or exactly one
/// binding on a signal that flows out of its instance. Instance port
/// directions are not known for external actor modules, so the check
/// counts assigns only and trusts construction for instance outputs;
/// the text-level lint re-checks emitted files.
fn check_single_drivers(plan: &NetlistPlan) -> Result<(), HdlError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in &plan.assigns {
        let base = a.lhs.split('[').next().unwrap_or(&a.lhs);
        *counts.entry(base).or_insert(0) += 1;
    }
    for (wire, drivers) in counts {
        if plan.wires.iter().any(|w| w.name == wire) && drivers > 1 {
            return Err(HdlError::MultipleDrivers { wire: wire.to_string(), drivers });
        }
    }
    Ok(())
}
