//! Configuration extraction: recover one input behavior from a merged
//! network by keeping the elements that serve it and resolving every
//! switching box into a plain wire per its selector bit.

use thiserror::Error;

use crate::ir::{ActorKind, Channel, DataflowNetwork, Endpoint, PortDirection};
use crate::merge::{mask_contains, ConfigurationTable, MultiDataflow};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("configuration {config} out of range (network has {count})")]
    ConfigOutOfRange { config: usize, count: usize },
    #[error("sbox `{sbox}` leaves a dangling path in configuration {config}")]
    DanglingPath { sbox: String, config: usize },
}

/// Extract configuration `config` from a merged network.
pub fn extract_configuration(
    m: &MultiDataflow,
    ctab: &ConfigurationTable,
    config: usize,
) -> Result<DataflowNetwork, ExtractError> {
    let count = m.config_count();
    if config >= count {
        return Err(ExtractError::ConfigOutOfRange { config, count });
    }

    let keep_actor = |name: &str| mask_contains(m.actor_mask(name), config);
    let mut net = DataflowNetwork::new(
        ctab.row(config).map(|r| r.config_name.as_str()).unwrap_or(&m.base.name),
    );
    net.io_ports = m
        .base
        .io_ports
        .iter()
        .filter(|p| {
            m.provenance
                .io_ports
                .get(&p.name)
                .is_some_and(|mask| mask_contains(*mask, config))
        })
        .cloned()
        .collect();

    let mut sboxes = Vec::new();
    for a in &m.base.actors {
        if !keep_actor(&a.instance_name) {
            continue;
        }
        if a.kind.is_sbox() {
            sboxes.push(a.clone());
        } else {
            net.actors.push(a.clone());
        }
    }

    let mut channels: Vec<Channel> = m
        .base
        .channels
        .iter()
        .filter(|c| mask_contains(m.channel_mask(&c.sink), config))
        .cloned()
        .collect();

    // Resolve each sbox into a wire through its selected ports.
    sboxes.sort_by_key(|s| s.instance_name.clone());
    for sbox in &sboxes {
        let name = &sbox.instance_name;
        let sel = ctab.selector(config, name).unwrap_or(0);
        let (in_port, out_port, unselected): (&str, &str, &str) = match sbox.kind {
            ActorKind::Sbox2x1 => {
                if sel == 0 {
                    ("in0", "out", "in1")
                } else {
                    ("in1", "out", "in0")
                }
            }
            ActorKind::Sbox1x2 => {
                if sel == 0 {
                    ("in", "out0", "out1")
                } else {
                    ("in", "out1", "out0")
                }
            }
            _ => unreachable!("only sboxes collected"),
        };
        let dead = Endpoint::actor(name, unselected);
        if channels.iter().any(|c| c.source == dead || c.sink == dead) {
            return Err(ExtractError::DanglingPath { sbox: name.clone(), config });
        }
        let in_ep = Endpoint::actor(name, in_port);
        let out_ep = Endpoint::actor(name, out_port);
        let Some(idx_in) = channels.iter().position(|c| c.sink == in_ep) else {
            return Err(ExtractError::DanglingPath { sbox: name.clone(), config });
        };
        let Some(idx_out) = channels.iter().position(|c| c.source == out_ep) else {
            return Err(ExtractError::DanglingPath { sbox: name.clone(), config });
        };
        let merged = Channel {
            source: channels[idx_in].source.clone(),
            sink: channels[idx_out].sink.clone(),
            fifo_depth: channels[idx_in].fifo_depth.max(channels[idx_out].fifo_depth),
        };
        let (first, second) = if idx_in > idx_out { (idx_in, idx_out) } else { (idx_out, idx_in) };
        channels.remove(first);
        channels.remove(second);
        channels.push(merged);
    }
    net.channels = channels;

    // Fanout legs not used by this configuration are dropped; their
    // ports stay declared but open.
    for a in &mut net.actors {
        if !matches!(a.kind, ActorKind::Fanout) {
            continue;
        }
        let name = a.instance_name.clone();
        for p in &mut a.ports {
            if p.direction == PortDirection::Out && !p.open {
                let ep = Endpoint::actor(&name, &p.name);
                if !net.channels.iter().any(|c| c.source == ep) {
                    p.open = true;
                }
            }
        }
    }

    Ok(net)
}
