//! Composer for coarse-grain reconfigurable (CGR) datapaths.
//!
//! Takes a set of dataflow process networks, merges them into a single
//! multi-functional datapath with switching boxes and a configuration
//! table, explores merge partitions with structural cost models, plans
//! clock/power gating regions, and emits structural Verilog plus the
//! processor-coprocessor deployment collateral (interface wrappers,
//! C drivers, integration scripts).
//!
//! Pipeline stages map onto the top-level modules:
//!
//! * [`ir`] — network model, parsing (XDF-subset XML and JSON),
//!   hierarchy flattening, validation.
//! * [`merge`] — iterative pairwise datapath merging producing a
//!   [`merge::MultiDataflow`] and [`merge::ConfigurationTable`].
//! * [`dse`] — structural profiler: partition enumeration, area /
//!   power / critical-path cost models, Pareto ranking.
//! * [`power`] — logic-region identification and clock/power gating
//!   planning, power-intent emission.
//! * [`hdl`] — structural Verilog netlist backend.
//! * [`copr`] — coprocessor interface layer, drivers, and Vivado
//!   integration scripts.
//! * [`verify`] — configuration extraction, labeled-graph isomorphism,
//!   selector sensitivity, and netlist lint oracles.

pub mod cli;
pub mod copr;
pub mod dse;
pub mod hdl;
pub mod ir;
pub mod merge;
pub mod power;
pub mod verify;
