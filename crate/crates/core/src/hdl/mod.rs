//! Structural HDL backend: netlist planning and Verilog emission.

mod emit;
mod plan;

pub use emit::{emit_lut_contents, emit_verilog};
pub use plan::{
    plan_netlist, Assign, HdlError, InstancePlan, LutPlan, NetlistPlan, TopPort, WireDecl,
};
