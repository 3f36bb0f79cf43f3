//! Structural Verilog emission.
//!
//! Output is a synthesizable Verilog-2001 subset: module headers with
//! inline port declarations, wire declarations, continuous assigns,
//! and named-binding instances. The only behavioral code is the LUT
//! case block and the FIFO wrapper body.

use std::collections::BTreeMap;

use crate::ir::{FlowDirection, PortDirection, ProtocolSpec, SignalRole, WidthRule};
use crate::merge::ConfigurationTable;

use super::plan::{sbox_ordinal, LutPlan, NetlistPlan};

/// Render every file of the netlist: `top.v`, plus `config_lut.v`,
/// `sbox_1x2.v` / `sbox_2x1.v`, and `fifo_wrapper.v` as referenced.
/// Byte output is a pure function of the inputs.
pub fn emit_verilog(plan: &NetlistPlan, protocol: &ProtocolSpec) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    files.insert("top.v".to_string(), render_top(plan));
    if let Some(lut) = &plan.lut {
        files.insert("config_lut.v".to_string(), render_lut(lut));
    }
    for module in &plan.sbox_modules {
        let text = match module.as_str() {
            "sbox_1x2" => render_sbox_1x2(protocol),
            _ => render_sbox_2x1(protocol),
        };
        files.insert(format!("{module}.v"), text);
    }
    if plan.uses_fifo {
        files.insert("fifo_wrapper.v".to_string(), render_fifo(protocol));
    }
    files
}

/// Render the configuration LUT from the table alone. `None` when the
/// table drives no sboxes (nothing to emit).
pub fn emit_lut_contents(ctab: &ConfigurationTable) -> Option<String> {
    let mut sboxes = ctab.sbox_names();
    if sboxes.is_empty() {
        return None;
    }
    sboxes.sort_by_key(|name| sbox_ordinal(name));
    let n = ctab.rows.len().max(1) as u32;
    let id_bits = (32 - (n.max(2) - 1).leading_zeros()).max(1);
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
    Some(render_lut(&LutPlan { id_bits, sboxes, rows }))
}

fn width_decl(width: u32) -> String {
    if width > 1 {
        format!("[{}:0] ", width - 1)
    } else {
        String::new()
    }
}

fn render_top(plan: &NetlistPlan) -> String {
    let mut out = String::new();
    out.push_str(&format!("module {} (\n", plan.top_name));
    for (i, p) in plan.top_ports.iter().enumerate() {
        let dir = match p.direction {
            PortDirection::In => "input ",
            PortDirection::Out => "output",
        };
        let comma = if i + 1 == plan.top_ports.len() { "" } else { "," };
        out.push_str(&format!("    {dir} wire {}{}{comma}\n", width_decl(p.width), p.name));
    }
    out.push_str(");\n\n");

    for w in &plan.wires {
        out.push_str(&format!("    wire {}{};\n", width_decl(w.width), w.name));
    }
    if !plan.wires.is_empty() {
        out.push('\n');
    }
    for a in &plan.assigns {
        out.push_str(&format!("    assign {} = {};\n", a.lhs, a.rhs));
    }
    if !plan.assigns.is_empty() {
        out.push('\n');
    }

    for inst in &plan.instances {
        if inst.params.is_empty() {
            out.push_str(&format!("    {} {} (\n", inst.module, inst.instance));
        } else {
            out.push_str(&format!("    {} #(\n", inst.module));
            for (i, (name, value)) in inst.params.iter().enumerate() {
                let comma = if i + 1 == inst.params.len() { "" } else { "," };
                out.push_str(&format!("        .{name}({value}){comma}\n"));
            }
            out.push_str(&format!("    ) {} (\n", inst.instance));
        }
        for (i, (port, expr)) in inst.bindings.iter().enumerate() {
            let comma = if i + 1 == inst.bindings.len() { "" } else { "," };
            out.push_str(&format!("        .{port}({expr}){comma}\n"));
        }
        out.push_str("    );\n\n");
    }

    out.push_str("endmodule\n");
    out
}

fn render_lut(lut: &LutPlan) -> String {
    let mut out = String::new();
    let k = lut.sboxes.len() as u32;
    out.push_str("module config_lut (\n");
    out.push_str(&format!("    input  wire {}config_id,\n", width_decl(lut.id_bits)));
    out.push_str(&format!("    output reg  {}sel\n", width_decl(k)));
    out.push_str(");\n\n");
    for (i, name) in lut.sboxes.iter().enumerate() {
        out.push_str(&format!("    // sel[{i}] drives {name}\n"));
    }
    out.push_str("    always @(*) begin\n        case (config_id)\n");
    for (id, bits) in &lut.rows {
        let literal: String = bits.iter().rev().map(|b| if *b == 0 { '0' } else { '1' }).collect();
        out.push_str(&format!("            {}'d{id}: sel = {k}'b{literal};\n", lut.id_bits));
    }
    let zeros: String = std::iter::repeat('0').take(k as usize).collect();
    out.push_str(&format!(
        "            default: sel = {k}'b{zeros}; // unmapped id selects no path\n"
    ));
    out.push_str("        endcase\n    end\n\nendmodule\n");
    out
}

struct RoleDecl {
    suffix: String,
    forward: bool,
    width: String,
    is_data: bool,
}

fn role_decls(protocol: &ProtocolSpec) -> Vec<RoleDecl> {
    protocol
        .signals
        .iter()
        .map(|s| RoleDecl {
            suffix: s.suffix.clone(),
            forward: s.direction == FlowDirection::Forward,
            width: match s.width {
                WidthRule::PortWidth => "[WIDTH-1:0] ".to_string(),
                WidthRule::Bits(b) => width_decl(b),
            },
            is_data: s.role == SignalRole::Data,
        })
        .collect()
}

fn zero_for(role: &RoleDecl) -> &'static str {
    if role.is_data {
        "{WIDTH{1'b0}}"
    } else {
        "1'b0"
    }
}

fn render_sbox_2x1(protocol: &ProtocolSpec) -> String {
    let roles = role_decls(protocol);
    let mut out = String::new();
    out.push_str("module sbox_2x1 #(\n    parameter WIDTH = 32\n) (\n");
    out.push_str("    input  wire sel,\n");
    let mut ports = Vec::new();
    for leg in ["in0", "in1"] {
        for r in &roles {
            let dir = if r.forward { "input " } else { "output" };
            ports.push(format!("    {dir} wire {}{leg}_{}", r.width, r.suffix));
        }
    }
    for r in &roles {
        let dir = if r.forward { "output" } else { "input " };
        ports.push(format!("    {dir} wire {}out_{}", r.width, r.suffix));
    }
    out.push_str(&ports.join(",\n"));
    out.push_str("\n);\n\n");
    for r in &roles {
        if r.forward {
            out.push_str(&format!(
                "    assign out_{0} = sel ? in1_{0} : in0_{0};\n",
                r.suffix
            ));
        } else {
            out.push_str(&format!(
                "    assign in0_{0} = sel ? {1} : out_{0};\n    assign in1_{0} = sel ? out_{0} : {1};\n",
                r.suffix,
                zero_for(r)
            ));
        }
    }
    out.push_str("\nendmodule\n");
    out
}

fn render_sbox_1x2(protocol: &ProtocolSpec) -> String {
    let roles = role_decls(protocol);
    let mut out = String::new();
    out.push_str("module sbox_1x2 #(\n    parameter WIDTH = 32\n) (\n");
    out.push_str("    input  wire sel,\n");
    let mut ports = Vec::new();
    for r in &roles {
        let dir = if r.forward { "input " } else { "output" };
        ports.push(format!("    {dir} wire {}in_{}", r.width, r.suffix));
    }
    for leg in ["out0", "out1"] {
        for r in &roles {
            let dir = if r.forward { "output" } else { "input " };
            ports.push(format!("    {dir} wire {}{leg}_{}", r.width, r.suffix));
        }
    }
    out.push_str(&ports.join(",\n"));
    out.push_str("\n);\n\n");
    for r in &roles {
        if r.forward {
            out.push_str(&format!(
                "    assign out0_{0} = sel ? {1} : in_{0};\n    assign out1_{0} = sel ? in_{0} : {1};\n",
                r.suffix,
                zero_for(r)
            ));
        } else {
            out.push_str(&format!(
                "    assign in_{0} = sel ? out1_{0} : out0_{0};\n",
                r.suffix
            ));
        }
    }
    out.push_str("\nendmodule\n");
    out
}

fn render_fifo(protocol: &ProtocolSpec) -> String {
    let roles = role_decls(protocol);
    let data = roles.iter().find(|r| r.is_data).expect("protocol has a data role");
    let valid = protocol.signal(SignalRole::Valid).map(|s| s.suffix.clone());
    let ack = protocol.signal(SignalRole::Ack).map(|s| s.suffix.clone());
    let ready = protocol.signal(SignalRole::Ready).map(|s| s.suffix.clone());

    let mut out = String::new();
    out.push_str("module fifo_wrapper #(\n    parameter WIDTH = 32,\n    parameter DEPTH = 4\n) (\n");
    out.push_str(&format!("    input  wire {},\n", protocol.clock));
    out.push_str(&format!("    input  wire {},\n", protocol.reset));
    let mut ports = Vec::new();
    for r in &roles {
        let dir = if r.forward { "input " } else { "output" };
        ports.push(format!("    {dir} wire {}i_{}", r.width, r.suffix));
    }
    for r in &roles {
        let dir = if r.forward { "output" } else { "input " };
        ports.push(format!("    {dir} wire {}o_{}", r.width, r.suffix));
    }
    out.push_str(&ports.join(",\n"));
    out.push_str("\n);\n\n");

    out.push_str("    reg [WIDTH-1:0] mem [0:DEPTH-1];\n");
    out.push_str("    reg [31:0] rd_ptr;\n    reg [31:0] wr_ptr;\n    reg [31:0] count;\n\n");
    let push_valid = valid
        .as_ref()
        .map(|v| format!("i_{v}"))
        .unwrap_or_else(|| "1'b1".to_string());
    let pop_ack = ack
        .as_ref()
        .map(|a| format!("o_{a}"))
        .unwrap_or_else(|| "1'b1".to_string());
    out.push_str(&format!("    wire push = {push_valid} && (count < DEPTH);\n"));
    out.push_str(&format!("    wire pop = {pop_ack} && (count > 0);\n\n"));
    out.push_str(&format!("    assign o_{} = mem[rd_ptr % DEPTH];\n", data.suffix));
    if let Some(v) = &valid {
        let gate = ready
            .as_ref()
            .map(|r| format!(" && !o_{r}"))
            .unwrap_or_default();
        out.push_str(&format!("    assign o_{v} = (count > 0){gate};\n"));
    }
    if let Some(a) = &ack {
        out.push_str(&format!("    assign i_{a} = push;\n"));
    }
    if let Some(r) = &ready {
        out.push_str(&format!("    assign i_{r} = (count >= DEPTH);\n"));
    }
    out.push_str(&format!(
        "\n    always @(posedge {clk}) begin\n        if ({rst}) begin\n            rd_ptr <= 0;\n            wr_ptr <= 0;\n            count <= 0;\n        end else begin\n            if (push) begin\n                mem[wr_ptr % DEPTH] <= i_{data};\n                wr_ptr <= wr_ptr + 1;\n            end\n            if (pop) begin\n                rd_ptr <= rd_ptr + 1;\n            end\n            count <= count + (push ? 1 : 0) - (pop ? 1 : 0);\n        end\n    end\n\nendmodule\n",
        clk = protocol.clock,
        rst = protocol.reset,
        data = data.suffix,
    ));
    out
}
