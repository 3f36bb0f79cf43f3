//! Structural lint over emitted Verilog text.
//!
//! Parses the emitted subset (module headers with inline ports, wire
//! and reg declarations, continuous assigns, named-binding instances,
//! a LUT case block and the FIFO always block) and checks:
//!
//! * balanced `module` / `endmodule`;
//! * names are declared before use;
//! * at most one driver per wire (assigns, plus outputs of instances
//!   whose module declaration is part of the emitted set);
//! * instance bindings name existing ports and cover every port of
//!   locally-declared modules.
//!
//! Actor bodies live in an external library, so instances of unknown
//! modules contribute neither drivers nor port-shape checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ir::PortDirection;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintDiagnostic {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct VModule {
    pub name: String,
    pub ports: Vec<(String, PortDirection)>,
    pub port_regs: BTreeSet<String>,
    pub wires: BTreeSet<String>,
    pub regs: BTreeSet<String>,
    pub params: BTreeSet<String>,
    pub assigns: Vec<(String, String, usize)>,
    pub instances: Vec<VInstance>,
}

#[derive(Debug, Clone)]
pub struct VInstance {
    pub module: String,
    pub instance: String,
    pub bindings: Vec<(String, String)>,
    pub line: usize,
}

const KEYWORDS: &[&str] = &[
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "assign", "parameter",
    "always", "begin", "end", "case", "endcase", "default", "if", "else", "posedge", "negedge",
];

/// Parse one file of the emitted subset; structural errors come back
/// as diagnostics alongside whatever modules did parse.
pub fn parse_verilog(file: &str, text: &str) -> (Vec<VModule>, Vec<LintDiagnostic>) {
    let mut modules = Vec::new();
    let mut diags = Vec::new();
    let mut current: Option<VModule> = None;
    let mut pending_instance: Option<(VInstance, bool)> = None; // (instance, in param list)
    let mut in_header = false;
    let mut always_depth = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        let diag = |message: String| LintDiagnostic { file: file.into(), line: line_no, message };

        if let Some((inst, in_params)) = &mut pending_instance {
            if line.starts_with(");") || line == ");" {
                current
                    .as_mut()
                    .expect("instance inside module")
                    .instances
                    .push(pending_instance.take().unwrap().0);
            } else if let Some(rest) = line.strip_prefix('.') {
                if let Some((port, expr)) = split_binding(rest) {
                    if !*in_params {
                        inst.bindings.push((port, expr));
                    }
                } else {
                    diags.push(diag(format!("unparsable binding `{line}`")));
                }
            } else if line.starts_with(')') {
                // ") name (" closes the parameter list of an instance
                if let Some(name) = line.trim_start_matches(')').split('(').next() {
                    inst.instance = name.trim().to_string();
                }
                *in_params = false;
            } else {
                diags.push(diag(format!("unexpected text in instance: `{line}`")));
            }
            continue;
        }

        if always_depth > 0 {
            if line.starts_with("always") || line.ends_with("begin") || line.starts_with("case") {
                always_depth += 1;
            }
            if line == "end" || line == "endcase" || line.starts_with("end ") {
                always_depth = always_depth.saturating_sub(1);
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("module ") {
            if current.is_some() {
                diags.push(diag("nested module".into()));
            }
            let name = rest
                .split(|c: char| c == ' ' || c == '(' || c == '#')
                .next()
                .unwrap_or("")
                .to_string();
            current = Some(VModule {
                name,
                ports: Vec::new(),
                port_regs: BTreeSet::new(),
                wires: BTreeSet::new(),
                regs: BTreeSet::new(),
                params: BTreeSet::new(),
                assigns: Vec::new(),
                instances: Vec::new(),
            });
            in_header = true;
            continue;
        }
        if line == "endmodule" {
            match current.take() {
                Some(m) => modules.push(m),
                None => diags.push(diag("endmodule without module".into())),
            }
            continue;
        }
        let Some(module) = current.as_mut() else {
            diags.push(diag(format!("statement outside module: `{line}`")));
            continue;
        };

        if in_header {
            if line.starts_with(");") {
                in_header = false;
                continue;
            }
            if line.starts_with(") (") || line == ") (" {
                continue; // parameter list closed, port list opens
            }
            let decl = line.trim_end_matches(',');
            if let Some(rest) = decl.strip_prefix("parameter ") {
                if let Some(name) = rest.split(|c: char| c == ' ' || c == '=').next() {
                    module.params.insert(name.trim().to_string());
                }
                continue;
            }
            let (dir, rest) = if let Some(r) = decl.strip_prefix("input") {
                (PortDirection::In, r)
            } else if let Some(r) = decl.strip_prefix("output") {
                (PortDirection::Out, r)
            } else {
                diags.push(diag(format!("unparsable port `{decl}`")));
                continue;
            };
            let is_reg = rest.trim_start().starts_with("reg");
            let name = decl_name(rest);
            if is_reg {
                module.port_regs.insert(name.clone());
            }
            module.ports.push((name, dir));
            continue;
        }

        if let Some(rest) = line.strip_prefix("wire ") {
            let body = rest.trim_end_matches(';');
            if let Some((decl, init)) = body.split_once('=') {
                let name = decl_name(decl);
                module.wires.insert(name.clone());
                module.assigns.push((name, init.trim().to_string(), line_no));
            } else {
                module.wires.insert(decl_name(body));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("reg ") {
            module.regs.insert(decl_name(rest.trim_end_matches(';')));
            continue;
        }
        if line.starts_with("always") {
            always_depth = 1;
            continue;
        }
        if let Some(rest) = line.strip_prefix("assign ") {
            let body = rest.trim_end_matches(';');
            if let Some((lhs, rhs)) = body.split_once('=') {
                module
                    .assigns
                    .push((lhs.trim().to_string(), rhs.trim().to_string(), line_no));
            } else {
                diags.push(diag(format!("unparsable assign `{line}`")));
            }
            continue;
        }

        // Instance opener: "mod inst (" or "mod #(".
        if line.ends_with('(') {
            let head = line.trim_end_matches('(').trim();
            if let Some(module_name) = head.strip_suffix('#') {
                pending_instance = Some(VInstance {
                    module: module_name.trim().to_string(),
                    instance: String::new(),
                    bindings: Vec::new(),
                    line: line_no,
                });
            } else {
                let mut parts = head.split_whitespace();
                let module_name = parts.next().unwrap_or("").to_string();
                let instance = parts.next().unwrap_or("").to_string();
                pending_instance = Some(VInstance {
                    module: module_name,
                    instance,
                    bindings: Vec::new(),
                    line: line_no,
                });
            }
            continue;
        }
        diags.push(diag(format!("unrecognized statement `{line}`")));
    }

    if current.is_some() {
        diags.push(LintDiagnostic {
            file: file.into(),
            line: text.lines().count(),
            message: "missing endmodule".into(),
        });
    }
    (modules, diags)
}

fn national_close_paren_marker() -> &'static str {
    ")"
}

fn strip_comment(line: &str) -> &str {
    match line.find("//") {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Last identifier of a declaration (after width and type noise).
fn decl_name(decl: &str) -> String {
    decl.split_whitespace()
        .last()
        .unwrap_or("")
        .trim_end_matches(';')
        .to_string()
}

fn split_binding(rest: &str) -> Option<(String, String)> {
    // "port(expr)," -> (port, expr)
    let open = rest.find('(')?;
    let close = rest.rfind(')')?;
    let port = rest[..open].trim().to_string();
    let expr = rest[open + 1..close].trim().to_string();
    Some((port, expr))
}

fn identifiers(expr: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = expr.char_indices().peekable();
    let bytes = expr.as_bytes();
    while let Some((i, c)) = chars.next() {
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i + c.len_utf8();
            while let Some(&(j, cj)) = chars.peek() {
                if cj.is_ascii_alphanumeric() || cj == '_' {
                    end = j + cj.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            // Skip the base/value parts of sized literals like 2'd0.
            if i > 0 && bytes[i - 1] == b'\'' {
                continue;
            }
            let ident = &expr[i..end];
            if !KEYWORDS.contains(&ident) {
                out.push(ident.to_string());
            }
        }
    }
    out
}

/// Run every check over a set of emitted files.
pub fn lint_netlist(files: &BTreeMap<String, String>) -> Vec<LintDiagnostic> {
    let mut diags = Vec::new();
    let mut all_modules: BTreeMap<String, VModule> = BTreeMap::new();
    let mut per_file: Vec<(String, Vec<VModule>)> = Vec::new();

    for (file, text) in files {
        let (modules, parse_diags) = parse_verilog(file, text);
        diags.extend(parse_diags);
        for m in &modules {
            all_modules.insert(m.name.clone(), m.clone());
        }
        per_file.push((file.clone(), modules));
    }

    for (file, modules) in &per_file {
        for m in modules {
            lint_module(file, m, &all_modules, &mut diags);
        }
    }
    diags
}

fn lint_module(
    file: &str,
    m: &VModule,
    all: &BTreeMap<String, VModule>,
    diags: &mut Vec<LintDiagnostic>,
) {
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    for (p, _) in &m.ports {
        declared.insert(p);
    }
    for w in m.wires.iter().chain(&m.regs).chain(&m.params) {
        declared.insert(w);
    }

    let mut check_expr = |expr: &str, line: usize, diags: &mut Vec<LintDiagnostic>| {
        for ident in identifiers(expr) {
            if !declared.contains(ident.as_str()) {
                diags.push(LintDiagnostic {
                    file: file.into(),
                    line,
                    message: format!("`{ident}` used but not declared in `{}`", m.name),
                });
            }
        }
    };

    // Drivers: assigns + known-module instance outputs + input ports.
    let mut drivers: BTreeMap<String, usize> = BTreeMap::new();
    for (lhs, rhs, line) in &m.assigns {
        check_expr(lhs, *line, diags);
        check_expr(rhs, *line, diags);
        let base = lhs.split('[').next().unwrap_or(lhs).trim().to_string();
        *drivers.entry(base).or_insert(0) += 1;
    }
    for inst in &m.instances {
        let known = all.get(&inst.module);
        for (port, expr) in &inst.bindings {
            check_expr(expr, inst.line, diags);
            if let Some(target) = known {
                match target.ports.iter().find(|(p, _)| p == port) {
                    None => diags.push(LintDiagnostic {
                        file: file.into(),
                        line: inst.line,
                        message: format!(
                            "instance `{}` binds unknown port `{port}` of `{}`",
                            inst.instance, inst.module
                        ),
                    }),
                    Some((_, PortDirection::Out)) => {
                        let base = expr.split('[').next().unwrap_or(expr).trim().to_string();
                        if m.wires.contains(&base) {
                            *drivers.entry(base).or_insert(0) += 1;
                        }
                    }
                    Some(_) => {}
                }
            }
        }
        if let Some(target) = known {
            for (port, _) in &target.ports {
                if !inst.bindings.iter().any(|(p, _)| p == port) {
                    diags.push(LintDiagnostic {
                        file: file.into(),
                        line: inst.line,
                        message: format!(
                            "instance `{}` leaves port `{port}` of `{}` unbound",
                            inst.instance, inst.module
                        ),
                    });
                }
            }
        }
    }

    for (wire, count) in &drivers {
        if *count > 1 && m.wires.contains(wire) {
            diags.push(LintDiagnostic {
                file: file.into(),
                line: 0,
                message: format!("wire `{wire}` has {count} drivers in `{}`", m.name),
            });
        }
        // Assign targets must be wires or output ports, not inputs.
        if m.ports
            .iter()
            .any(|(p, d)| p == wire && *d == PortDirection::In)
        {
            diags.push(LintDiagnostic {
                file: file.into(),
                line: 0,
                message: format!("input port `{wire}` is driven inside `{}`", m.name),
            });
        }
    }
}
