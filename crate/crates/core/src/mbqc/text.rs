// Copyright 2026 The blindprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Line-oriented text form of a [`MeasurementPattern`].
//!
//! ```text
//! pattern hadamard
//! input 1
//! output 5
//! declare H 0
//! node 1 1 1 X
//! node 2 2 1 Y x:1
//! node 5 5 1 out x:2,4 z:1,3
//! edge 1 2
//! ```
//!
//! Measured nodes appear in execution order. `#` starts a comment.

use std::collections::HashMap;

use super::{ClusterGraph, MeasurementPattern, PauliAxis, Role, Step, WireGate};
use crate::error::{Error, Result};
use crate::statevector::{Gate, Label};

fn join(ls: &[Label]) -> String {
    ls.iter().map(|l| l.0.to_string()).collect::<Vec<_>>().join(",")
}

fn deps_suffix(x: &[Label], z: &[Label]) -> String {
    offset_suffix(x, z, (0, 0))
}

fn offset_suffix(x: &[Label], z: &[Label], offset: (u8, u8)) -> String {
    let mut s = String::new();
    if !x.is_empty() {
        s.push_str(&format!(" x:{}", join(x)));
    }
    if !z.is_empty() {
        s.push_str(&format!(" z:{}", join(z)));
    }
    match offset {
        (1, 1) => s.push_str(" offset:XZ"),
        (1, 0) => s.push_str(" offset:X"),
        (0, 1) => s.push_str(" offset:Z"),
        _ => {}
    }
    s
}

fn gate_token(g: Gate) -> String {
    match g {
        Gate::Rz(t) => format!("Rz:{t}"),
        other => format!("{other:?}"),
    }
}

fn parse_gate(tok: &str) -> Result<Gate> {
    Ok(match tok {
        "I" => Gate::I,
        "X" => Gate::X,
        "Y" => Gate::Y,
        "Z" => Gate::Z,
        "H" => Gate::H,
        "S" => Gate::S,
        "CZ" => Gate::CZ,
        "CNOT" => Gate::CNOT,
        t => match t.strip_prefix("Rz:") {
            Some(a) => Gate::Rz(parse_f64(a)?),
            None => return Err(Error::Input(format!("unknown gate {t}"))),
        },
    })
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Input(format!("bad number {s}")))?;
    if !v.is_finite() {
        return Err(Error::Input(format!("non-finite number {s}")));
    }
    Ok(v)
}

fn parse_label(s: &str) -> Result<Label> {
    s.parse::<u32>()
        .map(Label)
        .map_err(|_| Error::Input(format!("bad node id {s}")))
}

fn parse_labels(s: &str) -> Result<Vec<Label>> {
    s.split(',').filter(|t| !t.is_empty()).map(parse_label).collect()
}

/// Serialises `p`.
pub fn write_pattern(p: &MeasurementPattern) -> String {
    let mut out = format!("pattern {}\n", p.name);
    out.push_str(&format!("input {}\n", p.inputs.iter().map(|l| l.0.to_string()).collect::<Vec<_>>().join(" ")));
    out.push_str(&format!("output {}\n", p.outputs.iter().map(|l| l.0.to_string()).collect::<Vec<_>>().join(" ")));
    for g in &p.declared {
        let wires: Vec<String> = g.wires.iter().map(|w| w.to_string()).collect();
        out.push_str(&format!("declare {} {}\n", gate_token(g.gate), wires.join(" ")));
    }
    for s in &p.steps {
        let (x, y) = p.graph.coords(s.node).unwrap_or((0, 0));
        let role = match s.role {
            Role::EliminateZ => "Z".to_string(),
            Role::Base(PauliAxis::X) => "X".to_string(),
            Role::Base(PauliAxis::Y) => "Y".to_string(),
            Role::Adaptive(a) => format!("A:{a}"),
        };
        out.push_str(&format!("node {} {x} {y} {role}{}\n", s.node.0, deps_suffix(&s.x_deps, &s.z_deps)));
    }
    for ((o, (xs, zs)), off) in p.outputs.iter().zip(&p.output_deps).zip(&p.output_offset) {
        let (x, y) = p.graph.coords(*o).unwrap_or((0, 0));
        out.push_str(&format!("node {} {x} {y} out{}\n", o.0, offset_suffix(xs, zs, *off)));
    }
    for (a, b) in p.graph.edges() {
        out.push_str(&format!("edge {} {}\n", a.0, b.0));
    }
    out
}

/// Parses the text form and validates the result.
pub fn parse_pattern(text: &str) -> Result<MeasurementPattern> {
    let mut name = None;
    let mut inputs = None;
    let mut outputs: Option<Vec<Label>> = None;
    let mut declared = Vec::new();
    let mut graph = ClusterGraph::new();
    let mut steps = Vec::new();
    let mut out_deps: HashMap<Label, (Vec<Label>, Vec<Label>, (u8, u8))> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ctx = |e: Error| Error::Input(format!("line {}: {e}", lineno + 1));
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "pattern" => name = Some(toks[1..].join(" ")),
            "input" => inputs = Some(toks[1..].iter().map(|t| parse_label(t)).collect::<Result<Vec<_>>>().map_err(ctx)?),
            "output" => outputs = Some(toks[1..].iter().map(|t| parse_label(t)).collect::<Result<Vec<_>>>().map_err(ctx)?),
            "declare" => {
                if toks.len() < 3 {
                    return Err(ctx(Error::Input("declare needs a gate and wires".into())));
                }
                let gate = parse_gate(toks[1]).map_err(ctx)?;
                let wires = toks[2..]
                    .iter()
                    .map(|t| t.parse::<usize>().map_err(|_| Error::Input(format!("bad wire {t}"))))
                    .collect::<Result<Vec<_>>>()
                    .map_err(ctx)?;
                if wires.len() != gate.arity() {
                    return Err(ctx(Error::Input(format!("{} acts on {} wires", toks[1], gate.arity()))));
                }
                declared.push(WireGate { gate, wires });
            }
            "node" => {
                if toks.len() < 5 {
                    return Err(ctx(Error::Input("node needs id, x, y, role".into())));
                }
                let id = parse_label(toks[1]).map_err(ctx)?;
                let x: i32 = toks[2].parse().map_err(|_| ctx(Error::Input(format!("bad x {}", toks[2]))))?;
                let y: i32 = toks[3].parse().map_err(|_| ctx(Error::Input(format!("bad y {}", toks[3]))))?;
                graph.add_node(id, x, y).map_err(ctx)?;
                let (mut xd, mut zd) = (Vec::new(), Vec::new());
                let mut offset = (0u8, 0u8);
                for t in &toks[5..] {
                    if let Some(o) = t.strip_prefix("offset:") {
                        offset = match o {
                            "X" => (1, 0),
                            "Z" => (0, 1),
                            "XZ" => (1, 1),
                            _ => return Err(ctx(Error::Input(format!("bad offset {o}")))),
                        };
                    } else if let Some(l) = t.strip_prefix("x:") {
                        xd = parse_labels(l).map_err(ctx)?;
                    } else if let Some(l) = t.strip_prefix("z:") {
                        zd = parse_labels(l).map_err(ctx)?;
                    } else {
                        return Err(ctx(Error::Input(format!("unexpected token {t}"))));
                    }
                }
                let role = match toks[4] {
                    "out" => {
                        out_deps.insert(id, (xd, zd, offset));
                        continue;
                    }
                    _ if offset != (0, 0) => {
                        return Err(ctx(Error::Input("offset is only allowed on outputs".into())));
                    }
                    "Z" => Role::EliminateZ,
                    "X" => Role::Base(PauliAxis::X),
                    "Y" => Role::Base(PauliAxis::Y),
                    r => match r.strip_prefix("A:") {
                        Some(a) => Role::Adaptive(parse_f64(a).map_err(ctx)?),
                        None => return Err(ctx(Error::Input(format!("unknown role {r}")))),
                    },
                };
                steps.push(Step {
                    node: id,
                    role,
                    x_deps: xd,
                    z_deps: zd,
                });
            }
            "edge" => {
                if toks.len() != 3 {
                    return Err(ctx(Error::Input("edge needs two ids".into())));
                }
                let a = parse_label(toks[1]).map_err(ctx)?;
                let b = parse_label(toks[2]).map_err(ctx)?;
                graph.add_edge(a, b).map_err(ctx)?;
            }
            other => return Err(ctx(Error::Input(format!("unknown directive {other}")))),
        }
    }
    let outputs = outputs.ok_or_else(|| Error::Input("missing output line".into()))?;
    let mut output_deps = Vec::new();
    let mut output_offset = Vec::new();
    for o in &outputs {
        let (xd, zd, off) = out_deps
            .remove(o)
            .ok_or_else(|| Error::Structural(format!("output {o} has no node line")))?;
        output_deps.push((xd, zd));
        output_offset.push(off);
    }
    if let Some(extra) = out_deps.keys().next() {
        return Err(Error::Structural(format!("node {extra} marked out but not listed as output")));
    }
    let p = MeasurementPattern {
        name: name.ok_or_else(|| Error::Input("missing pattern line".into()))?,
        graph,
        inputs: inputs.ok_or_else(|| Error::Input("missing input line".into()))?,
        outputs,
        steps,
        output_deps,
        output_offset,
        declared,
    };
    for l in p.inputs.iter().chain(&p.outputs) {
        if !p.graph.contains(*l) {
            return Err(Error::Structural(format!("wire node {l} not declared")));
        }
    }
    if p.inputs.len() != p.outputs.len() {
        return Err(Error::Structural("input and output wire counts differ".into()));
    }
    p.validate()?;
    Ok(p)
}
