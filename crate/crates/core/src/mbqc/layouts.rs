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

//! Fixed gate patterns, written as grid layouts.
//!
//! A layout is a list of rows of whitespace-separated cells. Horizontal and
//! vertical neighbours are joined by an edge. Cells:
//!
//! | cell | meaning |
//! |------|---------|
//! | `.`  | no node |
//! | `Z`  | computational-basis elimination |
//! | `X`, `Y` | Pauli measurement `M(0)`, `M(pi/2)` |
//! | `A0`, `A1`, ... | adaptive measurement, angle slot `k` |
//! | `O`  | output node |
//!
//! A lowercase cell is an input node measured the same way. Wires are taken
//! top to bottom, so the `i`-th input row pairs with the `i`-th output row.

use std::collections::BTreeMap;

use super::{ClusterGraph, MeasurementPattern, PauliAxis, Role, WireGate};
use crate::error::{Error, Result};
use crate::statevector::{Gate, Label};

/// Gates with a built-in pattern.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum GateKind {
    Hadamard,
    /// `Rx(zeta) Rz(eta) Rx(xi)` with `Rx(t) = H Rz(t) H`.
    Rotation { xi: f64, eta: f64, zeta: f64 },
    /// CNOT from wire 0 onto wire `separation`; wires in between are idle.
    Cnot { separation: usize },
}

impl GateKind {
    pub fn num_wires(&self) -> usize {
        match self {
            GateKind::Cnot { separation } => separation + 1,
            _ => 1,
        }
    }
}

const HADAMARD: &[&str] = &["x Y Y Y O"];

const ROTATION: &[&str] = &["x A0 A1 A2 O"];

const CNOT_1: &[&str] = &[
    "x Y Y Y Y Y O",
    ". . . Y . . .",
    "x X X Y X X O",
];

// Longer CNOTs stretch the bridge of `CNOT_1` down through the idle wires.
// Each extra wire adds this two-row tile: a pair of X-measured bridge nodes
// (which contract to a plain edge) and a short identity wire set beside the
// bridge, out of its reach.
const CNOT_HEAD: [&str; 2] = ["x Y Y Y Y Y O . .", ". . . Y . . . . ."];
const CNOT_TILE: [&str; 2] = [". . . X . x X O .", ". . . X . . . . ."];
const CNOT_TAIL: &str = "x X X Y X X O . .";

fn cnot_rows(separation: usize) -> Vec<String> {
    if separation == 1 {
        return CNOT_1.iter().map(|s| s.to_string()).collect();
    }
    let mut rows: Vec<String> = CNOT_HEAD.iter().map(|s| s.to_string()).collect();
    for _ in 1..separation {
        rows.extend(CNOT_TILE.iter().map(|s| s.to_string()));
    }
    rows.push(CNOT_TAIL.to_string());
    rows
}

/// Builds the pattern for `kind`.
pub fn pattern_for_gate(kind: GateKind) -> Result<MeasurementPattern> {
    match kind {
        GateKind::Hadamard => from_layout("hadamard", HADAMARD, &[], vec![WireGate::new(Gate::H, &[0])]),
        GateKind::Rotation { xi, eta, zeta } => {
            for a in [xi, eta, zeta] {
                if !a.is_finite() {
                    return Err(Error::Input(format!("rotation angle {a} is not finite")));
                }
            }
            let declared = [Gate::H, Gate::Rz(xi), Gate::H, Gate::Rz(eta), Gate::H, Gate::Rz(zeta), Gate::H]
                .into_iter()
                .map(|g| WireGate::new(g, &[0]))
                .collect();
            from_layout("rotation", ROTATION, &[-xi, -eta, -zeta], declared)
        }
        GateKind::Cnot { separation } => {
            if separation == 0 {
                return Err(Error::Input("CNOT separation must be at least 1".into()));
            }
            let rows = cnot_rows(separation);
            let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
            // the control row leaves a Z behind on every branch
            let offsets = [(0, (0, 1))];
            from_layout_with_offset(
                &format!("cnot{separation}"),
                &rows,
                &[],
                vec![WireGate::new(Gate::CNOT, &[0, separation])],
                &offsets,
            )
        }
    }
}

/// Compiles a grid layout. `angles[k]` is the base angle of slot `Ak`.
pub fn from_layout(
    name: &str,
    rows: &[&str],
    angles: &[f64],
    declared: Vec<WireGate>,
) -> Result<MeasurementPattern> {
    from_layout_with_offset(name, rows, angles, declared, &[])
}

/// As [`from_layout`], with a constant Pauli `(x, z)` on the listed wires.
pub fn from_layout_with_offset(
    name: &str,
    rows: &[&str],
    angles: &[f64],
    declared: Vec<WireGate>,
    offsets: &[(usize, (u8, u8))],
) -> Result<MeasurementPattern> {
    let mut p = compile_layout(name, rows, angles, declared)?;
    for &(w, off) in offsets {
        let slot = p
            .output_offset
            .get_mut(w)
            .ok_or_else(|| Error::Input(format!("offset for missing wire {w}")))?;
        *slot = off;
    }
    Ok(p)
}

fn compile_layout(
    name: &str,
    rows: &[&str],
    angles: &[f64],
    declared: Vec<WireGate>,
) -> Result<MeasurementPattern> {
    let mut graph = ClusterGraph::new();
    let mut roles = BTreeMap::new();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut cells: BTreeMap<(i32, i32), Label> = BTreeMap::new();
    let mut next = 1u32;
    for (r, row) in rows.iter().enumerate() {
        for (c, cell) in row.split_whitespace().enumerate() {
            if cell == "." {
                continue;
            }
            let (x, y) = (c as i32 + 1, r as i32 + 1);
            let label = Label(next);
            next += 1;
            graph.add_node(label, x, y)?;
            cells.insert((x, y), label);
            let is_input = cell.starts_with(|ch: char| ch.is_ascii_lowercase());
            if is_input {
                inputs.push(label);
            }
            let role = match cell.to_ascii_uppercase().as_str() {
                "O" if !is_input => {
                    outputs.push(label);
                    continue;
                }
                "Z" => Role::EliminateZ,
                "X" => Role::Base(PauliAxis::X),
                "Y" => Role::Base(PauliAxis::Y),
                a if a.starts_with('A') => {
                    let k: usize = a[1..]
                        .parse()
                        .map_err(|_| Error::Input(format!("bad layout cell {cell}")))?;
                    let angle = *angles
                        .get(k)
                        .ok_or_else(|| Error::Input(format!("no angle for slot {k}")))?;
                    Role::Adaptive(angle)
                }
                _ => return Err(Error::Input(format!("bad layout cell {cell}"))),
            };
            roles.insert(label, role);
        }
    }
    for (&(x, y), &a) in &cells {
        for other in [(x + 1, y), (x, y + 1)] {
            if let Some(&b) = cells.get(&other) {
                graph.add_edge(a, b)?;
            }
        }
    }
    MeasurementPattern::compile(name, graph, inputs, outputs, &roles, declared)
}
