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

//! Cluster-state measurement patterns.
//!
//! A [`MeasurementPattern`] is a graph on grid coordinates, an input and an
//! output wire list, and one measurement step per non-output node. Byproduct
//! bookkeeping is derived, not hand-written: for every measured node we solve
//! (over GF(2)) for a product of graph-state stabilisers that turns outcome 1
//! into outcome 0 times Pauli operators on nodes measured later. Those
//! operators become the X and Z dependency sets stored on each step, so angle
//! signs and outcome flips follow the usual one-way-computer rules:
//!
//! * an X frame on an adaptive node flips the sign of its angle,
//! * a Z frame flips how its outcome is read,
//! * for Pauli measurements the frame only ever flips the reading.
//!
//! Execution is just-in-time: a node is created (as `|+>`, or taken from the
//! inputs) the first time a measurement needs it, with CZ applied to every
//! neighbour that already exists. Computational-basis eliminations only need
//! the node itself; neighbours created later pick up the recorded `Z^s`
//! instead of the CZ, which is the same operator.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::statevector::{Gate, Label, MeasBasis, OutcomeSource, PureState, MAX_QUBITS};

mod layouts;
mod text;
mod verify;

pub use layouts::{from_layout, from_layout_with_offset, pattern_for_gate, GateKind};
pub use text::{parse_pattern, write_pattern};
pub use verify::{
    declared_matrix, probe_states, verify_pattern, verify_pattern_with, BranchMode, SoundnessReport, PROBE_WIRE_LIMIT,
    ROTATION_SAMPLES,
};

/// Live-width cap for just-in-time execution.
pub const JIT_WIDTH_CAP: usize = 20;

/// Nodes on grid coordinates, joined by CZ edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterGraph {
    nodes: BTreeMap<Label, (i32, i32)>,
    edges: BTreeSet<(Label, Label)>,
    adjacency: BTreeMap<Label, BTreeSet<Label>>,
}

impl ClusterGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node at column `x`, row `y`.
    pub fn add_node(&mut self, label: Label, x: i32, y: i32) -> Result<()> {
        if self.nodes.contains_key(&label) {
            return Err(Error::Input(format!("duplicate node {label}")));
        }
        if self.nodes.values().any(|&c| c == (x, y)) {
            return Err(Error::Input(format!("coordinate ({x},{y}) already used")));
        }
        self.nodes.insert(label, (x, y));
        self.adjacency.insert(label, BTreeSet::new());
        Ok(())
    }

    pub fn add_edge(&mut self, a: Label, b: Label) -> Result<()> {
        if a == b {
            return Err(Error::Input(format!("self-loop on {a}")));
        }
        for l in [a, b] {
            if !self.nodes.contains_key(&l) {
                return Err(Error::Input(format!("edge references unknown node {l}")));
            }
        }
        let key = (a.min(b), a.max(b));
        if !self.edges.insert(key) {
            return Err(Error::Input(format!("duplicate edge {a}-{b}")));
        }
        self.adjacency.get_mut(&a).unwrap().insert(b);
        self.adjacency.get_mut(&b).unwrap().insert(a);
        Ok(())
    }

    pub fn contains(&self, label: Label) -> bool {
        self.nodes.contains_key(&label)
    }

    pub fn coords(&self, label: Label) -> Option<(i32, i32)> {
        self.nodes.get(&label).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Label, (i32, i32))> + '_ {
        self.nodes.iter().map(|(&l, &c)| (l, c))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Label, Label)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn neighbors(&self, label: Label) -> impl Iterator<Item = Label> + '_ {
        self.adjacency.get(&label).into_iter().flatten().copied()
    }

    pub fn degree(&self, label: Label) -> usize {
        self.adjacency.get(&label).map_or(0, |s| s.len())
    }
}

/// Builds the graph state: inputs from `inputs`, every other node `|+>`, one
/// CZ per edge. Nodes are ordered by label.
pub fn build_cluster(g: &ClusterGraph, inputs: &BTreeMap<Label, PureState>) -> Result<PureState> {
    if g.num_nodes() > MAX_QUBITS {
        return Err(Error::TooManyQubits(g.num_nodes(), MAX_QUBITS));
    }
    let mut state: Option<PureState> = None;
    for (label, _) in g.nodes() {
        let mut q = match inputs.get(&label) {
            Some(s) => {
                if s.num_qubits() != 1 {
                    return Err(Error::Input(format!("input for {label} is not a single qubit")));
                }
                s.clone()
            }
            None => PureState::plus_theta(0.0),
        };
        let current = q.labels()[0];
        q.relabel(current, label)?;
        state = Some(match state {
            None => q,
            Some(s) => s.tensor(&q)?,
        });
    }
    for l in inputs.keys() {
        if !g.contains(*l) {
            return Err(Error::UnknownLabel(*l));
        }
    }
    let mut state = state.ok_or_else(|| Error::Input("empty graph".into()))?;
    for (a, b) in g.edges() {
        state.apply(Gate::CZ, &[a, b])?;
    }
    Ok(state)
}

/// Pauli eigenbasis for non-adaptive cluster measurements.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    /// `M(0)`
    X,
    /// `M(pi/2)`
    Y,
}

/// What a step does with its node.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Role {
    /// Computational-basis removal of a redundant node.
    EliminateZ,
    /// Fixed Pauli measurement, `M(0)` or `M(pi/2)`.
    Base(PauliAxis),
    /// `M(+-angle)`, sign set by the X dependencies.
    Adaptive(f64),
}

impl Role {
    fn measurement_basis(&self, x_frame: bool) -> MeasBasis {
        match *self {
            Role::EliminateZ => MeasBasis::Computational,
            Role::Base(PauliAxis::X) => MeasBasis::X,
            Role::Base(PauliAxis::Y) => MeasBasis::Y,
            Role::Adaptive(angle) => MeasBasis::rotated(if x_frame { -angle } else { angle }),
        }
    }

    /// Whether a frame `X^x Z^z` on the node flips the outcome reading.
    fn flips(&self, x: bool, z: bool) -> bool {
        match self {
            Role::EliminateZ => x,
            Role::Base(PauliAxis::X) | Role::Adaptive(_) => z,
            Role::Base(PauliAxis::Y) => x ^ z,
        }
    }
}

/// One measurement, with the earlier nodes whose (corrected) outcomes feed
/// its X and Z frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub node: Label,
    pub role: Role,
    pub x_deps: Vec<Label>,
    pub z_deps: Vec<Label>,
}

/// A gate application inside a declared unitary; indices refer to wires.
#[derive(Clone, Debug, PartialEq)]
pub struct WireGate {
    pub gate: Gate,
    pub wires: Vec<usize>,
}

impl WireGate {
    pub fn new(gate: Gate, wires: &[usize]) -> Self {
        Self {
            gate,
            wires: wires.to_vec(),
        }
    }
}

/// A cluster-state program.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPattern {
    pub name: String,
    pub graph: ClusterGraph,
    pub inputs: Vec<Label>,
    pub outputs: Vec<Label>,
    pub steps: Vec<Step>,
    /// Per output wire, the X and Z dependency sets of its byproduct.
    pub output_deps: Vec<(Vec<Label>, Vec<Label>)>,
    /// Per output wire, a Pauli `X^a Z^b` present on every branch.
    pub output_offset: Vec<(u8, u8)>,
    /// Gates, in application order, that the pattern should implement.
    pub declared: Vec<WireGate>,
}

impl MeasurementPattern {
    /// Orders the measurements column by column (eliminations first inside a
    /// column, then by row) and derives all dependency sets.
    pub fn compile(
        name: &str,
        graph: ClusterGraph,
        inputs: Vec<Label>,
        outputs: Vec<Label>,
        roles: &BTreeMap<Label, Role>,
        declared: Vec<WireGate>,
    ) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::Structural("input and output wire counts differ".into()));
        }
        for l in inputs.iter().chain(&outputs) {
            if !graph.contains(*l) {
                return Err(Error::Structural(format!("wire node {l} not in graph")));
            }
        }
        for o in &outputs {
            if inputs.contains(o) {
                return Err(Error::Structural(format!("node {o} is both input and output")));
            }
            if roles.contains_key(o) {
                return Err(Error::Structural(format!("output node {o} has a measurement")));
            }
        }
        let mut order: Vec<(Label, (i32, i32), Role)> = Vec::new();
        for (label, xy) in graph.nodes() {
            if outputs.contains(&label) {
                continue;
            }
            let role = *roles
                .get(&label)
                .ok_or_else(|| Error::Structural(format!("node {label} has no measurement")))?;
            order.push((label, xy, role));
        }
        for l in roles.keys() {
            if !graph.contains(*l) {
                return Err(Error::Structural(format!("role for unknown node {l}")));
            }
        }
        order.sort_by_key(|&(_, (x, y), role)| (x, role != Role::EliminateZ, y));
        let sequence: Vec<(Label, Role)> = order.into_iter().map(|(l, _, r)| (l, r)).collect();
        let (steps, output_deps) = derive_dependencies(&graph, &inputs, &outputs, &sequence)?;
        let p = Self {
            name: name.to_string(),
            graph,
            output_offset: vec![(0, 0); outputs.len()],
            inputs,
            outputs,
            steps,
            output_deps,
            declared,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn num_wires(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_measured(&self) -> usize {
        self.steps.len()
    }

    /// Checks the structural invariants: each non-output node measured
    /// exactly once, outputs never, dependencies acyclic, and everything an
    /// adaptive angle needs measured before it.
    pub fn validate(&self) -> Result<()> {
        let mut position = HashMap::new();
        for (i, step) in self.steps.iter().enumerate() {
            if !self.graph.contains(step.node) {
                return Err(Error::Structural(format!("step references missing node {}", step.node)));
            }
            if self.outputs.contains(&step.node) {
                return Err(Error::Structural(format!("output {} is measured", step.node)));
            }
            if position.insert(step.node, i).is_some() {
                return Err(Error::Structural(format!("node {} measured twice", step.node)));
            }
        }
        for (label, _) in self.graph.nodes() {
            if !self.outputs.contains(&label) && !position.contains_key(&label) {
                return Err(Error::Structural(format!("node {label} is never measured")));
            }
        }
        if self.output_deps.len() != self.outputs.len() || self.output_offset.len() != self.outputs.len() {
            return Err(Error::Structural("output dependency table size".into()));
        }
        let all_deps = self
            .steps
            .iter()
            .flat_map(|s| s.x_deps.iter().chain(&s.z_deps))
            .chain(self.output_deps.iter().flat_map(|(x, z)| x.iter().chain(z)));
        for d in all_deps {
            if !position.contains_key(d) {
                return Err(Error::Sequencing(format!("dependency on unmeasured node {d}")));
            }
        }
        // depth-first walk over dependencies; colour 1 = open, 2 = finished
        let mut colour: HashMap<Label, u8> = HashMap::new();
        let mut closure: HashMap<Label, BTreeSet<Label>> = HashMap::new();
        for step in &self.steps {
            let mut stack = vec![(step.node, false)];
            while let Some((v, expanded)) = stack.pop() {
                let s = &self.steps[position[&v]];
                if expanded {
                    let mut set = BTreeSet::new();
                    for d in s.x_deps.iter().chain(&s.z_deps) {
                        set.insert(*d);
                        set.extend(closure[d].iter().copied());
                    }
                    closure.insert(v, set);
                    colour.insert(v, 2);
                    continue;
                }
                match colour.get(&v) {
                    Some(2) => continue,
                    Some(_) => return Err(Error::Sequencing(format!("cyclic dependency through {v}"))),
                    None => {}
                }
                colour.insert(v, 1);
                stack.push((v, true));
                for d in s.x_deps.iter().chain(&s.z_deps) {
                    match colour.get(d) {
                        Some(1) => return Err(Error::Sequencing(format!("cyclic dependency through {d}"))),
                        Some(_) => {}
                        None => stack.push((*d, false)),
                    }
                }
            }
        }
        for (i, step) in self.steps.iter().enumerate() {
            if !matches!(step.role, Role::Adaptive(_)) {
                continue;
            }
            if let Some(d) = closure[&step.node].iter().find(|d| position[*d] >= i) {
                return Err(Error::Sequencing(format!(
                    "adaptive node {} needs {d}, which is measured later",
                    step.node
                )));
            }
        }
        Ok(())
    }

    /// Declared unitary applied to `state`, whose wires are `wires`.
    pub fn apply_declared(&self, state: &mut PureState, wires: &[Label]) -> Result<()> {
        for g in &self.declared {
            let targets: Vec<Label> = g.wires.iter().map(|&w| wires[w]).collect();
            state.apply(g.gate, &targets)?;
        }
        Ok(())
    }

    /// Whether every measurement basis is one of `Z`, `M(0)`, `M(pi/2)`.
    pub fn is_pauli_only(&self) -> bool {
        self.steps.iter().all(|s| !matches!(s.role, Role::Adaptive(_)))
    }
}

/// Dense GF(2) row, low bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        BitRow(vec![0; n.div_ceil(64).max(1)])
    }
    fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }
    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn xor(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Solves `rows * g = rhs` over GF(2); free variables are set to zero.
fn solve_gf2(mut rows: Vec<(BitRow, bool)>, nvars: usize) -> Option<Vec<bool>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..nvars {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0.get(col)) else {
            continue;
        };
        rows.swap(r, p);
        let (pivot_row, pivot_rhs) = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0.get(col) {
                row.0.xor(&pivot_row);
                row.1 ^= pivot_rhs;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|(_, rhs)| *rhs) {
        return None;
    }
    let mut g = vec![false; nvars];
    for (i, &col) in pivots.iter().enumerate() {
        g[col] = rows[i].1;
    }
    Some(g)
}

#[derive(Copy, Clone)]
enum Constraint {
    X(bool),
    Z(bool),
    XorXZ(bool),
}

type Deps = (Vec<Step>, Vec<(Vec<Label>, Vec<Label>)>);

/// Correction search over one graph: variables are the stabiliser
/// generators of non-input nodes.
struct Flow<'g> {
    graph: &'g ClusterGraph,
    nodes: Vec<Label>,
    var_of: HashMap<Label, usize>,
    roles: HashMap<Label, Role>,
}

impl<'g> Flow<'g> {
    fn new(graph: &'g ClusterGraph, inputs: &[Label], sequence: &[(Label, Role)]) -> Self {
        let nodes: Vec<Label> = graph.nodes().map(|(l, _)| l).collect();
        let var_of = nodes
            .iter()
            .filter(|l| !inputs.contains(l))
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect();
        Self {
            graph,
            nodes,
            var_of,
            roles: sequence.iter().copied().collect(),
        }
    }

    fn x_row(&self, w: Label) -> BitRow {
        let mut r = BitRow::zeros(self.var_of.len());
        if let Some(&v) = self.var_of.get(&w) {
            r.flip(v);
        }
        r
    }

    fn z_row(&self, w: Label) -> BitRow {
        let mut r = BitRow::zeros(self.var_of.len());
        for u in self.graph.neighbors(w) {
            if let Some(&v) = self.var_of.get(&u) {
                r.flip(v);
            }
        }
        r
    }

    /// Generator set correcting outcome 1 of `v`, acting freely only on
    /// outputs and on nodes for which `later` holds.
    fn solve(&self, v: Label, later: &dyn Fn(Label) -> bool) -> Option<Vec<bool>> {
        let mut rows = Vec::new();
        for &w in &self.nodes {
            let Some(&role) = self.roles.get(&w) else {
                continue;
            };
            let own = w == v;
            if !own && later(w) {
                continue;
            }
            let c = match role {
                Role::Adaptive(_) => {
                    rows.push((self.x_row(w), false));
                    Constraint::Z(own)
                }
                Role::Base(PauliAxis::X) => Constraint::Z(own),
                Role::Base(PauliAxis::Y) => Constraint::XorXZ(own),
                Role::EliminateZ => Constraint::X(own),
            };
            match c {
                Constraint::X(b) => rows.push((self.x_row(w), b)),
                Constraint::Z(b) => rows.push((self.z_row(w), b)),
                Constraint::XorXZ(b) => {
                    let mut r = self.x_row(w);
                    r.xor(&self.z_row(w));
                    rows.push((r, b));
                }
            }
        }
        solve_gf2(rows, self.var_of.len())
    }

    /// Ranks from the measurement order itself, if every node is correctable.
    fn sequential(&self, sequence: &[(Label, Role)]) -> Option<HashMap<Label, usize>> {
        let rank: HashMap<Label, usize> = sequence.iter().enumerate().map(|(i, &(l, _))| (l, i)).collect();
        for &(v, _) in sequence {
            self.solve(v, &|w| rank[&w] > rank[&v])?;
        }
        Some(rank)
    }

    /// Layered ranks, peeling correctable nodes off from the outputs
    /// backwards. Pauli measurements commute, so only adaptive steps are
    /// bound by these ranks at run time.
    fn layered(&self, sequence: &[(Label, Role)]) -> Option<HashMap<Label, usize>> {
        let mut done: HashSet<Label> = HashSet::new();
        let mut layers: Vec<Vec<Label>> = Vec::new();
        while done.len() < sequence.len() {
            let layer: Vec<Label> = sequence
                .iter()
                .map(|&(v, _)| v)
                .filter(|v| !done.contains(v))
                .filter(|&v| self.solve(v, &|w| done.contains(&w)).is_some())
                .collect();
            if layer.is_empty() {
                return None;
            }
            done.extend(layer.iter().copied());
            layers.push(layer);
        }
        let depth = layers.len();
        Some(
            layers
                .into_iter()
                .enumerate()
                .flat_map(|(k, layer)| layer.into_iter().map(move |v| (v, depth - k)))
                .collect(),
        )
    }
}

fn derive_dependencies(
    graph: &ClusterGraph,
    inputs: &[Label],
    outputs: &[Label],
    sequence: &[(Label, Role)],
) -> Result<Deps> {
    let flow = Flow::new(graph, inputs, sequence);
    let rank = flow
        .sequential(sequence)
        .or_else(|| flow.layered(sequence))
        .ok_or_else(|| Error::Structural("measurement pattern has no byproduct correction scheme".into()))?;
    let index: HashMap<Label, usize> = flow.nodes.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut x_deps: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); flow.nodes.len()];
    let mut z_deps: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); flow.nodes.len()];
    for &(v, _) in sequence {
        let later = |w: Label| rank.get(&w).is_none_or(|&r| r > rank[&v]);
        let g = flow.solve(v, &later).ok_or_else(|| {
            Error::Structural(format!("no byproduct correction exists for node {v}"))
        })?;
        for &w in &flow.nodes {
            if w == v || !later(w) {
                continue;
            }
            if parity_and(&flow.x_row(w), &g) {
                x_deps[index[&w]].insert(v);
            }
            if parity_and(&flow.z_row(w), &g) {
                z_deps[index[&w]].insert(v);
            }
        }
    }
    let steps = sequence
        .iter()
        .map(|&(node, role)| Step {
            node,
            role,
            x_deps: x_deps[index[&node]].iter().copied().collect(),
            z_deps: z_deps[index[&node]].iter().copied().collect(),
        })
        .collect();
    let output_deps = outputs
        .iter()
        .map(|o| {
            (
                x_deps[index[o]].iter().copied().collect(),
                z_deps[index[o]].iter().copied().collect(),
            )
        })
        .collect();
    Ok((steps, output_deps))
}

fn bits_of(g: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; g.len().div_ceil(64).max(1)];
    for (i, &b) in g.iter().enumerate() {
        if b {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

fn parity_and(row: &BitRow, g: &[bool]) -> bool {
    row.0
        .iter()
        .zip(bits_of(g))
        .map(|(a, b)| (a & b).count_ones())
        .sum::<u32>()
        % 2
        == 1
}

/// Signed angle for an adaptive measurement: `-base` when the dependency
/// outcomes have odd parity. Unresolved dependencies are an error.
pub fn adapt_angle(base: f64, deps: &[Option<u8>]) -> Result<f64> {
    let mut parity = 0u8;
    for (k, d) in deps.iter().enumerate() {
        parity ^= d.ok_or_else(|| Error::Sequencing(format!("dependency {k} unresolved")))? & 1;
    }
    Ok(if parity == 1 { -base } else { base })
}

/// Pending Pauli corrections `X^a Z^b`, one pair per logical wire.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ByproductFrame {
    pub wires: Vec<(u8, u8)>,
}

impl ByproductFrame {
    pub fn identity(n: usize) -> Self {
        Self {
            wires: vec![(0, 0); n],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.wires.iter().all(|&(a, b)| a == 0 && b == 0)
    }

    /// Composes another pending correction onto wire `w`.
    pub fn push(&mut self, w: usize, a: u8, b: u8) {
        let e = &mut self.wires[w];
        e.0 = (e.0 ^ a) & 1;
        e.1 = (e.1 ^ b) & 1;
    }
}

impl fmt::Display for ByproductFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.wires.iter().map(|(a, b)| format!("X^{a}Z^{b}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Applies `Z^b` then `X^a` on each wire and clears the frame.
pub fn apply_byproducts(state: &mut PureState, frame: &mut ByproductFrame, wires: &[Label]) -> Result<()> {
    if frame.wires.len() != wires.len() {
        return Err(Error::Input("frame and wire list differ in length".into()));
    }
    for (&(a, b), &w) in frame.wires.iter().zip(wires) {
        if b & 1 == 1 {
            state.apply(Gate::Z, &[w])?;
        }
        if a & 1 == 1 {
            state.apply(Gate::X, &[w])?;
        }
    }
    frame.wires.iter_mut().for_each(|e| *e = (0, 0));
    Ok(())
}

/// One measured node as seen by the server.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TranscriptEntry {
    pub node: Label,
    pub basis: MeasBasis,
    pub outcome: u8,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    /// Probability of this whole branch.
    pub fn probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).product()
    }

    pub fn outcomes(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.outcome).collect()
    }

    /// Outcome record as a `0`/`1` string.
    pub fn bitstring(&self) -> String {
        self.entries.iter().map(|e| if e.outcome == 1 { '1' } else { '0' }).collect()
    }

    pub fn extend(&mut self, other: Transcript) {
        self.entries.extend(other.entries);
    }
}

/// How the graph state is materialised during a run.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Allocation {
    /// Create nodes at first need; cap live width at [`JIT_WIDTH_CAP`].
    JustInTime,
    /// Build the whole cluster before measuring anything.
    Full,
}

/// Result of executing a pattern.
#[derive(Clone, Debug)]
pub struct PatternRun {
    /// Residual state; the output of wire `i` carries the `i`-th wire label.
    pub state: PureState,
    pub transcript: Transcript,
    /// Uncorrected byproducts per wire.
    pub frame: ByproductFrame,
    pub max_width: usize,
}

/// Runs `p` on single-qubit `inputs`; output wire `i` is labelled `i`.
pub fn run_pattern(
    p: &MeasurementPattern,
    inputs: &[PureState],
    src: &mut OutcomeSource,
    alloc: Allocation,
) -> Result<PatternRun> {
    if inputs.len() != p.inputs.len() {
        return Err(Error::Input(format!(
            "pattern takes {} inputs, got {}",
            p.inputs.len(),
            inputs.len()
        )));
    }
    let state = wire_product(inputs)?;
    let wires: Vec<Label> = (0..inputs.len() as u32).map(Label).collect();
    run_pattern_on(p, state, &wires, src, alloc)
}

/// Runs `p` with its input wires bound to existing qubits `wires` of `state`.
/// Other qubits of `state` are spectators and keep their entanglement.
pub fn run_pattern_on(
    p: &MeasurementPattern,
    state: PureState,
    wires: &[Label],
    src: &mut OutcomeSource,
    alloc: Allocation,
) -> Result<PatternRun> {
    let plan = Plan::new(p)?;
    Executor::new(&plan, state, wires, alloc)?.run(src)
}

/// Visits every measurement branch of `p` on `state` with the byproducts
/// still pending. Branches of zero probability are not visited; their count
/// is returned.
pub fn for_each_branch_on<F>(
    p: &MeasurementPattern,
    state: PureState,
    wires: &[Label],
    alloc: Allocation,
    mut visit: F,
) -> Result<usize>
where
    F: FnMut(PatternRun) -> Result<()>,
{
    let plan = Plan::new(p)?;
    let mut skipped = 0;
    Executor::new(&plan, state, wires, alloc)?.branch(0, Transcript::default(), &mut visit, &mut skipped)?;
    Ok(skipped)
}

const UNKNOWN: u8 = 2;

/// Index-based view of a pattern, shared by every branch of a run.
struct Plan<'a> {
    p: &'a MeasurementPattern,
    nodes: Vec<Label>,
    neighbors: Vec<Vec<usize>>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    /// Per step: node index, x deps and z deps as step indices.
    steps: Vec<(usize, Vec<usize>, Vec<usize>)>,
    output_deps: Vec<(Vec<usize>, Vec<usize>)>,
}

impl<'a> Plan<'a> {
    fn new(p: &'a MeasurementPattern) -> Result<Self> {
        let nodes: Vec<Label> = p.graph.nodes().map(|(l, _)| l).collect();
        let index: HashMap<Label, usize> = nodes.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let node_index = |l: &Label| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| Error::Structural(format!("pattern references missing node {l}")))
        };
        let step_of: HashMap<Label, usize> = p.steps.iter().enumerate().map(|(i, s)| (s.node, i)).collect();
        let step_index = |l: &Label| {
            step_of
                .get(l)
                .copied()
                .ok_or_else(|| Error::Sequencing(format!("{l} is not a measured node")))
        };
        let neighbors = nodes
            .iter()
            .map(|&l| p.graph.neighbors(l).map(|n| index[&n]).collect())
            .collect();
        let mut steps = Vec::with_capacity(p.steps.len());
        for s in &p.steps {
            steps.push((
                node_index(&s.node)?,
                s.x_deps.iter().map(step_index).collect::<Result<Vec<_>>>()?,
                s.z_deps.iter().map(step_index).collect::<Result<Vec<_>>>()?,
            ));
        }
        let mut output_deps = Vec::with_capacity(p.outputs.len());
        for (xs, zs) in &p.output_deps {
            output_deps.push((
                xs.iter().map(step_index).collect::<Result<Vec<_>>>()?,
                zs.iter().map(step_index).collect::<Result<Vec<_>>>()?,
            ));
        }
        if output_deps.len() != p.outputs.len() || p.output_offset.len() != p.outputs.len() {
            return Err(Error::Structural("output dependency table size".into()));
        }
        Ok(Self {
            p,
            nodes,
            neighbors,
            inputs: p.inputs.iter().map(node_index).collect::<Result<Vec<_>>>()?,
            outputs: p.outputs.iter().map(node_index).collect::<Result<Vec<_>>>()?,
            steps,
            output_deps,
        })
    }
}

#[derive(Clone)]
struct Executor<'a> {
    plan: &'a Plan<'a>,
    state: PureState,
    alloc: Allocation,
    label_of: Vec<Label>,
    created: Vec<bool>,
    measured: Vec<bool>,
    pending_z: Vec<u8>,
    /// Per step: the outcome read from the device and the corrected one.
    raw: Vec<u8>,
    ideal: Vec<u8>,
    max_width: usize,
    wires: Vec<Label>,
}

impl<'a> Executor<'a> {
    fn new(plan: &'a Plan<'a>, state: PureState, wires: &[Label], alloc: Allocation) -> Result<Self> {
        if wires.len() != plan.inputs.len() {
            return Err(Error::Input("wire count does not match pattern inputs".into()));
        }
        for &w in wires {
            state.position(w)?;
        }
        let base = state.labels().iter().map(|l| l.0).max().map_or(0, |m| m + 1);
        let n = plan.nodes.len();
        let mut label_of: Vec<Label> = (0..n).map(|k| Label(base + k as u32)).collect();
        let mut created = vec![false; n];
        for (&node, &w) in plan.inputs.iter().zip(wires) {
            label_of[node] = w;
            created[node] = true;
        }
        let max_width = state.num_qubits();
        let mut ex = Self {
            plan,
            state,
            alloc,
            label_of,
            created,
            measured: vec![false; n],
            pending_z: vec![0; n],
            raw: vec![UNKNOWN; plan.steps.len()],
            ideal: vec![UNKNOWN; plan.steps.len()],
            max_width,
            wires: wires.to_vec(),
        };
        // edges between two inputs exist from the start
        for &a in &plan.inputs {
            for &b in &plan.neighbors[a] {
                if a < b && ex.created[b] {
                    ex.state.apply(Gate::CZ, &[ex.label_of[a], ex.label_of[b]])?;
                }
            }
        }
        if alloc == Allocation::Full {
            for node in 0..n {
                ex.create(node)?;
            }
        }
        Ok(ex)
    }

    fn create(&mut self, node: usize) -> Result<()> {
        if self.created[node] {
            return Ok(());
        }
        let label = self.label_of[node];
        let theta = if self.pending_z[node] == 1 { PI } else { 0.0 };
        self.pending_z[node] = 0;
        self.state = self.state.tensor(&PureState::plus_theta_on(label, theta))?;
        self.created[node] = true;
        for &n in &self.plan.neighbors[node] {
            if self.created[n] && !self.measured[n] {
                self.state.apply(Gate::CZ, &[label, self.label_of[n]])?;
            }
        }
        let width = self.state.num_qubits();
        self.max_width = self.max_width.max(width);
        if self.alloc == Allocation::JustInTime && width > JIT_WIDTH_CAP {
            return Err(Error::TooManyQubits(width, JIT_WIDTH_CAP));
        }
        Ok(())
    }

    /// Corrected outcome of step `i`, resolving its frame from other outcomes.
    fn resolve(&mut self, i: usize) -> Result<u8> {
        if self.ideal[i] != UNKNOWN {
            return Ok(self.ideal[i]);
        }
        let mut stack = vec![i];
        let mut open = vec![false; self.ideal.len()];
        open[i] = true;
        while let Some(&top) = stack.last() {
            let (_, xs, zs) = &self.plan.steps[top];
            let t = self.raw[top];
            if t == UNKNOWN {
                let node = self.plan.p.steps[top].node;
                return Err(Error::Sequencing(format!("outcome of {node} not yet available")));
            }
            if let Some(&d) = xs.iter().chain(zs).find(|&&d| self.ideal[d] == UNKNOWN) {
                if open[d] {
                    let node = self.plan.p.steps[d].node;
                    return Err(Error::Sequencing(format!("cyclic dependency through {node}")));
                }
                open[d] = true;
                stack.push(d);
                continue;
            }
            let x = xs.iter().fold(0, |acc, &d| acc ^ self.ideal[d]) == 1;
            let z = zs.iter().fold(0, |acc, &d| acc ^ self.ideal[d]) == 1;
            self.ideal[top] = t ^ u8::from(self.plan.p.steps[top].role.flips(x, z));
            open[top] = false;
            stack.pop();
        }
        Ok(self.ideal[i])
    }

    fn parity(&mut self, deps: &[usize]) -> Result<u8> {
        let mut acc = 0u8;
        for &d in deps {
            acc ^= self.resolve(d)?;
        }
        Ok(acc)
    }

    /// Creates whatever step `i` needs before its node can be measured.
    fn prepare(&mut self, i: usize) -> Result<()> {
        let v = self.plan.steps[i].0;
        self.create(v)?;
        if self.plan.p.steps[i].role != Role::EliminateZ {
            for k in 0..self.plan.neighbors[v].len() {
                let n = self.plan.neighbors[v][k];
                if !self.measured[n] {
                    self.create(n)?;
                }
            }
        }
        Ok(())
    }

    fn measure(&mut self, i: usize, src: &mut OutcomeSource) -> Result<TranscriptEntry> {
        let plan = self.plan;
        let step = &plan.p.steps[i];
        let v = plan.steps[i].0;
        let x = match step.role {
            Role::Adaptive(_) => self.parity(&plan.steps[i].1)? == 1,
            _ => false,
        };
        let basis = step.role.measurement_basis(x);
        let m = self.state.measure(self.label_of[v], basis, src)?;
        self.measured[v] = true;
        if step.role == Role::EliminateZ && m.bit == 1 {
            for &n in &plan.neighbors[v] {
                if !self.created[n] {
                    self.pending_z[n] ^= 1;
                }
            }
        }
        self.raw[i] = m.bit;
        let (_, xs, zs) = &plan.steps[i];
        if xs.iter().chain(zs).all(|&d| self.ideal[d] != UNKNOWN) {
            let x = xs.iter().fold(0, |acc, &d| acc ^ self.ideal[d]) == 1;
            let z = zs.iter().fold(0, |acc, &d| acc ^ self.ideal[d]) == 1;
            self.ideal[i] = m.bit ^ u8::from(step.role.flips(x, z));
        }
        Ok(TranscriptEntry {
            node: step.node,
            basis,
            outcome: m.bit,
            probability: m.probability,
        })
    }

    fn finish(mut self, transcript: Transcript) -> Result<PatternRun> {
        let plan = self.plan;
        for &o in &plan.outputs {
            self.create(o)?;
        }
        let mut frame = ByproductFrame::identity(plan.outputs.len());
        for (i, (xs, zs)) in plan.output_deps.iter().enumerate() {
            let (a, b) = plan.p.output_offset[i];
            frame.push(i, a ^ self.parity(xs)?, b ^ self.parity(zs)?);
        }
        for (&o, &w) in plan.outputs.iter().zip(&self.wires) {
            self.state.relabel(self.label_of[o], w)?;
        }
        Ok(PatternRun {
            state: self.state,
            transcript,
            frame,
            max_width: self.max_width,
        })
    }

    fn run(mut self, src: &mut OutcomeSource) -> Result<PatternRun> {
        let mut transcript = Transcript::default();
        for i in 0..self.plan.steps.len() {
            self.prepare(i)?;
            let entry = self.measure(i, src)?;
            transcript.entries.push(entry);
        }
        self.finish(transcript)
    }

    /// Depth-first walk over both outcomes of every step from `i` on.
    fn branch<F>(mut self, i: usize, transcript: Transcript, visit: &mut F, skipped: &mut usize) -> Result<()>
    where
        F: FnMut(PatternRun) -> Result<()>,
    {
        if i == self.plan.steps.len() {
            return visit(self.finish(transcript)?);
        }
        self.prepare(i)?;
        let zero = self.clone();
        for (bit, mut next) in [(0u8, zero), (1, self)] {
            match next.measure(i, &mut OutcomeSource::forced(vec![bit])) {
                Ok(entry) => {
                    let mut t = transcript.clone();
                    t.entries.push(entry);
                    next.branch(i + 1, t, visit, skipped)?;
                }
                Err(Error::DegenerateBranch { .. }) => *skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

/// [`for_each_branch_on`] for single-qubit `inputs`; wire `i` is labelled `i`.
pub fn for_each_branch<F>(p: &MeasurementPattern, inputs: &[PureState], alloc: Allocation, visit: F) -> Result<usize>
where
    F: FnMut(PatternRun) -> Result<()>,
{
    let state = wire_product(inputs)?;
    let wires: Vec<Label> = (0..inputs.len() as u32).map(Label).collect();
    for_each_branch_on(p, state, &wires, alloc, visit)
}

/// Tensor product of single-qubit states, relabelled `0..n`.
pub fn wire_product(inputs: &[PureState]) -> Result<PureState> {
    let mut state: Option<PureState> = None;
    for (i, q) in inputs.iter().enumerate() {
        if q.num_qubits() != 1 {
            return Err(Error::Input(format!("input {i} is not a single qubit")));
        }
        let mut q = q.clone();
        let cur = q.labels()[0];
        q.relabel(cur, Label(i as u32))?;
        state = Some(match state {
            None => q,
            Some(s) => s.tensor(&q)?,
        });
    }
    state.ok_or_else(|| Error::Input("no inputs".into()))
}

/// The reference result for `p`: its declared gates applied to `inputs`.
pub fn declared_output(p: &MeasurementPattern, inputs: &[PureState]) -> Result<PureState> {
    let mut expected = wire_product(inputs)?;
    let wires: Vec<Label> = (0..inputs.len() as u32).map(Label).collect();
    p.apply_declared(&mut expected, &wires)?;
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-10;

    fn chain(n: u32) -> ClusterGraph {
        let mut g = ClusterGraph::new();
        for i in 1..=n {
            g.add_node(Label(i), i as i32, 1).unwrap();
        }
        for i in 1..n {
            g.add_edge(Label(i), Label(i + 1)).unwrap();
        }
        g
    }

    fn corrected(mut run: PatternRun) -> PureState {
        let wires: Vec<Label> = (0..run.frame.wires.len() as u32).map(Label).collect();
        apply_byproducts(&mut run.state, &mut run.frame, &wires).unwrap();
        run.state
    }

    #[test]
    fn graph_rejects_bad_structure() {
        let mut g = chain(2);
        assert!(matches!(g.add_node(Label(1), 5, 5), Err(Error::Input(_))));
        assert!(matches!(g.add_node(Label(9), 1, 1), Err(Error::Input(_))));
        assert!(matches!(g.add_edge(Label(1), Label(1)), Err(Error::Input(_))));
        assert!(matches!(g.add_edge(Label(2), Label(1)), Err(Error::Input(_))));
        assert!(g.add_edge(Label(1), Label(7)).is_err());
        assert_eq!(g.degree(Label(1)), 1);
    }

    #[test]
    fn single_node_cluster_is_plus() {
        let mut g = ClusterGraph::new();
        g.add_node(Label(1), 1, 1).unwrap();
        let s = build_cluster(&g, &BTreeMap::new()).unwrap();
        assert!((s.fidelity(&PureState::plus_theta_on(Label(1), 0.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_node_cluster_matches_closed_form() {
        let theta = 0.7;
        let g = chain(2);
        let inputs = BTreeMap::from([(Label(1), PureState::plus_theta(theta))]);
        let s = build_cluster(&g, &inputs).unwrap();
        // (|0>|+> + e^{i theta}|1>|->)/sqrt2
        let h = 0.5;
        let e = Complex64::from_polar(1.0, theta);
        let want = PureState::from_amplitudes(
            vec![Label(1), Label(2)],
            vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0), e * h, -e * h],
        )
        .unwrap();
        assert!((s.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);

        let mut rev = ClusterGraph::new();
        rev.add_node(Label(1), 1, 1).unwrap();
        rev.add_node(Label(2), 2, 1).unwrap();
        rev.add_edge(Label(2), Label(1)).unwrap();
        assert_eq!(build_cluster(&rev, &inputs).unwrap(), s);
    }

    #[test]
    fn adapt_angle_signs() {
        assert_eq!(adapt_angle(0.4, &[Some(0), Some(0)]).unwrap(), 0.4);
        assert_eq!(adapt_angle(0.4, &[Some(1)]).unwrap(), -0.4);
        assert_eq!(adapt_angle(0.4, &[Some(1), Some(1)]).unwrap(), 0.4);
        assert_eq!(adapt_angle(0.0, &[Some(1)]).unwrap(), 0.0);
        assert!(matches!(adapt_angle(0.4, &[Some(0), None]), Err(Error::Sequencing(_))));
    }

    #[test]
    fn byproduct_application() {
        let mut s = PureState::plus_theta(1.1);
        let before = s.clone();
        let mut f = ByproductFrame::identity(1);
        apply_byproducts(&mut s, &mut f, &[Label(0)]).unwrap();
        assert_eq!(s, before);

        let mut s = PureState::basis(1, "0").unwrap();
        let mut f = ByproductFrame { wires: vec![(1, 1)] };
        apply_byproducts(&mut s, &mut f, &[Label(0)]).unwrap();
        assert!((s.fidelity(&PureState::basis(1, "1").unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!(f.is_identity());
    }

    #[test]
    fn teleport_step_branches_agree_after_x() {
        // Measure qubit 1 of the two-node chain in M(0): branch s leaves X^s H|+_theta>.
        let theta = PI / 4.0;
        let inputs = BTreeMap::from([(Label(1), PureState::plus_theta(theta))]);
        let mut results = Vec::new();
        for s in 0..2u8 {
            let mut st = build_cluster(&chain(2), &inputs).unwrap();
            st.measure(Label(1), MeasBasis::X, &mut OutcomeSource::forced(vec![s])).unwrap();
            let mut f = ByproductFrame { wires: vec![(s, 0)] };
            apply_byproducts(&mut st, &mut f, &[Label(2)]).unwrap();
            results.push(st);
        }
        let mut want = PureState::plus_theta_on(Label(2), theta);
        want.apply(Gate::H, &[Label(2)]).unwrap();
        for r in &results {
            assert!((r.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_elimination_leaves_rest_of_cluster() {
        // 1 - 2 - 3 with 3 dangling; removing 3 in Z is CZ^s undone by Z^s on 2.
        let inputs = BTreeMap::from([(Label(1), PureState::plus_theta(0.3))]);
        let want = build_cluster(&chain(2), &inputs).unwrap();
        for s in 0..2u8 {
            let mut st = build_cluster(&chain(3), &inputs).unwrap();
            let m = st.measure(Label(3), MeasBasis::Computational, &mut OutcomeSource::forced(vec![s])).unwrap();
            assert!((m.probability - 0.5).abs() < 1e-12);
            if s == 1 {
                st.apply(Gate::Z, &[Label(2)]).unwrap();
            }
            assert!((st.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_zero_rejected() {
        assert!(matches!(pattern_for_gate(GateKind::Cnot { separation: 0 }), Err(Error::Input(_))));
        assert!(pattern_for_gate(GateKind::Rotation { xi: f64::NAN, eta: 0.0, zeta: 0.0 }).is_err());
    }

    #[test]
    fn hadamard_pattern_roles() {
        let p = pattern_for_gate(GateKind::Hadamard).unwrap();
        assert_eq!(p.declared, vec![WireGate::new(Gate::H, &[0])]);
        assert_eq!(p.num_measured(), 4);
        let roles: Vec<Role> = p.steps.iter().map(|s| s.role).collect();
        assert_eq!(roles[0], Role::Base(PauliAxis::X));
        assert!(roles[1..].iter().all(|&r| r == Role::Base(PauliAxis::Y)));
        assert!(p.is_pauli_only());
    }

    #[test]
    fn hadamard_zero_branch() {
        let p = pattern_for_gate(GateKind::Hadamard).unwrap();
        let input = PureState::basis(1, "0").unwrap();
        let run = run_pattern(&p, &[input], &mut OutcomeSource::zeros(), Allocation::JustInTime).unwrap();
        assert_eq!(run.transcript.bitstring(), "0000");
        let out = corrected(run);
        assert!((out.fidelity(&PureState::plus_theta(0.0)).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn hadamard_every_branch() {
        let p = pattern_for_gate(GateKind::Hadamard).unwrap();
        let input = PureState::plus_theta(0.9);
        let want = declared_output(&p, std::slice::from_ref(&input)).unwrap();
        let mut total = 0.0;
        let mut n = 0;
        let skipped = for_each_branch(&p, &[input], Allocation::JustInTime, |run| {
            total += run.transcript.probability();
            n += 1;
            let out = corrected(run);
            assert!((out.fidelity(&want)? - 1.0).abs() < TOL);
            Ok(())
        })
        .unwrap();
        assert_eq!((n, skipped), (16, 0));
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cnot_adjacent_on_basis_state() {
        let p = pattern_for_gate(GateKind::Cnot { separation: 1 }).unwrap();
        let inputs = [PureState::basis(1, "1").unwrap(), PureState::basis(1, "0").unwrap()];
        for seed in 0..8 {
            let run = run_pattern(&p, &inputs, &mut OutcomeSource::seeded(seed), Allocation::JustInTime).unwrap();
            let out = corrected(run);
            assert!((out.fidelity(&PureState::basis(2, "11").unwrap()).unwrap() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn rotation_follows_declared_euler_order() {
        let (xi, eta, zeta) = (0.3, 1.1, -0.7);
        let p = pattern_for_gate(GateKind::Rotation { xi, eta, zeta }).unwrap();
        let input = PureState::plus_theta(0.25);
        let mut want = input.clone();
        want.relabel(want.labels()[0], Label(0)).unwrap();
        for g in [Gate::H, Gate::Rz(xi), Gate::H, Gate::Rz(eta), Gate::H, Gate::Rz(zeta), Gate::H] {
            want.apply(g, &[Label(0)]).unwrap();
        }
        for_each_branch(&p, &[input], Allocation::JustInTime, |run| {
            assert!((corrected(run).fidelity(&want)? - 1.0).abs() < TOL);
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn jit_matches_full_allocation() {
        for kind in [
            GateKind::Cnot { separation: 1 },
            GateKind::Rotation { xi: 0.2, eta: -1.3, zeta: 2.0 },
        ] {
            let p = pattern_for_gate(kind).unwrap();
            assert!(p.graph.num_nodes() <= 16);
            let inputs: Vec<PureState> = (0..p.num_wires()).map(|w| PureState::plus_theta(0.4 + w as f64)).collect();
            let collect = |alloc| {
                let mut runs = Vec::new();
                for_each_branch(&p, &inputs, alloc, |run| {
                    runs.push(run);
                    Ok(())
                })
                .unwrap();
                runs
            };
            let jit = collect(Allocation::JustInTime);
            let full = collect(Allocation::Full);
            assert_eq!(jit.len(), full.len());
            for (a, b) in jit.iter().zip(&full) {
                assert_eq!(a.transcript.outcomes(), b.transcript.outcomes());
                assert!((a.transcript.probability() - b.transcript.probability()).abs() < 1e-12);
                assert_eq!(a.frame, b.frame);
                assert!((a.state.fidelity(&b.state).unwrap() - 1.0).abs() < TOL);
                assert!(a.max_width <= b.max_width);
            }
        }
    }

    #[test]
    fn longer_cnots_verify() {
        for s in 1..=2 {
            let p = pattern_for_gate(GateKind::Cnot { separation: s }).unwrap();
            assert_eq!(p.num_wires(), s + 1);
            let r = verify_pattern(&p, &[]).unwrap();
            assert!(r.passes(TOL), "{r:?}");
        }
    }

    #[test]
    fn text_round_trip() {
        for kind in [
            GateKind::Hadamard,
            GateKind::Rotation { xi: 0.5, eta: 0.25, zeta: -1.0 },
            GateKind::Cnot { separation: 1 },
            GateKind::Cnot { separation: 3 },
        ] {
            let p = pattern_for_gate(kind).unwrap();
            let text = write_pattern(&p);
            let q = parse_pattern(&text).unwrap();
            assert_eq!(write_pattern(&q), text);
            assert_eq!(q.steps, p.steps);
            assert_eq!(q.output_offset, p.output_offset);
        }
    }

    #[test]
    fn validate_catches_bad_patterns() {
        let head = "pattern t\ninput 1\noutput 3\ndeclare I 0\n";
        let edges = "edge 1 2\nedge 2 3\n";
        let ok = format!("{head}node 1 1 1 X\nnode 2 2 1 X x:1\nnode 3 3 1 out x:2 z:1\n{edges}");
        assert!(parse_pattern(&ok).is_ok());
        // adaptive step waiting on a later node
        let late = format!("{head}node 1 1 1 A:0.3 x:2\nnode 2 2 1 X\nnode 3 3 1 out\n{edges}");
        assert!(matches!(parse_pattern(&late), Err(Error::Sequencing(_))));
        // node never measured
        let missing = format!("{head}node 1 1 1 X\nnode 3 3 1 out\nedge 1 3\n");
        assert!(parse_pattern(&missing).is_ok());
        let unmeasured = format!("{head}node 1 1 1 X\nnode 2 2 1 out\nnode 3 3 1 out\n{edges}");
        assert!(parse_pattern(&unmeasured).is_err());
        // output measured
        let measured_out = "pattern t\ninput 1\noutput 2\ndeclare I 0\nnode 1 1 1 X\nnode 2 2 1 X\nedge 1 2\n";
        assert!(parse_pattern(measured_out).is_err());
    }

    #[test]
    fn transcript_probability_is_product() {
        let p = pattern_for_gate(GateKind::Hadamard).unwrap();
        let run = run_pattern(&p, &[PureState::basis(1, "1").unwrap()], &mut OutcomeSource::seeded(3), Allocation::JustInTime)
            .unwrap();
        let prod: f64 = run.transcript.entries.iter().map(|e| e.probability).product();
        assert_eq!(run.transcript.probability(), prod);
        assert!(run.transcript.entries.iter().all(|e| e.probability > 0.0 && e.probability <= 1.0));
    }
}
