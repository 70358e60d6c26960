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

//! Dense pure-state simulation over labelled qubits.
//!
//! Amplitudes are stored with the first label as the most significant bit, so
//! `PureState::basis(2, "10")` puts the first qubit in `|1>`. Labels are
//! stable handles: destructive measurement removes a qubit and shifts the
//! positions of the others, but never renames them.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Forced branches below this Born weight are rejected.
pub const BRANCH_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Qubit handle. Survives measurement of other qubits.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for Label {
    fn from(v: u32) -> Self {
        Label(v)
    }
}

/// Reduce an angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Gate set of the simulator. `Rz(phi)` is `diag(1, e^{i phi})`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    S,
    CZ,
    /// Control is the first target, the flipped qubit the second.
    CNOT,
    Rz(f64),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::CZ | Gate::CNOT => 2,
            _ => 1,
        }
    }

    /// Row-major matrix of dimension `2^arity`.
    pub fn matrix(&self) -> Vec<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match *self {
            Gate::I => vec![ONE, ZERO, ZERO, ONE],
            Gate::X => vec![ZERO, ONE, ONE, ZERO],
            Gate::Y => vec![ZERO, -i, i, ZERO],
            Gate::Z => vec![ONE, ZERO, ZERO, -ONE],
            Gate::H => vec![h, h, h, -h],
            Gate::S => vec![ONE, ZERO, ZERO, i],
            Gate::Rz(phi) => vec![ONE, ZERO, ZERO, phase(phi)],
            Gate::CZ => {
                let mut m = identity(4);
                m[15] = -ONE;
                m
            }
            Gate::CNOT => {
                let mut m = identity(4);
                m[10] = ZERO;
                m[11] = ONE;
                m[14] = ONE;
                m[15] = ZERO;
                m
            }
        }
    }
}

pub(crate) fn identity(dim: usize) -> Vec<Complex64> {
    let mut m = vec![ZERO; dim * dim];
    for k in 0..dim {
        m[k * dim + k] = ONE;
    }
    m
}

/// Single-qubit measurement basis.
///
/// `Rotated(delta)` projects onto `|+_delta>` (outcome 0) and `|-_delta>`
/// (outcome 1), where `|+-_delta> = (|0> +- e^{i delta}|1>)/sqrt 2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum MeasBasis {
    Computational,
    Rotated(f64),
}

impl MeasBasis {
    /// X eigenbasis, `M(0)`.
    pub const X: MeasBasis = MeasBasis::Rotated(0.0);
    /// Y eigenbasis, `M(pi/2)`.
    pub const Y: MeasBasis = MeasBasis::Rotated(PI / 2.0);

    pub fn rotated(delta: f64) -> Self {
        MeasBasis::Rotated(wrap_angle(delta))
    }

    /// Bra coefficients `(<b|0>, <b|1>)` for outcome `bit`.
    fn bra(&self, bit: u8) -> (Complex64, Complex64) {
        match *self {
            MeasBasis::Computational => {
                if bit == 0 {
                    (ONE, ZERO)
                } else {
                    (ZERO, ONE)
                }
            }
            MeasBasis::Rotated(delta) => {
                let s = if bit == 0 { 1.0 } else { -1.0 };
                (
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                    phase(-delta) * (s * FRAC_1_SQRT_2),
                )
            }
        }
    }
}

impl fmt::Display for MeasBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasBasis::Computational => write!(f, "Z"),
            MeasBasis::Rotated(d) => write!(f, "M({d:.6})"),
        }
    }
}

/// Where measurement outcomes come from.
#[derive(Clone, Debug)]
pub enum OutcomeSource {
    /// Born-rule sampling from a seeded generator.
    Sampled(ChaCha8Rng),
    /// Explicit branch word, consumed one outcome per measurement.
    Forced { bits: Vec<u8>, cursor: usize },
    /// Every outcome forced to 0.
    Zeros,
}

impl OutcomeSource {
    pub fn seeded(seed: u64) -> Self {
        OutcomeSource::Sampled(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn forced(bits: Vec<u8>) -> Self {
        OutcomeSource::Forced { bits, cursor: 0 }
    }

    /// Forced word from the low `len` bits of `word`, first outcome in bit 0.
    pub fn from_word(word: u64, len: usize) -> Self {
        Self::forced((0..len).map(|k| ((word >> k) & 1) as u8).collect())
    }

    pub fn zeros() -> Self {
        OutcomeSource::Zeros
    }

    fn choose(&mut self, label: Label, probs: [f64; 2]) -> Result<u8> {
        let bit = match self {
            OutcomeSource::Sampled(rng) => {
                let r: f64 = rng.gen();
                let bit = if r < probs[0] { 0 } else { 1 };
                if probs[bit] < BRANCH_FLOOR {
                    return Ok(1 - bit as u8);
                }
                return Ok(bit as u8);
            }
            OutcomeSource::Forced { bits, cursor } => {
                let b = *bits.get(*cursor).ok_or(Error::BranchWordExhausted(*cursor))?;
                *cursor += 1;
                b & 1
            }
            OutcomeSource::Zeros => 0,
        };
        if probs[bit as usize] < BRANCH_FLOOR {
            return Err(Error::DegenerateBranch {
                label,
                bit,
                probability: probs[bit as usize],
            });
        }
        Ok(bit)
    }
}

/// Result of one destructive measurement.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Measurement {
    pub bit: u8,
    pub probability: f64,
}

/// Dense state vector over uniquely labelled qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    labels: Vec<Label>,
    amps: Vec<Complex64>,
}

fn parse_bits(bits: &str) -> Result<Vec<u8>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Input(format!("bad bit character {other:?}"))),
        })
        .collect()
}

fn check_width(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::TooManyQubits(n, MAX_QUBITS))
    } else {
        Ok(())
    }
}

fn check_unique(labels: &[Label]) -> Result<()> {
    for (k, l) in labels.iter().enumerate() {
        if labels[..k].contains(l) {
            return Err(Error::Input(format!("duplicate label {l}")));
        }
    }
    Ok(())
}

impl PureState {
    /// Builds a state from raw amplitudes, renormalising them.
    pub fn from_amplitudes(labels: Vec<Label>, amps: Vec<Complex64>) -> Result<Self> {
        check_width(labels.len())?;
        check_unique(&labels)?;
        if amps.len() != 1usize << labels.len() {
            return Err(Error::Input(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                labels.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm <= BRANCH_FLOOR {
            return Err(Error::Input("zero vector".into()));
        }
        let scale = 1.0 / norm.sqrt();
        Ok(Self {
            labels,
            amps: amps.into_iter().map(|a| a * scale).collect(),
        })
    }

    /// Computational basis state on labels `0..n`.
    pub fn basis(n: usize, bits: &str) -> Result<Self> {
        let labels: Vec<Label> = (0..n as u32).map(Label).collect();
        Self::basis_on(&labels, bits)
    }

    pub fn basis_on(labels: &[Label], bits: &str) -> Result<Self> {
        let bits = parse_bits(bits)?;
        if bits.len() != labels.len() {
            return Err(Error::Input(format!(
                "{} bits for {} qubits",
                bits.len(),
                labels.len()
            )));
        }
        check_width(labels.len())?;
        check_unique(labels)?;
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut amps = vec![ZERO; 1 << labels.len()];
        amps[index] = ONE;
        Ok(Self {
            labels: labels.to_vec(),
            amps,
        })
    }

    /// `alpha|0> + beta|1>` on one qubit, normalised.
    pub fn qubit(label: Label, alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_amplitudes(vec![label], vec![alpha, beta])
    }

    /// `(|0> + e^{i theta}|1>)/sqrt 2` on label 0.
    pub fn plus_theta(theta: f64) -> Self {
        Self::plus_theta_on(Label(0), theta)
    }

    pub fn plus_theta_on(label: Label, theta: f64) -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self {
            labels: vec![label],
            amps: vec![h, h * phase(wrap_angle(theta))],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn contains(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    pub fn position(&self, label: Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownLabel(label))
    }

    fn shift(&self, label: Label) -> Result<usize> {
        Ok(self.labels.len() - 1 - self.position(label)?)
    }

    /// Amplitude of a bitstring given in label order.
    pub fn amplitude(&self, bits: &str) -> Result<Complex64> {
        let bits = parse_bits(bits)?;
        if bits.len() != self.labels.len() {
            return Err(Error::Input("bitstring length mismatch".into()));
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        Ok(self.amps[index])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self (x) other`, with `self` in the high bits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        check_width(labels.len())?;
        check_unique(&labels)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { labels, amps })
    }

    pub fn relabel(&mut self, from: Label, to: Label) -> Result<()> {
        if from == to {
            return Ok(());
        }
        if self.contains(to) {
            return Err(Error::Input(format!("label {to} already in use")));
        }
        let p = self.position(from)?;
        self.labels[p] = to;
        Ok(())
    }

    /// Same state with qubits reordered to `order` (a permutation of the labels).
    pub fn permuted(&self, order: &[Label]) -> Result<PureState> {
        if order.len() != self.labels.len() {
            return Err(Error::Input("label sets differ".into()));
        }
        check_unique(order)?;
        let n = order.len();
        let shifts: Vec<usize> = order
            .iter()
            .map(|&l| self.shift(l))
            .collect::<Result<_>>()?;
        let mut amps = vec![ZERO; self.amps.len()];
        for (j, slot) in amps.iter_mut().enumerate() {
            let mut src = 0usize;
            for (k, s) in shifts.iter().enumerate() {
                let bit = (j >> (n - 1 - k)) & 1;
                src |= bit << s;
            }
            *slot = self.amps[src];
        }
        Ok(PureState {
            labels: order.to_vec(),
            amps,
        })
    }

    pub fn apply(&mut self, gate: Gate, targets: &[Label]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::Input(format!(
                "{gate:?} takes {} targets, got {}",
                gate.arity(),
                targets.len()
            )));
        }
        match gate {
            Gate::CZ => self.apply_cz(targets[0], targets[1]),
            Gate::I => self.shift(targets[0]).map(|_| ()),
            g if g.arity() == 1 => {
                let m = g.matrix();
                self.apply_single([m[0], m[1], m[2], m[3]], targets[0])
            }
            _ => self.apply_matrix(&gate.matrix(), targets),
        }
    }

    fn apply_single(&mut self, m: [Complex64; 4], target: Label) -> Result<()> {
        let bit = 1usize << self.shift(target)?;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let (a, b) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m[0] * a + m[1] * b;
            self.amps[i | bit] = m[2] * a + m[3] * b;
        }
        Ok(())
    }

    fn apply_cz(&mut self, a: Label, b: Label) -> Result<()> {
        if a == b {
            return Err(Error::Input("repeated target".into()));
        }
        let mask = (1usize << self.shift(a)?) | (1usize << self.shift(b)?);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Applies a row-major `2^k x 2^k` matrix; `targets[0]` is its most
    /// significant qubit.
    pub fn apply_matrix(&mut self, m: &[Complex64], targets: &[Label]) -> Result<()> {
        let k = targets.len();
        let dim = 1usize << k;
        if m.len() != dim * dim {
            return Err(Error::Input("matrix does not match target count".into()));
        }
        check_unique(targets)?;
        let shifts: Vec<usize> = targets
            .iter()
            .map(|&l| self.shift(l))
            .collect::<Result<_>>()?;
        let offsets: Vec<usize> = (0..dim)
            .map(|sub| {
                shifts
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (t, s)| acc | (((sub >> (k - 1 - t)) & 1) << s))
            })
            .collect();
        let mask = offsets[dim - 1];
        let mut buf = vec![ZERO; dim];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (r, slot) in buf.iter_mut().enumerate() {
                *slot = (0..dim)
                    .map(|c| m[r * dim + c] * self.amps[base | offsets[c]])
                    .sum();
            }
            for (r, v) in buf.iter().enumerate() {
                self.amps[base | offsets[r]] = *v;
            }
        }
        Ok(())
    }

    /// Unnormalised amplitudes left on the other qubits when `label` is
    /// projected onto outcome `bit` of `basis`.
    fn project(&self, label: Label, basis: MeasBasis, bit: u8) -> Result<Vec<Complex64>> {
        let k = self.shift(label)?;
        let (c0, c1) = basis.bra(bit);
        let low_mask = (1usize << k) - 1;
        Ok((0..self.amps.len() / 2)
            .map(|j| {
                let i0 = ((j >> k) << (k + 1)) | (j & low_mask);
                c0 * self.amps[i0] + c1 * self.amps[i0 | (1 << k)]
            })
            .collect())
    }

    /// Born weights of the two outcomes, without collapsing.
    pub fn branch_probabilities(&self, label: Label, basis: MeasBasis) -> Result<[f64; 2]> {
        let p0: f64 = self.project(label, basis, 0)?.iter().map(|a| a.norm_sqr()).sum();
        let p1: f64 = self.project(label, basis, 1)?.iter().map(|a| a.norm_sqr()).sum();
        Ok([p0, p1])
    }

    /// Destructive measurement: the qubit is removed and the rest renormalised.
    pub fn measure(
        &mut self,
        label: Label,
        basis: MeasBasis,
        src: &mut OutcomeSource,
    ) -> Result<Measurement> {
        let p0_branch = self.project(label, basis, 0)?;
        let p1_branch = self.project(label, basis, 1)?;
        let p0: f64 = p0_branch.iter().map(|a| a.norm_sqr()).sum();
        let p1: f64 = p1_branch.iter().map(|a| a.norm_sqr()).sum();
        let bit = src.choose(label, [p0, p1])?;
        let (mut amps, p) = if bit == 0 { (p0_branch, p0) } else { (p1_branch, p1) };
        let scale = 1.0 / p.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        let pos = self.position(label)?;
        self.labels.remove(pos);
        self.amps = amps;
        Ok(Measurement {
            bit,
            probability: p,
        })
    }

    /// Inner product `<self|other>` after aligning label order.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        let other = other
            .permuted(&self.labels)
            .map_err(|_| Error::Input("label sets differ".into()))?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Phase-insensitive overlap `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Amplitudes with the global phase fixed by the first nonzero entry.
    pub fn phase_fixed(&self) -> Vec<Complex64> {
        let pivot = self
            .amps
            .iter()
            .find(|a| a.norm() > 1e-12)
            .map(|a| a.conj() / a.norm())
            .unwrap_or(ONE);
        self.amps.iter().map(|a| a * pivot).collect()
    }

    /// Partial trace onto `keep`, in the given order.
    pub fn reduced_density(&self, keep: &[Label]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::Input("empty keep set".into()));
        }
        check_unique(keep)?;
        let mut order = keep.to_vec();
        for &l in &self.labels {
            if !keep.contains(&l) {
                order.push(l);
            }
        }
        for &l in keep {
            self.position(l)?;
        }
        let aligned = self.permuted(&order)?;
        let rows = 1usize << keep.len();
        let cols = aligned.amps.len() / rows;
        let m = DMatrix::from_row_slice(rows, cols, &aligned.amps);
        Ok(DensityMatrix {
            labels: keep.to_vec(),
            mat: &m * m.adjoint(),
        })
    }
}

/// Free-function form of [`PureState::fidelity`].
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    a.fidelity(b)
}

/// Hermitian, unit-trace operator on a labelled subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub labels: Vec<Label>,
    pub mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &PureState) -> Self {
        let v = DMatrix::from_column_slice(state.amps.len(), 1, &state.amps);
        DensityMatrix {
            labels: state.labels.clone(),
            mat: &v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.mat.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Largest deviation from Hermiticity, unit trace and positivity.
    pub fn invariant_violation(&self) -> f64 {
        let herm = (&self.mat - self.mat.adjoint())
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.norm()));
        let tr = (self.trace() - ONE).norm();
        let neg = self
            .eigenvalues()
            .into_iter()
            .fold(0.0f64, |acc, e| acc.max(-e));
        herm.max(tr).max(neg)
    }
}

/// `1/2 ||rho - sigma||_1`, from the eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.mat.shape() != sigma.mat.shape() {
        return Err(Error::Input(format!(
            "dimension mismatch {:?} vs {:?}",
            rho.mat.shape(),
            sigma.mat.shape()
        )));
    }
    let diff = &rho.mat - &sigma.mat;
    let d: f64 = diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}
