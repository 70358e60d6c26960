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

//! Branch-by-branch checks of a pattern against its declared unitary.
//!
//! Every wire is entangled with a reference qubit, so one run per branch
//! yields the whole branch operator `M`. With `B = U^dag M / c` and
//! `E = B - I`, every input state `psi` satisfies
//! `F(psi) >= ((1 - |E|) / (1 + |E|))^2`, which is the bound reported.
//! Probe inputs are evaluated exactly from the same operator.

use num_complex::Complex64;

use super::{
    apply_byproducts, for_each_branch_on, run_pattern_on, wire_product, Allocation, MeasurementPattern, PatternRun,
};
use crate::error::{Error, Result};
use crate::statevector::{Gate, Label, OutcomeSource, PureState};

/// Outcome of [`verify_pattern`].
#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport {
    /// Branches with nonzero probability.
    pub branches: usize,
    /// Branches skipped because their probability was below the floor.
    pub skipped: usize,
    /// Sum of branch probabilities.
    pub probability_sum: f64,
    /// Smallest fidelity lower bound over all branches (any input).
    pub worst_bound: f64,
    /// Smallest exact fidelity over all branches and probe inputs.
    pub worst_probe: Option<f64>,
    /// Probe product states per branch.
    pub probes: usize,
}

impl SoundnessReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_bound >= 1.0 - tol
            && self.worst_probe.is_none_or(|f| f >= 1.0 - tol)
            && (self.probability_sum - 1.0).abs() <= tol
    }
}

/// The declared unitary as a dense row-major `2^n x 2^n` matrix, wire 0 most
/// significant.
pub fn declared_matrix(p: &MeasurementPattern) -> Result<Vec<Complex64>> {
    let n = p.num_wires();
    let d = 1usize << n;
    let wires: Vec<Label> = (0..n as u32).map(Label).collect();
    let mut u = vec![Complex64::new(0.0, 0.0); d * d];
    for col in 0..d {
        let bits: String = (0..n).map(|q| if (col >> (n - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect();
        let mut s = PureState::basis(n, &bits)?;
        p.apply_declared(&mut s, &wires)?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[row * d + col] = *a;
        }
    }
    Ok(u)
}

fn bell_pairs(n: usize) -> Result<(PureState, Vec<Label>, Vec<Label>)> {
    let wires: Vec<Label> = (0..n as u32).map(Label).collect();
    let refs: Vec<Label> = (n as u32..2 * n as u32).map(Label).collect();
    let mut s = wire_product(&vec![PureState::basis(1, "0")?; 2 * n])?;
    for (&w, &r) in wires.iter().zip(&refs) {
        s.apply(Gate::H, &[w])?;
        s.apply(Gate::CNOT, &[w, r])?;
    }
    Ok((s, wires, refs))
}

/// Probe product states: every combination of `singles` across the wires,
/// first wire slowest.
fn probe_vectors(singles: &[PureState], n: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut out = vec![vec![Complex64::new(1.0, 0.0)]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * singles.len());
        for v in &out {
            for s in singles {
                if s.num_qubits() != 1 {
                    return Err(Error::Input("probe states must be single qubits".into()));
                }
                let a = s.amplitudes();
                let mut w = Vec::with_capacity(v.len() * 2);
                for x in v {
                    w.push(x * a[0]);
                    w.push(x * a[1]);
                }
                next.push(w);
            }
        }
        out = next;
    }
    Ok(out)
}

fn matvec(m: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let d = v.len();
    (0..d).map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum()).collect()
}

/// Which branches [`verify_pattern_with`] visits.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BranchMode {
    Exhaustive,
    /// `runs` Born-sampled branches from a seeded source.
    Sampled { runs: usize, seed: u64 },
    /// The all-zero branch only.
    Zero,
}

/// Runs every branch of `p` (just-in-time allocation) and compares the
/// corrected branch operator with the declared unitary.
pub fn verify_pattern(p: &MeasurementPattern, probes: &[PureState]) -> Result<SoundnessReport> {
    verify_pattern_with(p, probes, BranchMode::Exhaustive)
}

pub fn verify_pattern_with(p: &MeasurementPattern, probes: &[PureState], mode: BranchMode) -> Result<SoundnessReport> {
    let n = p.num_wires();
    let (state, wires, refs) = bell_pairs(n)?;
    let probe_vecs = if probes.is_empty() { Vec::new() } else { probe_vectors(probes, n)? };
    let check = Check {
        d: 1usize << n,
        u: declared_matrix(p)?,
        order: wires.iter().chain(&refs).copied().collect(),
        wires: wires.clone(),
        probe_vecs,
    };
    let mut report = SoundnessReport {
        branches: 0,
        skipped: 0,
        probability_sum: 0.0,
        worst_bound: 1.0,
        worst_probe: (!probes.is_empty()).then_some(1.0),
        probes: check.probe_vecs.len(),
    };
    let mut src = match mode {
        BranchMode::Exhaustive => {
            report.skipped =
                for_each_branch_on(p, state, &wires, Allocation::JustInTime, |run| check.visit(&mut report, run))?;
            return Ok(report);
        }
        BranchMode::Sampled { seed, .. } => OutcomeSource::seeded(seed),
        BranchMode::Zero => OutcomeSource::zeros(),
    };
    let runs = match mode {
        BranchMode::Sampled { runs, .. } => runs,
        _ => 1,
    };
    for _ in 0..runs {
        let run = run_pattern_on(p, state.clone(), &wires, &mut src, Allocation::JustInTime)?;
        check.visit(&mut report, run)?;
    }
    Ok(report)
}

struct Check {
    d: usize,
    u: Vec<Complex64>,
    order: Vec<Label>,
    wires: Vec<Label>,
    probe_vecs: Vec<Vec<Complex64>>,
}

impl Check {
    fn visit(&self, report: &mut SoundnessReport, mut run: PatternRun) -> Result<()> {
        let (d, u) = (self.d, &self.u);
        apply_byproducts(&mut run.state, &mut run.frame, &self.wires)?;
        let amps = run.state.permuted(&self.order)?.amplitudes().to_vec();
        // b = U^dag M, M[out][ref] = amps[out * d + ref]
        let mut b = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let uk = u[k * d + i].conj();
                if uk.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    b[i * d + j] += uk * amps[k * d + j];
                }
            }
        }
        let c = (0..d).map(|i| b[i * d + i]).sum::<Complex64>() / d as f64;
        if c.norm() < 1e-300 {
            report.worst_bound = 0.0;
        } else {
            let mut e2 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                    e2 += (b[i * d + j] / c - target).norm_sqr();
                }
            }
            let e = e2.sqrt();
            let bound = if e >= 1.0 { 0.0 } else { ((1.0 - e) / (1.0 + e)).powi(2) };
            report.worst_bound = report.worst_bound.min(bound);
        }
        if let Some(worst) = report.worst_probe.as_mut() {
            for psi in &self.probe_vecs {
                let bpsi = matvec(&b, psi);
                let overlap: Complex64 = psi.iter().zip(&bpsi).map(|(x, y)| x.conj() * y).sum();
                let norm: f64 = bpsi.iter().map(|z| z.norm_sqr()).sum();
                let f = if norm > 0.0 { overlap.norm_sqr() / norm } else { 0.0 };
                *worst = worst.min(f);
            }
        }
        report.branches += 1;
        report.probability_sum += run.transcript.probability();
        Ok(())
    }
}

/// Single-qubit probe inputs: the four axis states and one generic state.
pub fn probe_states() -> Vec<PureState> {
    let l = Label(0);
    let generic = {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        PureState::from_amplitudes(vec![l], vec![Complex64::new(c, 0.0), Complex64::from_polar(s, 1.1)])
            .expect("unit norm")
    };
    vec![
        PureState::basis_on(&[l], "0").expect("one qubit"),
        PureState::basis_on(&[l], "1").expect("one qubit"),
        PureState::plus_theta_on(l, 0.0),
        PureState::plus_theta_on(l, std::f64::consts::FRAC_PI_2),
        generic,
    ]
}

/// Angle triples `(xi, eta, zeta)` used when checking the rotation pattern.
pub const ROTATION_SAMPLES: [(f64, f64, f64); 3] = [(0.3, 1.1, -0.7), (std::f64::consts::FRAC_PI_4, 2.0, 0.5), (-2.5, 0.9, 3.0)];

/// Widest pattern for which every probe product is checked; wider patterns
/// rely on the operator bound alone.
pub const PROBE_WIRE_LIMIT: usize = 3;
