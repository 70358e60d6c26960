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


//! Checks that the server's view of a preparation does not depend on the
//! hidden angle.
//!
//! The server sees the measurement record and holds every physical qubit.
//! Two things are compared across angles: the distribution of transcripts,
//! and, for each transcript, the reduced states of the residual on qubit sets
//! that carry no logical content. The logical qubit itself is excluded; it
//! is the hidden state and depends on the angle by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mbqc::{run_pattern_on, Allocation, MeasurementPattern, Transcript, TranscriptEntry};
use crate::statevector::{trace_distance, DensityMatrix, Gate, Label, MeasBasis, OutcomeSource, PureState};
use crate::steane::{block_labels, MbqcEncoder};

/// Default numerical threshold for the check.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Protocols with at most this many measurements are enumerated exactly.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Sampled paths per angle when a protocol is too long to enumerate.
pub const DEFAULT_PATHS_PER_ANGLE: usize = 16;

const SAMPLING_SEED: u64 = 0x5eed;

/// The eight protocol angles `k pi / 4`.
pub fn protocol_angles() -> Vec<f64> {
    (0..8).map(|k| k as f64 * PI / 4.0).collect()
}

/// Basis of the first qubit in the two-qubit cluster.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FirstBasis {
    X,
    Y,
    Z,
}

fn min_cluster(theta: f64, first: FirstBasis) -> Result<PureState> {
    let (a, b) = match first {
        FirstBasis::X | FirstBasis::Y => (theta, 0.0),
        FirstBasis::Z => (0.0, theta),
    };
    let mut s = PureState::plus_theta_on(Label(1), a).tensor(&PureState::plus_theta_on(Label(2), b))?;
    s.apply(Gate::CZ, &[Label(1), Label(2)])?;
    Ok(s)
}

fn first_basis(first: FirstBasis) -> MeasBasis {
    match first {
        FirstBasis::X => MeasBasis::X,
        FirstBasis::Y => MeasBasis::Y,
        FirstBasis::Z => MeasBasis::Computational,
    }
}

/// Second qubit of the two-qubit cluster after the first is measured with
/// the given outcome, without any correction. For X and Y the hidden qubit
/// comes first; for Z it is the second one.
pub fn min_cluster_residual(theta: f64, first: FirstBasis, outcome: u8) -> Result<PureState> {
    let mut s = min_cluster(theta, first)?;
    s.measure(Label(1), first_basis(first), &mut OutcomeSource::forced(vec![outcome]))?;
    Ok(s)
}

/// Something the server executes on a hidden angle.
pub trait Protocol {
    fn name(&self) -> String;

    fn num_measured(&self) -> usize;

    /// One run: the transcript and the residual state.
    fn execute(&self, theta: f64, src: &mut OutcomeSource) -> Result<(Transcript, PureState)>;

    /// Qubit sets of the residual whose reduced states must not depend on
    /// the angle.
    fn environment(&self) -> Vec<Vec<Label>> {
        Vec::new()
    }
}

/// Two-qubit cluster with its first qubit measured.
#[derive(Copy, Clone, Debug)]
pub struct MinCluster(pub FirstBasis);

impl Protocol for MinCluster {
    fn name(&self) -> String {
        format!("min-cluster-{:?}", self.0)
    }

    fn num_measured(&self) -> usize {
        1
    }

    fn execute(&self, theta: f64, src: &mut OutcomeSource) -> Result<(Transcript, PureState)> {
        let mut s = min_cluster(theta, self.0)?;
        let basis = first_basis(self.0);
        let m = s.measure(Label(1), basis, src)?;
        let entry = TranscriptEntry {
            node: Label(1),
            basis,
            outcome: m.bit,
            probability: m.probability,
        };
        Ok((Transcript { entries: vec![entry] }, s))
    }
}

/// A single pattern with `|+_theta>` on wire 0 and `|+>` on the others.
impl Protocol for MeasurementPattern {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn num_measured(&self) -> usize {
        MeasurementPattern::num_measured(self)
    }

    fn execute(&self, theta: f64, src: &mut OutcomeSource) -> Result<(Transcript, PureState)> {
        let inputs: Vec<PureState> = (0..self.num_wires())
            .map(|w| PureState::plus_theta(if w == 0 { theta } else { 0.0 }))
            .collect();
        let state = crate::mbqc::wire_product(&inputs)?;
        let wires: Vec<Label> = (0..inputs.len() as u32).map(Label).collect();
        let run = run_pattern_on(self, state, &wires, src, Allocation::JustInTime)?;
        Ok((run.transcript, run.state))
    }
}

/// The cluster-state encoder of the whole preparation.
impl Protocol for MbqcEncoder {
    fn name(&self) -> String {
        "prepare".into()
    }

    fn num_measured(&self) -> usize {
        MbqcEncoder::num_measured(self)
    }

    fn execute(&self, theta: f64, src: &mut OutcomeSource) -> Result<(Transcript, PureState)> {
        let prep = self.run(theta, src)?;
        Ok((prep.transcript, prep.block.state))
    }

    /// Every pair of block qubits: a distance-3 code hides the logical
    /// state from any two of them.
    fn environment(&self) -> Vec<Vec<Label>> {
        let l = block_labels();
        (0..l.len())
            .flat_map(|a| (a + 1..l.len()).map(move |b| vec![l[a], l[b]]))
            .collect()
    }
}

fn check_bases(t: &Transcript) -> Result<()> {
    for e in &t.entries {
        let ok = match e.basis {
            MeasBasis::Computational => true,
            MeasBasis::Rotated(d) => d == 0.0 || d == PI / 2.0,
        };
        if !ok {
            return Err(Error::Contract(format!(
                "node {} is measured in {:?}, which depends on the hidden angle",
                e.node, e.basis
            )));
        }
    }
    Ok(())
}

/// Transcript bitstring to probability.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeDistribution {
    pub probs: BTreeMap<String, f64>,
    /// True when every branch was enumerated, so the probabilities sum to 1.
    pub exhaustive: bool,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// `1/2 sum |p - q|` over the union of both supports.
    pub fn tv_distance(&self, other: &OutcomeDistribution) -> f64 {
        let keys: BTreeSet<&String> = self.probs.keys().chain(other.probs.keys()).collect();
        let sum: f64 = keys
            .into_iter()
            .map(|k| (self.probs.get(k).unwrap_or(&0.0) - other.probs.get(k).unwrap_or(&0.0)).abs())
            .sum();
        0.5 * sum
    }
}

/// One forced run: probability of `path` and the environment marginals of
/// the residual. Zero-probability paths give `None`.
fn evaluate_path<P: Protocol + ?Sized>(
    protocol: &P,
    theta: f64,
    path: &[u8],
) -> Result<Option<(f64, Vec<DensityMatrix>)>> {
    match protocol.execute(theta, &mut OutcomeSource::forced(path.to_vec())) {
        Ok((t, residual)) => {
            check_bases(&t)?;
            let marginals = protocol
                .environment()
                .iter()
                .map(|set| residual.reduced_density(set))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some((t.probability(), marginals)))
        }
        Err(Error::DegenerateBranch { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn all_paths(k: usize) -> Vec<Vec<u8>> {
    (0..1u64 << k)
        .map(|w| (0..k).map(|i| (w >> (k - 1 - i) & 1) as u8).collect())
        .collect()
}

fn sample_paths<P: Protocol + ?Sized>(protocol: &P, theta: f64, count: usize, seed: u64) -> Result<Vec<Vec<u8>>> {
    let mut src = OutcomeSource::seeded(seed);
    (0..count)
        .map(|_| {
            let (t, _) = protocol.execute(theta, &mut src)?;
            check_bases(&t)?;
            Ok(t.outcomes())
        })
        .collect()
}

fn bitstring(path: &[u8]) -> String {
    path.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

/// Transcript distribution for `theta`. Short protocols are enumerated;
/// longer ones are sampled, with the exact probability of each sampled path,
/// so the total is below 1.
pub fn outcome_distribution<P: Protocol + ?Sized>(protocol: &P, theta: f64) -> Result<OutcomeDistribution> {
    let k = protocol.num_measured();
    let exhaustive = k <= EXHAUSTIVE_LIMIT;
    let paths = if exhaustive {
        all_paths(k)
    } else {
        sample_paths(protocol, theta, DEFAULT_PATHS_PER_ANGLE, SAMPLING_SEED)?
    };
    distribution_on(protocol, theta, &paths, exhaustive)
}

fn distribution_on<P: Protocol + ?Sized>(
    protocol: &P,
    theta: f64,
    paths: &[Vec<u8>],
    exhaustive: bool,
) -> Result<OutcomeDistribution> {
    let mut probs = BTreeMap::new();
    for path in paths {
        if let Some((p, _)) = evaluate_path(protocol, theta, path)? {
            probs.insert(bitstring(path), p);
        }
    }
    Ok(OutcomeDistribution { probs, exhaustive })
}

/// Outcome of [`blindness_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct BlindnessReport {
    pub protocol: String,
    pub thetas: Vec<f64>,
    /// Transcript paths compared across every angle.
    pub paths: usize,
    pub exhaustive: bool,
    pub max_tv: f64,
    /// Largest `|p_a / p_b - 1|` over compared paths and angle pairs. Small
    /// values bound the distance on the full distribution, not only on the
    /// examined paths.
    pub max_relative: f64,
    pub max_trace_distance: f64,
    pub epsilon: f64,
    pub pass: bool,
}

/// [`blindness_check_with`] using the default sampling budget.
pub fn blindness_check<P: Protocol + ?Sized>(protocol: &P, thetas: &[f64], epsilon: f64) -> Result<BlindnessReport> {
    blindness_check_with(protocol, thetas, epsilon, DEFAULT_PATHS_PER_ANGLE, SAMPLING_SEED)
}

/// Compares every pair of angles on a common set of transcript paths: all
/// of them for short protocols, otherwise the union of `paths_per_angle`
/// sampled runs per angle. For sampled protocols the distance is over the
/// examined paths only.
pub fn blindness_check_with<P: Protocol + ?Sized>(
    protocol: &P,
    thetas: &[f64],
    epsilon: f64,
    paths_per_angle: usize,
    seed: u64,
) -> Result<BlindnessReport> {
    if thetas.len() < 2 {
        return Err(Error::Input("need at least two angles".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Input(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let k = protocol.num_measured();
    let exhaustive = k <= EXHAUSTIVE_LIMIT;
    let paths: Vec<Vec<u8>> = if exhaustive {
        all_paths(k)
    } else {
        let mut set = BTreeSet::new();
        for (i, &theta) in thetas.iter().enumerate() {
            set.extend(sample_paths(protocol, theta, paths_per_angle, seed.wrapping_add(i as u64))?);
        }
        set.into_iter().collect()
    };

    let mut max_tv: f64 = 0.0;
    let mut max_td: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut dists = vec![OutcomeDistribution { exhaustive, ..Default::default() }; thetas.len()];
    for path in &paths {
        let evals = thetas
            .iter()
            .map(|&t| evaluate_path(protocol, t, path))
            .collect::<Result<Vec<_>>>()?;
        for (d, e) in dists.iter_mut().zip(&evals) {
            if let Some((p, _)) = e {
                d.probs.insert(bitstring(path), *p);
            }
        }
        for a in 0..evals.len() {
            for b in a + 1..evals.len() {
                match (&evals[a], &evals[b]) {
                    (Some((pa, _)), Some((pb, _))) => max_rel = max_rel.max((pa / pb - 1.0).abs()),
                    (None, None) => {}
                    _ => max_rel = f64::INFINITY,
                }
                if let (Some((_, ma)), Some((_, mb))) = (&evals[a], &evals[b]) {
                    for (x, y) in ma.iter().zip(mb) {
                        max_td = max_td.max(trace_distance(x, y)?);
                    }
                }
            }
        }
    }
    for a in 0..dists.len() {
        for b in a + 1..dists.len() {
            max_tv = max_tv.max(dists[a].tv_distance(&dists[b]));
        }
    }
    Ok(BlindnessReport {
        protocol: protocol.name(),
        thetas: thetas.to_vec(),
        paths: paths.len(),
        exhaustive,
        max_tv,
        max_relative: max_rel,
        max_trace_distance: max_td,
        epsilon,
        pass: max_tv <= epsilon && max_rel <= epsilon && max_td <= epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(theta: f64, first: FirstBasis, s: u8) -> PureState {
        let l = Label(2);
        let mut q = PureState::plus_theta_on(l, theta);
        let gates: &[Gate] = match (first, s) {
            (FirstBasis::X, 0) => &[Gate::H],
            (FirstBasis::X, _) => &[Gate::H, Gate::X],
            (FirstBasis::Y, 0) => &[Gate::S, Gate::H, Gate::X],
            (FirstBasis::Y, _) => &[Gate::S, Gate::H],
            (FirstBasis::Z, 0) => &[],
            (FirstBasis::Z, _) => &[Gate::Z],
        };
        for g in gates {
            q.apply(*g, &[l]).unwrap();
        }
        q
    }

    #[test]
    fn residuals_match_closed_forms() {
        for theta in protocol_angles() {
            for first in [FirstBasis::X, FirstBasis::Y, FirstBasis::Z] {
                for s in 0..2 {
                    let got = min_cluster_residual(theta, first, s).unwrap();
                    let f = got.fidelity(&closed_form(theta, first, s)).unwrap();
                    assert!((f - 1.0).abs() < 1e-12, "{theta} {first:?} {s}: {f}");
                }
            }
        }
    }

    #[test]
    fn first_outcome_is_unbiased() {
        for theta in protocol_angles() {
            for first in [FirstBasis::X, FirstBasis::Y, FirstBasis::Z] {
                let d = outcome_distribution(&MinCluster(first), theta).unwrap();
                assert!(d.exhaustive);
                assert!((d.probs["0"] - 0.5).abs() < 1e-12);
                assert!((d.probs["1"] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_plus_in_x_is_deterministic() {
        let mut s = PureState::plus_theta(0.0);
        let m = s.measure(Label(0), MeasBasis::X, &mut OutcomeSource::seeded(4)).unwrap();
        assert_eq!(m.bit, 0);
        assert!((m.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_angles_pass() {
        let r = blindness_check(&MinCluster(FirstBasis::X), &[0.3, 0.3], DEFAULT_EPSILON).unwrap();
        assert_eq!((r.max_tv, r.max_trace_distance), (0.0, 0.0));
        assert!(r.pass);
        assert!(blindness_check(&MinCluster(FirstBasis::X), &[0.3], DEFAULT_EPSILON).is_err());
        assert!(blindness_check(&MinCluster(FirstBasis::X), &[0.3, 0.4], -1.0).is_err());
    }

    #[test]
    fn min_cluster_is_blind() {
        for first in [FirstBasis::X, FirstBasis::Y, FirstBasis::Z] {
            let r = blindness_check(&MinCluster(first), &protocol_angles(), DEFAULT_EPSILON).unwrap();
            assert!(r.max_tv < 1e-10 && r.max_trace_distance < 1e-10, "{r:?}");
            assert!(r.pass);
        }
    }

    #[test]
    fn adaptive_pattern_breaks_contract() {
        use crate::mbqc::{pattern_for_gate, GateKind};
        let p = pattern_for_gate(GateKind::Rotation { xi: 0.3, eta: 0.2, zeta: 0.1 }).unwrap();
        assert!(matches!(blindness_check(&p, &[0.0, PI], DEFAULT_EPSILON), Err(Error::Contract(_))));
    }

    #[test]
    fn a_leaky_measurement_is_caught() {
        // Measuring the hidden qubit on its own would reveal it.
        struct Naked(bool);
        impl Protocol for Naked {
            fn name(&self) -> String {
                "naked".into()
            }
            fn num_measured(&self) -> usize {
                1
            }
            fn execute(&self, theta: f64, src: &mut OutcomeSource) -> Result<(Transcript, PureState)> {
                let first = if self.0 { theta } else { 0.0 };
                let mut s = PureState::plus_theta_on(Label(1), first).tensor(&PureState::plus_theta_on(Label(2), theta))?;
                let m = s.measure(Label(1), MeasBasis::X, src)?;
                let entry = TranscriptEntry {
                    node: Label(1),
                    basis: MeasBasis::X,
                    outcome: m.bit,
                    probability: m.probability,
                };
                Ok((Transcript { entries: vec![entry] }, s))
            }
            fn environment(&self) -> Vec<Vec<Label>> {
                vec![vec![Label(2)]]
            }
        }
        let r = blindness_check(&Naked(true), &[0.0, PI], DEFAULT_EPSILON).unwrap();
        assert!((r.max_tv - 1.0).abs() < 1e-12);
        assert!(!r.pass);
        // Measuring a blank qubit while the hidden one sits in the environment.
        let r = blindness_check(&Naked(false), &[0.0, PI], DEFAULT_EPSILON).unwrap();
        assert!(r.max_tv < 1e-12);
        assert!((r.max_trace_distance - 1.0).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn hadamard_pattern_is_blind() {
        let p = crate::mbqc::pattern_for_gate(crate::mbqc::GateKind::Hadamard).unwrap();
        let r = blindness_check(&p, &protocol_angles(), DEFAULT_EPSILON).unwrap();
        assert!(r.exhaustive && r.pass, "{r:?}");
        let d = outcome_distribution(&p, 1.0).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tv_is_a_metric() {
        let d = |v: &[(&str, f64)]| OutcomeDistribution {
            probs: v.iter().map(|(k, p)| (k.to_string(), *p)).collect(),
            exhaustive: true,
        };
        let a = d(&[("0", 0.5), ("1", 0.5)]);
        let b = d(&[("0", 0.9), ("1", 0.1)]);
        let c = d(&[("1", 0.3), ("2", 0.7)]);
        assert_eq!(a.tv_distance(&b), b.tv_distance(&a));
        assert!(a.tv_distance(&c) <= a.tv_distance(&b) + b.tv_distance(&c) + 1e-12);
        assert_eq!(a.tv_distance(&a), 0.0);
    }
}
