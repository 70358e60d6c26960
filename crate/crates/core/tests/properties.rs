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

use num_complex::Complex64;
use proptest::prelude::*;

use blindprep::mbqc::{apply_byproducts, declared_output, pattern_for_gate, run_pattern, Allocation, GateKind};
use blindprep::resources::{repetitions, sweep, ExperimentParams};
use blindprep::steane::{block_labels, encode_circuit, even_codewords, syndrome_of};
use blindprep::{Gate, Label, MeasBasis, OutcomeSource, PureState};

fn state(raw: &[(f64, f64)]) -> PureState {
    let n = raw.len().trailing_zeros();
    let norm = raw.iter().map(|(r, i)| r * r + i * i).sum::<f64>().sqrt();
    let amps = raw.iter().map(|&(r, i)| Complex64::new(r, i) / norm).collect();
    PureState::from_amplitudes((0..n).map(Label).collect(), amps).unwrap()
}

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|(r, i)| r.abs() + i.abs() > 1e-3))
}

fn qubit() -> impl Strategy<Value = PureState> {
    amps(1).prop_map(|v| state(&v))
}

fn gate() -> impl Strategy<Value = (Gate, u32, u32)> {
    let kind = prop_oneof![
        Just(Gate::X),
        Just(Gate::Y),
        Just(Gate::Z),
        Just(Gate::H),
        Just(Gate::S),
        Just(Gate::CZ),
        Just(Gate::CNOT),
        (-7.0..7.0f64).prop_map(Gate::Rz),
    ];
    (kind, 0..4u32, 1..4u32).prop_map(|(g, a, d)| (g, a, (a + d) % 4))
}

fn close(a: &PureState, b: &PureState) -> f64 {
    1.0 - a.fidelity(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm(raw in amps(4), gates in prop::collection::vec(gate(), 1..20)) {
        let mut s = state(&raw);
        for (g, a, b) in gates {
            let targets: Vec<Label> = if g.arity() == 2 { vec![Label(a), Label(b)] } else { vec![Label(a)] };
            s.apply(g, &targets).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cz_is_symmetric(raw in amps(3), a in 0..3u32, d in 1..3u32) {
        let b = (a + d) % 3;
        let mut x = state(&raw);
        let mut y = x.clone();
        x.apply(Gate::CZ, &[Label(a), Label(b)]).unwrap();
        y.apply(Gate::CZ, &[Label(b), Label(a)]).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn measurement_keeps_norm(raw in amps(3), q in 0..3u32, delta in 0.0..6.28f64, seed: u64) {
        let mut s = state(&raw);
        let basis = if delta < 0.5 { MeasBasis::Computational } else { MeasBasis::rotated(delta) };
        let probs = s.branch_probabilities(Label(q), basis).unwrap();
        prop_assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
        let m = s.measure(Label(q), basis, &mut OutcomeSource::seeded(seed)).unwrap();
        prop_assert!((m.probability - probs[m.bit as usize]).abs() < 1e-12);
        prop_assert_eq!(s.num_qubits(), 2);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encoder_is_an_isometry(a in qubit(), b in qubit()) {
        let ea = encode_circuit(&a).unwrap().state;
        let eb = encode_circuit(&b).unwrap().state;
        let before = a.inner(&b).unwrap();
        let after = ea.inner(&eb).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn transversal_paulis_are_logical(a in qubit()) {
        for g in [Gate::X, Gate::Z] {
            let mut encoded = encode_circuit(&a).unwrap().state;
            for l in block_labels() {
                encoded.apply(g, &[l]).unwrap();
            }
            let mut logical = a.clone();
            logical.apply(g, &[Label(0)]).unwrap();
            let want = encode_circuit(&logical).unwrap().state;
            prop_assert!(close(&encoded, &want) < 1e-12);
        }
    }

    #[test]
    fn rotation_pattern_on_random_branches(
        xi in -3.2..3.2f64, eta in -3.2..3.2f64, zeta in -3.2..3.2f64, input in qubit(), seed: u64,
    ) {
        let p = pattern_for_gate(GateKind::Rotation { xi, eta, zeta }).unwrap();
        let mut run = run_pattern(&p, &[input.clone()], &mut OutcomeSource::seeded(seed), Allocation::JustInTime).unwrap();
        apply_byproducts(&mut run.state, &mut run.frame, &[Label(0)]).unwrap();
        let want = declared_output(&p, &[input]).unwrap();
        prop_assert!(close(&run.state, &want) < 1e-10);
    }

    #[test]
    fn cnot_pattern_on_random_branches(sep in 1..4usize, c in qubit(), t in qubit(), seed: u64) {
        let p = pattern_for_gate(GateKind::Cnot { separation: sep }).unwrap();
        let mut inputs = vec![c];
        inputs.extend(std::iter::repeat(PureState::plus_theta(0.3)).take(sep - 1));
        inputs.push(t);
        let wires: Vec<Label> = (0..=sep as u32).map(Label).collect();
        let mut run = run_pattern(&p, &inputs, &mut OutcomeSource::seeded(seed), Allocation::JustInTime).unwrap();
        apply_byproducts(&mut run.state, &mut run.frame, &wires).unwrap();
        let want = declared_output(&p, &inputs).unwrap();
        prop_assert!(close(&run.state, &want) < 1e-10);
    }

    #[test]
    fn single_flips_point_at_their_position(w in 0..8usize, pos in 1..=7u8) {
        let word = even_codewords()[w];
        prop_assert_eq!(syndrome_of(word), 0);
        prop_assert_eq!(syndrome_of(word ^ (1 << (7 - pos))), pos);
    }

    #[test]
    fn coded_beats_repetition_at_default_link(e in 0.005..0.05f64, s in 500.0..5000.0f64, l in 0.0..200.0f64) {
        let p = ExperimentParams { e, s, ..ExperimentParams::default() };
        let r = sweep(&p, l, l + 1.0, 1.0).unwrap().remove(0);
        prop_assert!(r.n_coded.unwrap() < r.kn_d.unwrap());
    }

    #[test]
    fn repetitions_restore_success_probability(e in 1e-4..0.05f64, s in 1.0..2000.0f64) {
        let k = repetitions(e, s).unwrap();
        prop_assert!(k >= 1.0 - 1e-12);
        let b = (s * (-e).ln_1p()).exp();
        let lhs = -(k * (-b).ln_1p()).exp_m1();
        let rhs = (s * (-e * e).ln_1p()).exp();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sweeps_keep_their_orderings(
        alpha in 0.15..0.3f64, mu in 0.3..0.8f64, v1_frac in 0.1..0.5f64, e in 0.001..0.05f64, s in 10.0..5000.0f64,
    ) {
        let p = ExperimentParams { alpha, mu, v1: mu * v1_frac, e, s, ..ExperimentParams::default() };
        let rows = sweep(&p, 0.0, 100.0, 10.0).unwrap();
        let mut last_t = f64::INFINITY;
        let mut last_n = 0.0;
        for r in rows.iter().filter(|r| r.is_valid()) {
            // N_coded < kN_d is not among these: with few, clean qubits k is
            // small and the ancilla overhead wins.
            let (n, asym) = (r.n_coded.unwrap(), r.n_asym.unwrap());
            prop_assert!(r.t < last_t);
            prop_assert!(n > last_n);
            prop_assert!(asym <= n);
            prop_assert!(r.n_d.unwrap() <= n);
            prop_assert!((r.e_coded.unwrap() * n / (p.s * p.f) - 1.0).abs() <= 4.0 * f64::EPSILON);
            last_t = r.t;
            last_n = n;
        }
    }
}
