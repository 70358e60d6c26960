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

//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! visible.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;

use blindprep::blindness::{blindness_check, min_cluster_residual, protocol_angles, FirstBasis};
use blindprep::mbqc::{pattern_for_gate, probe_states, verify_pattern, GateKind, PROBE_WIRE_LIMIT, ROTATION_SAMPLES};
use blindprep::resources::{efficiency, repetitions, sweep, to_csv, transmittance, ExperimentParams};
use blindprep::steane::{
    correct, encode_circuit, extract_syndrome, inject_error, MbqcEncoder, Pauli, PauliError,
};
use blindprep::{OutcomeSource, PureState};

/// The two codeword lists, copied by hand from the code's defining table.
const ZERO_L: [&str; 8] = [
    "0000000", "0001111", "0110011", "0111100", "1010101", "1011010", "1100110", "1101001",
];
const ONE_L: [&str; 8] = [
    "1111111", "1110000", "1001100", "1000011", "0101010", "0100101", "0011001", "0010110",
];

/// `ln[1-(1-e^2)^S] / ln[1-(1-e)^S]` at e = 0.01, S = 1000, evaluated with
/// mpmath at 50 digits.
const K_ORACLE: f64 = 54482.32993426837691671741;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn criterion(n: usize, name: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    let pass = v.pass && took < budget;
    println!(
        "criterion {n} {}: {name}: {} [{:.2} s, budget {} s]",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn logical_basis() -> Verdict {
    let target = 1.0 / (2.0 * 2f64.sqrt());
    let mut worst: f64 = 0.0;
    for (input, words) in [("0", ZERO_L), ("1", ONE_L)] {
        let block = encode_circuit(&PureState::basis(1, input).unwrap()).unwrap();
        for (idx, a) in block.state.amplitudes().iter().enumerate() {
            let bits = format!("{idx:07b}");
            let want = if words.contains(&bits.as_str()) { target } else { 0.0 };
            worst = worst.max((a - Complex64::new(want, 0.0)).norm());
        }
    }
    verdict(worst <= 1e-10, format!("max amplitude error {worst:.1e}"))
}

fn correction_matrix() -> Verdict {
    let inputs = [
        PureState::basis(1, "0").unwrap(),
        PureState::basis(1, "1").unwrap(),
        PureState::plus_theta(FRAC_PI_4),
    ];
    let mut src = OutcomeSource::seeded(2);
    let (mut cases, mut misdiagnosed, mut worst) = (0, 0, 1.0f64);
    for input in &inputs {
        let clean = encode_circuit(input).unwrap();
        for kind in [Pauli::X, Pauli::Y, Pauli::Z] {
            for pos in 1..=7u8 {
                let e = PauliError::new(kind, pos as usize).unwrap();
                let (s, block) = extract_syndrome(inject_error(clean.clone(), e).unwrap(), &mut src).unwrap();
                let want_bit = if kind == Pauli::Z { 0 } else { pos };
                let want_phase = if kind == Pauli::X { 0 } else { pos };
                if (s.bit_syndrome, s.phase_syndrome) != (want_bit, want_phase) {
                    misdiagnosed += 1;
                }
                let f = correct(block, &s).unwrap().state.fidelity(&clean.state).unwrap();
                worst = worst.min(f);
                cases += 1;
            }
        }
    }
    verdict(
        cases == 63 && misdiagnosed == 0 && worst >= 1.0 - 1e-9,
        format!("{cases} cases, {misdiagnosed} misdiagnosed, min fidelity {worst:.15}"),
    )
}

fn pattern_soundness() -> Verdict {
    let mut gates = vec![("H", GateKind::Hadamard)];
    for (xi, eta, zeta) in ROTATION_SAMPLES {
        gates.push(("R", GateKind::Rotation { xi, eta, zeta }));
    }
    for separation in 1..=3 {
        gates.push(("CNOT", GateKind::Cnot { separation }));
    }
    let mut worst = 1.0f64;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, kind) in gates {
        let p = pattern_for_gate(kind).unwrap();
        let n = kind.num_wires();
        let probes = if n <= PROBE_WIRE_LIMIT { probe_states() } else { Vec::new() };
        let r = verify_pattern(&p, &probes).unwrap();
        let f = r.worst_probe.map_or(r.worst_bound, |x| x.min(r.worst_bound));
        worst = worst.min(f);
        ok &= r.passes(1e-10) && r.skipped == 0;
        let label = match kind {
            GateKind::Cnot { separation } => format!("{name}{separation}"),
            _ => name.to_string(),
        };
        parts.push(format!("{label}:{}x{}", r.branches, r.probes.max(1)));
    }
    verdict(ok, format!("min fidelity {worst:.15}; branches x probes {}", parts.join(" ")))
}

fn protocol_end_to_end() -> Verdict {
    let encoder = MbqcEncoder::new().unwrap();
    let (mut runs, mut worst, mut width) = (0, 1.0f64, 0);
    for theta in protocol_angles() {
        let oracle = encode_circuit(&PureState::plus_theta(theta)).unwrap();
        let mut sources = vec![OutcomeSource::zeros()];
        sources.extend((0..50).map(|s| OutcomeSource::seeded(1000 + s)));
        for mut src in sources {
            let prep = encoder.run(theta, &mut src).unwrap();
            worst = worst.min(prep.block.state.fidelity(&oracle.state).unwrap());
            width = width.max(prep.max_width);
            runs += 1;
        }
    }
    verdict(
        runs == 8 * 51 && worst >= 1.0 - 1e-9,
        format!("{runs} runs over 8 angles, min fidelity {worst:.15}, peak width {width} qubits"),
    )
}

fn mat(m: [[Complex64; 2]; 2], v: [Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Right-hand sides of the two-qubit cluster equations, written out with
/// explicit 2x2 matrices.
fn closed_form(theta: f64, first: FirstBasis, k: u8) -> [Complex64; 2] {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let hm = [[h, h], [h, -h]];
    let x = [[z, o], [o, z]];
    let s = [[o, z], [z, i]];
    let zm = [[o, z], [z, -o]];
    let plus = [h, h * Complex64::from_polar(1.0, theta)];
    match (first, k) {
        (FirstBasis::X, 0) => mat(hm, plus),
        (FirstBasis::X, _) => mat(x, mat(hm, plus)),
        (FirstBasis::Y, 0) => mat(x, mat(hm, mat(s, plus))),
        (FirstBasis::Y, _) => mat(hm, mat(s, plus)),
        (FirstBasis::Z, 0) => plus,
        (FirstBasis::Z, _) => mat(zm, plus),
    }
}

fn blindness() -> Verdict {
    let mut worst = 1.0f64;
    for theta in protocol_angles() {
        for first in [FirstBasis::X, FirstBasis::Y, FirstBasis::Z] {
            for k in 0..2 {
                let got = min_cluster_residual(theta, first, k).unwrap();
                let a = got.amplitudes();
                let b = closed_form(theta, first, k);
                let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
                worst = worst.min(overlap.norm_sqr());
            }
        }
    }
    let r = blindness_check(&MbqcEncoder::new().unwrap(), &protocol_angles(), 1e-10).unwrap();
    verdict(
        worst >= 1.0 - 1e-12 && r.pass && r.max_tv <= 1e-10,
        format!(
            "residual min fidelity {worst:.15} (48 cases); encoder over {} shared paths: max TV {:.1e}, max path ratio deviation {:.1e}, max pair trace distance {:.1e}",
            r.paths, r.max_tv, r.max_relative, r.max_trace_distance
        ),
    )
}

fn resource_formulas() -> Verdict {
    let p = ExperimentParams::default();
    let t0 = transmittance(&p.at(0.0)).unwrap();
    let t50 = transmittance(&p.at(50.0)).unwrap();
    let k = repetitions(0.01, 1000.0).unwrap();
    let k_rel = (k / K_ORACLE - 1.0).abs();
    let mut worst_identity: f64 = 0.0;
    let mut points = 0;
    for e in [1e-4, 1e-3, 5e-3, 0.01, 0.02, 0.05] {
        for s in [1.0, 10.0, 100.0, 1000.0] {
            let k = repetitions(e, s).unwrap();
            // 1 - [1 - (1-e)^S]^k against (1-e^2)^S
            let b = (s * (-e).ln_1p()).exp();
            let lhs = -(k * (-b).ln_1p()).exp_m1();
            let rhs = (s * (-e * e).ln_1p()).exp();
            worst_identity = worst_identity.max((lhs / rhs - 1.0).abs());
            points += 1;
        }
    }
    let ok = (t0 - 0.045).abs() <= 1e-12 && (t50 - 0.0045).abs() <= 1e-12 && k_rel <= 1e-9 && worst_identity <= 1e-9;
    verdict(
        ok,
        format!(
            "T(0) = {t0}, T(50) = {t50}, k(0.01, 1000) = {k} (rel. error {k_rel:.1e}), identity worst rel. error {worst_identity:.1e} over {points} points"
        ),
    )
}

fn sweep_properties() -> Verdict {
    let p = ExperimentParams::default();
    let rows = sweep(&p, 0.0, 200.0, 5.0).unwrap();
    let valid: Vec<_> = rows.iter().filter(|r| r.is_valid()).collect();
    let increasing = valid.windows(2).all(|w| w[1].n_coded.unwrap() > w[0].n_coded.unwrap());
    let ordered = valid
        .iter()
        .all(|r| r.n_asym.unwrap() <= r.n_coded.unwrap() && r.n_coded.unwrap() < r.kn_d.unwrap());
    let mut worst_identity: f64 = 0.0;
    for r in &valid {
        for (e, n) in [(r.e_coded, r.n_coded), (r.e_noncoded_k, r.kn_d), (r.e_asym, r.n_asym)] {
            let (e, n) = (e.unwrap(), n.unwrap());
            assert_eq!(e, efficiency(p.s, p.f, n).unwrap());
            worst_identity = worst_identity.max((e * n / (p.s * p.f) - 1.0).abs());
        }
    }
    let csv = to_csv(&rows);
    let same_lib = csv == to_csv(&sweep(&p, 0.0, 200.0, 5.0).unwrap());
    let cli = || {
        Command::new(env!("CARGO_BIN_EXE_blindprep"))
            .args(["resources", "--lmin", "0", "--lmax", "200", "--step", "5"])
            .output()
            .unwrap()
    };
    let (a, b) = (cli(), cli());
    let same_cli = a.status.success() && a.stdout == b.stdout && a.stdout == csv.as_bytes();
    let ok = rows.len() == 41
        && valid.len() == rows.len()
        && increasing
        && ordered
        && worst_identity <= 4.0 * f64::EPSILON
        && same_lib
        && same_cli;
    verdict(
        ok,
        format!(
            "{} rows ({} valid), N_coded increasing: {increasing}, N_asym <= N_coded < kN_d: {ordered}, E*N/(S*f) worst deviation {worst_identity:.1e}, CSV identical: {}",
            rows.len(),
            valid.len(),
            same_lib && same_cli
        ),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "logical basis exactness", secs(1), logical_basis),
        criterion(2, "correction matrix", secs(30), correction_matrix),
        criterion(3, "pattern soundness", secs(300), pattern_soundness),
        criterion(4, "encoded preparation end to end", secs(300), protocol_end_to_end),
        criterion(5, "blindness", secs(300), blindness),
        criterion(6, "resource formulas", secs(1), resource_formulas),
        criterion(7, "sweep properties", secs(10), sweep_properties),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
