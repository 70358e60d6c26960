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


//! The [[7,1,3]] Steane code.
//!
//! Qubits of a block are numbered 1..=7 and carry labels `1..=7`; qubit 1 is
//! the leftmost character of a codeword string. The encoder takes its data
//! qubit on position 3.

use std::fmt;

use crate::error::{Error, Result};
use crate::mbqc::{
    apply_byproducts, pattern_for_gate, run_pattern_on, Allocation, ByproductFrame, GateKind, MeasurementPattern,
    Transcript,
};
use crate::statevector::{Gate, Label, MeasBasis, OutcomeSource, PureState};

pub const BLOCK: usize = 7;

/// Parity checks of the [7,4,3] Hamming code; row `r` reads bit `2 - r` of
/// the error position.
pub const PARITY_ROWS: [u8; 3] = [0b0001111, 0b0110011, 0b1010101];

/// Position of the data qubit in the encoder.
pub const DATA_POSITION: usize = 3;

/// Circuit encoder on positions 1..=7, data on position 3, ancillas in `|0>`.
pub const ENCODER: &[(Gate, &[usize])] = &[
    (Gate::CNOT, &[3, 5]),
    (Gate::CNOT, &[3, 6]),
    (Gate::H, &[1]),
    (Gate::H, &[2]),
    (Gate::H, &[4]),
    (Gate::CNOT, &[4, 5]),
    (Gate::CNOT, &[4, 6]),
    (Gate::CNOT, &[4, 7]),
    (Gate::CNOT, &[2, 3]),
    (Gate::CNOT, &[2, 6]),
    (Gate::CNOT, &[2, 7]),
    (Gate::CNOT, &[1, 3]),
    (Gate::CNOT, &[1, 5]),
    (Gate::CNOT, &[1, 7]),
];

fn data_labels(base: u32) -> [Label; BLOCK] {
    std::array::from_fn(|k| Label(base + k as u32 + 1))
}

/// Labels of a data block.
pub fn block_labels() -> [Label; BLOCK] {
    data_labels(0)
}

fn word_string(w: u8) -> String {
    format!("{w:07b}")
}

/// The eight codewords of `|0>_L`, as 7-bit words with position 1 as MSB.
pub fn even_codewords() -> [u8; 8] {
    std::array::from_fn(|k| {
        (0..3)
            .filter(|r| k >> (2 - r) & 1 == 1)
            .fold(0u8, |acc, r| acc ^ PARITY_ROWS[r])
    })
}

/// Syndrome of a 7-bit word: the position of a single flipped bit, or 0.
pub fn syndrome_of(word: u8) -> u8 {
    PARITY_ROWS
        .iter()
        .fold(0u8, |acc, row| (acc << 1) | ((word & row).count_ones() as u8 & 1))
}

fn superposition(labels: &[Label], words: impl Iterator<Item = u8>) -> Result<PureState> {
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << BLOCK];
    for w in words {
        amps[w as usize] = num_complex::Complex64::new(1.0, 0.0);
    }
    PureState::from_amplitudes(labels.to_vec(), amps)
}

/// `|0>_L` and `|1>_L` on labels 1..=7.
pub fn logical_basis() -> (PureState, PureState) {
    let labels = block_labels();
    let zero = superposition(&labels, even_codewords().into_iter()).expect("codeword table");
    let one = superposition(&labels, even_codewords().into_iter().map(|w| w ^ 0x7f)).expect("codeword table");
    (zero, one)
}

/// Seven data qubits of one logical block.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedBlock {
    pub state: PureState,
    pub id: usize,
}

impl EncodedBlock {
    /// Largest deviation of a stabilizer generator expectation from +1.
    pub fn code_space_violation(&self) -> Result<f64> {
        let labels = block_labels();
        let mut worst: f64 = 0.0;
        for row in PARITY_ROWS {
            for pauli in [Gate::X, Gate::Z] {
                let mut s = self.state.clone();
                for (k, &l) in labels.iter().enumerate() {
                    if row >> (BLOCK - 1 - k) & 1 == 1 {
                        s.apply(pauli, &[l])?;
                    }
                }
                let e = self.state.inner(&s)?;
                worst = worst.max((e - 1.0).norm());
            }
        }
        Ok(worst)
    }
}

fn encode_on(state: &mut PureState, labels: &[Label; BLOCK]) -> Result<()> {
    for (gate, pos) in ENCODER {
        let targets: Vec<Label> = pos.iter().map(|&p| labels[p - 1]).collect();
        state.apply(*gate, &targets)?;
    }
    Ok(())
}

fn data_with_ancillas(data: &PureState, labels: &[Label; BLOCK]) -> Result<PureState> {
    if data.num_qubits() != 1 {
        return Err(Error::Input(format!("data must be one qubit, got {}", data.num_qubits())));
    }
    let mut q = data.clone();
    q.relabel(q.labels()[0], labels[DATA_POSITION - 1])?;
    let before = PureState::basis_on(&labels[..DATA_POSITION - 1], "00")?;
    let after = PureState::basis_on(&labels[DATA_POSITION..], "0000")?;
    before.tensor(&q)?.tensor(&after)
}

fn encode_labels(data: &PureState, labels: &[Label; BLOCK]) -> Result<PureState> {
    let mut s = data_with_ancillas(data, labels)?;
    encode_on(&mut s, labels)?;
    Ok(s)
}

/// Circuit-model encoder: `a|0> + b|1>` to `a|0>_L + b|1>_L`.
pub fn encode_circuit(data: &PureState) -> Result<EncodedBlock> {
    Ok(EncodedBlock {
        state: encode_labels(data, &block_labels())?,
        id: 0,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn gate(self) -> Gate {
        match self {
            Pauli::X => Gate::X,
            Pauli::Y => Gate::Y,
            Pauli::Z => Gate::Z,
        }
    }
}

impl std::str::FromStr for Pauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Pauli::X),
            "Y" | "y" => Ok(Pauli::Y),
            "Z" | "z" => Ok(Pauli::Z),
            other => Err(Error::Input(format!("unknown Pauli {other:?}"))),
        }
    }
}

/// A single-qubit Pauli on position 1..=7.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliError {
    pub kind: Pauli,
    pub position: usize,
}

impl PauliError {
    pub fn new(kind: Pauli, position: usize) -> Result<Self> {
        if !(1..=BLOCK).contains(&position) {
            return Err(Error::Input(format!("position {position} outside 1..=7")));
        }
        Ok(Self { kind, position })
    }

    /// All 21 single-qubit errors.
    pub fn all() -> Vec<PauliError> {
        [Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .flat_map(|kind| (1..=BLOCK).map(move |position| PauliError { kind, position }))
            .collect()
    }
}

impl fmt::Display for PauliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}@{}", self.kind, self.position)
    }
}

/// Applies `e` to the block.
pub fn inject_error(mut b: EncodedBlock, e: PauliError) -> Result<EncodedBlock> {
    let e = PauliError::new(e.kind, e.position)?;
    b.state.apply(e.kind.gate(), &[block_labels()[e.position - 1]])?;
    Ok(b)
}

/// Outcome of one round of Steane extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeResult {
    /// Position of a bit flip, 0 if none.
    pub bit_syndrome: u8,
    /// Position of a phase flip, 0 if none.
    pub phase_syndrome: u8,
    /// Empty when both syndromes vanish. Two entries only arise from errors
    /// of weight two or more, which the code cannot correct.
    pub recovery: Vec<PauliError>,
}

impl SyndromeResult {
    pub fn from_syndromes(bit: u8, phase: u8) -> Self {
        let at = |kind, p: u8| PauliError {
            kind,
            position: p as usize,
        };
        let recovery = match (bit, phase) {
            (0, 0) => vec![],
            (b, p) if b == p => vec![at(Pauli::Y, b)],
            (b, 0) => vec![at(Pauli::X, b)],
            (0, p) => vec![at(Pauli::Z, p)],
            (b, p) => vec![at(Pauli::X, b), at(Pauli::Z, p)],
        };
        Self {
            bit_syndrome: bit,
            phase_syndrome: phase,
            recovery,
        }
    }

    /// Syndrome bits as `"bbb/ppp"`.
    pub fn bits(&self) -> String {
        format!("{:03b}/{:03b}", self.bit_syndrome, self.phase_syndrome)
    }
}

fn read_block(state: &mut PureState, labels: &[Label; BLOCK], basis: MeasBasis, src: &mut OutcomeSource) -> Result<u8> {
    let mut word = 0u8;
    for &l in labels {
        word = (word << 1) | state.measure(l, basis, src)?.bit;
    }
    Ok(word)
}

/// Steane extraction with fresh ancilla blocks: `|+>_L` as CNOT target for
/// bit flips, read in Z; `|0>_L` as CNOT control for phase flips, read in X.
/// Either ancilla is invariant under the logical CNOT, so the readout only
/// sees the error and a random codeword.
pub fn extract_syndrome(b: EncodedBlock, src: &mut OutcomeSource) -> Result<(SyndromeResult, EncodedBlock)> {
    let data = block_labels();
    let anc = data_labels(10);
    let EncodedBlock { state, id } = b;

    let mut s = state.tensor(&encode_labels(&PureState::plus_theta(0.0), &anc)?)?;
    for k in 0..BLOCK {
        s.apply(Gate::CNOT, &[data[k], anc[k]])?;
    }
    let bit = syndrome_of(read_block(&mut s, &anc, MeasBasis::Computational, src)?);

    let mut s = s.tensor(&encode_labels(&PureState::basis(1, "0")?, &anc)?)?;
    for k in 0..BLOCK {
        s.apply(Gate::CNOT, &[anc[k], data[k]])?;
    }
    let phase = syndrome_of(read_block(&mut s, &anc, MeasBasis::X, src)?);

    Ok((SyndromeResult::from_syndromes(bit, phase), EncodedBlock { state: s, id }))
}

/// Applies the recovery of `s`.
pub fn correct(mut b: EncodedBlock, s: &SyndromeResult) -> Result<EncodedBlock> {
    for e in &s.recovery {
        b = inject_error(b, *e)?;
    }
    Ok(b)
}

/// The encoder as it runs on the cluster. Every wire starts in `|+>`, which
/// is `H|0>` for positions 1, 2 and 4; positions 5 to 7 are turned into `|0>`
/// by a Hadamard pattern first.
pub fn mbqc_gate_list() -> Vec<(GateKind, usize)> {
    let mut gates: Vec<(GateKind, usize)> = (5..=BLOCK).map(|p| (GateKind::Hadamard, p)).collect();
    for (gate, pos) in ENCODER {
        if *gate == Gate::CNOT {
            gates.push((GateKind::Cnot { separation: pos[1] - pos[0] }, pos[0]));
        }
    }
    gates
}

/// Patterns of [`mbqc_gate_list`], each bound to its first position.
#[derive(Clone, Debug)]
pub struct MbqcEncoder {
    pub steps: Vec<(MeasurementPattern, usize)>,
}

/// Result of a cluster-state preparation.
#[derive(Clone, Debug)]
pub struct MbqcPreparation {
    pub block: EncodedBlock,
    pub transcript: Transcript,
    /// Byproducts left by each pattern, before they were undone.
    pub frames: Vec<ByproductFrame>,
    pub max_width: usize,
}

impl MbqcEncoder {
    pub fn new() -> Result<Self> {
        let steps = mbqc_gate_list()
            .into_iter()
            .map(|(kind, first)| Ok((pattern_for_gate(kind)?, first)))
            .collect::<Result<_>>()?;
        Ok(Self { steps })
    }

    /// Number of measured cluster qubits across all patterns.
    pub fn num_measured(&self) -> usize {
        self.steps.iter().map(|(p, _)| p.num_measured()).sum()
    }

    /// Starting product state: `|+_theta>` on the data position, `|+>` elsewhere.
    pub fn initial_state(theta: f64) -> Result<PureState> {
        let labels = block_labels();
        let mut s = PureState::plus_theta_on(labels[0], 0.0);
        for (k, &l) in labels.iter().enumerate().skip(1) {
            let angle = if k + 1 == DATA_POSITION { theta } else { 0.0 };
            s = s.tensor(&PureState::plus_theta_on(l, angle))?;
        }
        Ok(s)
    }

    /// Runs the patterns one after another under just-in-time allocation,
    /// undoing each pattern's byproducts before the next.
    pub fn run(&self, theta: f64, src: &mut OutcomeSource) -> Result<MbqcPreparation> {
        let labels = block_labels();
        let mut state = Self::initial_state(theta)?;
        let mut transcript = Transcript::default();
        let mut frames = Vec::with_capacity(self.steps.len());
        let mut max_width = 0;
        for (p, first) in &self.steps {
            let wires = &labels[first - 1..first - 1 + p.num_wires()];
            let mut run = run_pattern_on(p, state, wires, src, Allocation::JustInTime)?;
            frames.push(run.frame.clone());
            apply_byproducts(&mut run.state, &mut run.frame, wires)?;
            transcript.extend(run.transcript);
            max_width = max_width.max(run.max_width);
            state = run.state;
        }
        Ok(MbqcPreparation {
            block: EncodedBlock { state, id: 0 },
            transcript,
            frames,
            max_width,
        })
    }
}

/// Prepares `|+_theta>_L` by measuring cluster patterns.
pub fn prepare_encoded_mbqc(theta: f64, src: &mut OutcomeSource) -> Result<MbqcPreparation> {
    MbqcEncoder::new()?.run(theta, src)
}

/// Codeword strings of `|0>_L` in lexicographic order.
pub fn codeword_strings() -> Vec<String> {
    let mut v: Vec<String> = even_codewords().iter().map(|&w| word_string(w)).collect();
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fid(a: &PureState, b: &PureState) -> f64 {
        a.fidelity(b).unwrap()
    }

    #[test]
    fn codewords_match_closed_form() {
        assert_eq!(
            codeword_strings(),
            ["0000000", "0001111", "0110011", "0111100", "1010101", "1011010", "1100110", "1101001"]
        );
        let (zero, one) = logical_basis();
        let a = 0.5 / 2f64.sqrt();
        assert!((zero.amplitude("0000000").unwrap().re - a).abs() < 1e-12);
        assert!(zero.inner(&one).unwrap().norm() < 1e-15);
        let mut flipped = zero.clone();
        for l in block_labels() {
            flipped.apply(Gate::X, &[l]).unwrap();
        }
        assert!((fid(&flipped, &one) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn syndrome_reads_position() {
        for w in even_codewords() {
            assert_eq!(syndrome_of(w), 0);
            for p in 1..=7u8 {
                assert_eq!(syndrome_of(w ^ (1 << (7 - p))), p);
            }
        }
    }

    #[test]
    fn encoder_maps_basis_states() {
        let (zero, one) = logical_basis();
        let e0 = encode_circuit(&PureState::basis(1, "0").unwrap()).unwrap();
        let e1 = encode_circuit(&PureState::basis(1, "1").unwrap()).unwrap();
        assert!((fid(&e0.state, &zero) - 1.0).abs() < 1e-12);
        assert!((fid(&e1.state, &one) - 1.0).abs() < 1e-12);
        assert!(e0.code_space_violation().unwrap() < 1e-12);
        assert!(encode_circuit(&PureState::basis(2, "00").unwrap()).is_err());
    }

    #[test]
    fn encoder_is_linear() {
        let theta = PI / 4.0;
        let (zero, one) = logical_basis();
        let phase = num_complex::Complex64::from_polar(1.0, theta);
        let amps: Vec<_> = zero.amplitudes().iter().zip(one.amplitudes()).map(|(a, b)| a + phase * b).collect();
        let want = PureState::from_amplitudes(block_labels().to_vec(), amps).unwrap();
        let got = encode_circuit(&PureState::plus_theta(theta)).unwrap();
        assert!((fid(&got.state, &want) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn injected_errors() {
        let b = encode_circuit(&PureState::basis(1, "0").unwrap()).unwrap();
        let x1 = inject_error(b.clone(), PauliError::new(Pauli::X, 1).unwrap()).unwrap();
        for w in even_codewords() {
            let s = word_string(w ^ 0b1000000);
            assert!(x1.state.amplitude(&s).unwrap().norm() > 0.3);
        }
        let z4 = inject_error(b.clone(), PauliError::new(Pauli::Z, 4).unwrap()).unwrap();
        for w in even_codewords() {
            let sign = if w >> 3 & 1 == 1 { -1.0 } else { 1.0 };
            let got = z4.state.amplitude(&word_string(w)).unwrap();
            assert!((got.re - sign * b.state.amplitude(&word_string(w)).unwrap().re).abs() < 1e-12);
        }
        let y2 = inject_error(b.clone(), PauliError::new(Pauli::Y, 2).unwrap()).unwrap();
        let mut xz = b.clone();
        xz.state.apply(Gate::Z, &[Label(2)]).unwrap();
        xz.state.apply(Gate::X, &[Label(2)]).unwrap();
        assert!((fid(&y2.state, &xz.state) - 1.0).abs() < 1e-12);
        assert!(PauliError::new(Pauli::X, 8).is_err());
        assert!(PauliError::new(Pauli::X, 0).is_err());
    }

    #[test]
    fn clean_block_has_trivial_syndrome() {
        let b = encode_circuit(&PureState::plus_theta(0.3)).unwrap();
        let (s, after) = extract_syndrome(b.clone(), &mut OutcomeSource::seeded(1)).unwrap();
        assert_eq!((s.bit_syndrome, s.phase_syndrome), (0, 0));
        assert!(s.recovery.is_empty());
        assert!((fid(&after.state, &b.state) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_errors_are_diagnosed() {
        let b = encode_circuit(&PureState::basis(1, "0").unwrap()).unwrap();
        let (s, _) = extract_syndrome(inject_error(b.clone(), PauliError::new(Pauli::X, 3).unwrap()).unwrap(), &mut OutcomeSource::seeded(2)).unwrap();
        assert_eq!(s.bits(), "011/000");
        assert_eq!(s.recovery, vec![PauliError::new(Pauli::X, 3).unwrap()]);
        let (s, _) = extract_syndrome(inject_error(b, PauliError::new(Pauli::Y, 5).unwrap()).unwrap(), &mut OutcomeSource::seeded(3)).unwrap();
        assert_eq!(s.bits(), "101/101");
        assert_eq!(s.recovery, vec![PauliError::new(Pauli::Y, 5).unwrap()]);
    }

    #[test]
    fn mbqc_gate_list_covers_encoder() {
        let gates = mbqc_gate_list();
        assert_eq!(gates.len(), 3 + 11);
        let seps: Vec<usize> = gates
            .iter()
            .filter_map(|(k, _)| match k {
                GateKind::Cnot { separation } => Some(*separation),
                _ => None,
            })
            .collect();
        assert_eq!(seps, vec![2, 3, 1, 2, 3, 1, 4, 5, 2, 4, 6]);
    }

    #[test]
    fn mbqc_zero_branch_matches_circuit() {
        let enc = MbqcEncoder::new().unwrap();
        for theta in [0.0, PI / 2.0] {
            let prep = enc.run(theta, &mut OutcomeSource::zeros()).unwrap();
            let want = encode_circuit(&PureState::plus_theta(theta)).unwrap();
            assert!(fid(&prep.block.state, &want.state) >= 1.0 - 1e-9);
            assert_eq!(prep.transcript.entries.len(), enc.num_measured());
            assert!(prep.max_width <= crate::mbqc::JIT_WIDTH_CAP);
        }
    }
}
