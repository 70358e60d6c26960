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

//! C ABI over the `blindprep` crate.
//!
//! Objects cross the boundary as opaque handles created by `bp_*_new` or
//! `bp_*` constructors and released with the matching `bp_*_free`. Every
//! fallible call returns a status: `BP_OK` or one of the `BP_ERR_*` codes.
//! The message of the last failure on the calling thread is available from
//! [`bp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use blindprep::blindness::{blindness_check_with, protocol_angles, FirstBasis, MinCluster};
use blindprep::cli::parse_config;
use blindprep::mbqc::{
    parse_pattern, pattern_for_gate, probe_states, verify_pattern_with, write_pattern, BranchMode, GateKind,
    MeasurementPattern, PROBE_WIRE_LIMIT,
};
use blindprep::resources::{repetitions, sweep, to_csv, transmittance, ExperimentParams};
use blindprep::steane::{correct, encode_circuit, extract_syndrome, inject_error, MbqcEncoder, Pauli, PauliError};
use blindprep::{Error, OutcomeSource, PureState};

pub const BP_OK: i32 = 0;
pub const BP_ERR_INPUT: i32 = 1;
pub const BP_ERR_UNKNOWN_LABEL: i32 = 2;
pub const BP_ERR_TOO_MANY_QUBITS: i32 = 3;
pub const BP_ERR_DEGENERATE_BRANCH: i32 = 4;
pub const BP_ERR_BRANCH_WORD: i32 = 5;
pub const BP_ERR_STRUCTURAL: i32 = 6;
pub const BP_ERR_SEQUENCING: i32 = 7;
pub const BP_ERR_CONTRACT: i32 = 8;
pub const BP_ERR_ESTIMATION: i32 = 9;
pub const BP_ERR_CONFIG: i32 = 10;
/// A required pointer argument was null.
pub const BP_ERR_NULL: i32 = 100;
/// A string argument was not valid UTF-8.
pub const BP_ERR_UTF8: i32 = 101;
/// The library panicked; the handle arguments should be treated as lost.
pub const BP_ERR_PANIC: i32 = 102;

pub const BP_BRANCHES_EXHAUSTIVE: i32 = 0;
pub const BP_BRANCHES_SAMPLE: i32 = 1;
pub const BP_BRANCHES_ZERO: i32 = 2;

pub const BP_PROTOCOL_MIN_CLUSTER_X: i32 = 0;
pub const BP_PROTOCOL_MIN_CLUSTER_Y: i32 = 1;
pub const BP_PROTOCOL_MIN_CLUSTER_Z: i32 = 2;
pub const BP_PROTOCOL_PREPARE: i32 = 3;

/// Opaque pure state.
pub struct BpState(PureState);

/// Opaque measurement pattern.
pub struct BpPattern(MeasurementPattern);

/// Opaque experiment parameters.
pub struct BpParams(ExperimentParams);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Lib(Error),
    Code(i32, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BP_OK,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            e.code()
        }
        Ok(Err(Fail::Code(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside blindprep".into());
            BP_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Code(BP_ERR_NULL, format!("{what} is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Code(BP_ERR_UTF8, format!("{what} is not UTF-8")))
}

fn c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail::Code(BP_ERR_INPUT, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default parameter set.
#[no_mangle]
pub extern "C" fn bp_params_new() -> *mut BpParams {
    Box::into_raw(Box::new(BpParams(ExperimentParams::default())))
}

/// Parses a `key = value` config text.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_params_from_config(config: *const c_char, out_params: *mut *mut BpParams) -> i32 {
    guard(|| {
        let slot = out(out_params, "out_params")?;
        let p = parse_config(text(config, "config")?)?;
        *slot = Box::into_raw(Box::new(BpParams(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_params_free(p: *mut BpParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Transmittance at distance `l_km`.
///
/// # Safety
/// `p` must be a live handle and `out_t` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_transmittance(p: *const BpParams, l_km: f64, out_t: *mut f64) -> i32 {
    guard(|| {
        let p = get(p, "params")?;
        let slot = out(out_t, "out_t")?;
        let at = p.0.at(l_km);
        at.validate()?;
        *slot = transmittance(&at)?;
        Ok(())
    })
}

/// Expected repetitions of an uncoded run of `s` qubits at error rate `e`.
///
/// # Safety
/// `out_k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_repetitions(e: f64, s: f64, out_k: *mut f64) -> i32 {
    guard(|| {
        *out(out_k, "out_k")? = repetitions(e, s)?;
        Ok(())
    })
}

/// Distance sweep as CSV text; release it with [`bp_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_sweep_csv(
    p: *const BpParams,
    l_min: f64,
    l_max: f64,
    step: f64,
    out_csv: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let p = get(p, "params")?;
        let slot = out(out_csv, "out_csv")?;
        *slot = c_string(to_csv(&sweep(&p.0, l_min, l_max, step)?))?;
        Ok(())
    })
}

unsafe fn new_pattern(kind: GateKind, out_pattern: *mut *mut BpPattern) -> i32 {
    guard(|| {
        let slot = out(out_pattern, "out_pattern")?;
        *slot = Box::into_raw(Box::new(BpPattern(pattern_for_gate(kind)?)));
        Ok(())
    })
}

/// # Safety
/// `out_pattern` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_hadamard(out_pattern: *mut *mut BpPattern) -> i32 {
    new_pattern(GateKind::Hadamard, out_pattern)
}

/// # Safety
/// `out_pattern` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_rotation(xi: f64, eta: f64, zeta: f64, out_pattern: *mut *mut BpPattern) -> i32 {
    new_pattern(GateKind::Rotation { xi, eta, zeta }, out_pattern)
}

/// CNOT from wire 0 onto wire `separation`.
///
/// # Safety
/// `out_pattern` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_cnot(separation: u32, out_pattern: *mut *mut BpPattern) -> i32 {
    new_pattern(GateKind::Cnot { separation: separation as usize }, out_pattern)
}

/// Parses the text pattern format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out_pattern` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_parse(src: *const c_char, out_pattern: *mut *mut BpPattern) -> i32 {
    guard(|| {
        let slot = out(out_pattern, "out_pattern")?;
        *slot = Box::into_raw(Box::new(BpPattern(parse_pattern(text(src, "src")?)?)));
        Ok(())
    })
}

/// Text form of a pattern; release it with [`bp_string_free`].
///
/// # Safety
/// `p` must be a live handle and `out_text` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_to_text(p: *const BpPattern, out_text: *mut *mut c_char) -> i32 {
    guard(|| {
        let p = get(p, "pattern")?;
        *out(out_text, "out_text")? = c_string(write_pattern(&p.0))?;
        Ok(())
    })
}

/// Measured node count, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_num_measured(p: *const BpPattern) -> usize {
    p.as_ref().map_or(0, |p| p.0.num_measured())
}

/// Smallest fidelity of the corrected pattern against its declared unitary
/// over the selected branches (`BP_BRANCHES_*`). `samples` and `seed` are
/// only read for sampled branches.
///
/// # Safety
/// `p` must be a live handle and `out_min_fidelity` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_verify(
    p: *const BpPattern,
    branches: i32,
    samples: usize,
    seed: u64,
    out_min_fidelity: *mut f64,
) -> i32 {
    guard(|| {
        let p = get(p, "pattern")?;
        let slot = out(out_min_fidelity, "out_min_fidelity")?;
        let mode = match branches {
            BP_BRANCHES_EXHAUSTIVE => BranchMode::Exhaustive,
            BP_BRANCHES_SAMPLE => BranchMode::Sampled { runs: samples, seed },
            BP_BRANCHES_ZERO => BranchMode::Zero,
            b => return Err(Fail::Code(BP_ERR_INPUT, format!("unknown branch mode {b}"))),
        };
        let probes = if p.0.num_wires() <= PROBE_WIRE_LIMIT { probe_states() } else { Vec::new() };
        let r = verify_pattern_with(&p.0, &probes, mode)?;
        *slot = r.worst_probe.map_or(r.worst_bound, |f| f.min(r.worst_bound));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_pattern_free(p: *mut BpPattern) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Circuit-model encoding of `|+_theta>`.
///
/// # Safety
/// `out_state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_encode_circuit(theta: f64, out_state: *mut *mut BpState) -> i32 {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        *slot = Box::into_raw(Box::new(BpState(encode_circuit(&PureState::plus_theta(theta))?.state)));
        Ok(())
    })
}

/// Encoded `|+_theta>` prepared by cluster measurements, on the all-zero
/// branch when `zero_branch` is set and on a `seed`-sampled branch otherwise.
///
/// # Safety
/// `out_state` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_prepare_encoded(
    theta: f64,
    seed: u64,
    zero_branch: bool,
    out_state: *mut *mut BpState,
) -> i32 {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let mut src = if zero_branch { OutcomeSource::zeros() } else { OutcomeSource::seeded(seed) };
        let prep = MbqcEncoder::new()?.run(theta, &mut src)?;
        *slot = Box::into_raw(Box::new(BpState(prep.block.state)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bp_state_num_qubits(s: *const BpState) -> usize {
    s.as_ref().map_or(0, |s| s.0.num_qubits())
}

/// Copies the `2^n` amplitudes into `re` and `im`, first qubit most
/// significant.
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bp_state_amplitudes(s: *const BpState, re: *mut f64, im: *mut f64, len: usize) -> i32 {
    guard(|| {
        let s = get(s, "state")?;
        if re.is_null() || im.is_null() {
            return Err(null("amplitude buffer"));
        }
        let amps = s.0.amplitudes();
        if len < amps.len() {
            return Err(Fail::Code(BP_ERR_INPUT, format!("buffer holds {len}, need {}", amps.len())));
        }
        for (k, a) in amps.iter().enumerate() {
            *re.add(k) = a.re;
            *im.add(k) = a.im;
        }
        Ok(())
    })
}

/// `|<a|b>|^2`.
///
/// # Safety
/// `a` and `b` must be live handles and `out_f` writable.
#[no_mangle]
pub unsafe extern "C" fn bp_state_fidelity(a: *const BpState, b: *const BpState, out_f: *mut f64) -> i32 {
    guard(|| {
        let (a, b) = (get(a, "a")?, get(b, "b")?);
        *out(out_f, "out_f")? = a.0.fidelity(&b.0)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bp_state_free(s: *mut BpState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Encodes `|+_theta>`, applies `pauli` (`'X'`, `'Y'` or `'Z'`) at block
/// position `pos`, extracts the syndrome and corrects. Reports both
/// syndromes and the fidelity with the clean block.
///
/// # Safety
/// The three output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_correct(
    pauli: c_char,
    pos: u32,
    theta: f64,
    seed: u64,
    out_bit_syndrome: *mut u8,
    out_phase_syndrome: *mut u8,
    out_fidelity: *mut f64,
) -> i32 {
    guard(|| {
        let kind = match pauli as u8 {
            b'X' => Pauli::X,
            b'Y' => Pauli::Y,
            b'Z' => Pauli::Z,
            c => return Err(Fail::Code(BP_ERR_INPUT, format!("unknown Pauli {:?}", c as char))),
        };
        let (bit, phase, fid) = (
            out(out_bit_syndrome, "out_bit_syndrome")?,
            out(out_phase_syndrome, "out_phase_syndrome")?,
            out(out_fidelity, "out_fidelity")?,
        );
        let clean = encode_circuit(&PureState::plus_theta(theta))?;
        let noisy = inject_error(clean.clone(), PauliError::new(kind, pos as usize)?)?;
        let (s, block) = extract_syndrome(noisy, &mut OutcomeSource::seeded(seed))?;
        *bit = s.bit_syndrome;
        *phase = s.phase_syndrome;
        *fid = correct(block, &s)?.state.fidelity(&clean.state)?;
        Ok(())
    })
}

/// Blindness check over the eight protocol angles (`BP_PROTOCOL_*`).
/// `paths` sampled runs per angle are used for protocols too long to
/// enumerate.
///
/// # Safety
/// The output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bp_blindness(
    protocol: i32,
    epsilon: f64,
    paths: usize,
    seed: u64,
    out_max_tv: *mut f64,
    out_max_trace_distance: *mut f64,
    out_pass: *mut bool,
) -> i32 {
    guard(|| {
        let (tv, td, pass) = (
            out(out_max_tv, "out_max_tv")?,
            out(out_max_trace_distance, "out_max_trace_distance")?,
            out(out_pass, "out_pass")?,
        );
        let thetas = protocol_angles();
        let r = match protocol {
            BP_PROTOCOL_MIN_CLUSTER_X => blindness_check_with(&MinCluster(FirstBasis::X), &thetas, epsilon, paths, seed)?,
            BP_PROTOCOL_MIN_CLUSTER_Y => blindness_check_with(&MinCluster(FirstBasis::Y), &thetas, epsilon, paths, seed)?,
            BP_PROTOCOL_MIN_CLUSTER_Z => blindness_check_with(&MinCluster(FirstBasis::Z), &thetas, epsilon, paths, seed)?,
            BP_PROTOCOL_PREPARE => blindness_check_with(&MbqcEncoder::new()?, &thetas, epsilon, paths, seed)?,
            p => return Err(Fail::Code(BP_ERR_INPUT, format!("unknown protocol {p}"))),
        };
        *tv = r.max_tv.max(r.max_relative);
        *td = r.max_trace_distance;
        *pass = r.pass;
        Ok(())
    })
}

