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

//! The `blindprep` command line.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 verification failure.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::blindness::{blindness_check_with, protocol_angles, FirstBasis, MinCluster, DEFAULT_EPSILON, DEFAULT_PATHS_PER_ANGLE};
use crate::error::{Error, Result};
use crate::mbqc::{
    pattern_for_gate, probe_states, verify_pattern_with, BranchMode, GateKind, PROBE_WIRE_LIMIT, ROTATION_SAMPLES,
};
use crate::resources::{sweep, to_csv, ExperimentParams};
use crate::statevector::{OutcomeSource, PureState};
use crate::steane::{correct, encode_circuit, extract_syndrome, inject_error, MbqcEncoder, Pauli, PauliError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

/// Fidelity threshold for gate patterns.
pub const GATE_TOLERANCE: f64 = 1e-10;
/// Fidelity threshold for encoded states.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Seed used when neither `--seed` nor `BLINDPREP_SEED` is given.
pub const DEFAULT_SEED: u64 = 0;
pub const SEED_ENV: &str = "BLINDPREP_SEED";

#[derive(Parser, Debug)]
#[command(name = "blindprep", version, about = "Blind preparation of Steane-encoded qubits on cluster states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check gate patterns against their declared unitaries.
    VerifyGates(VerifyArgs),
    /// Prepare an encoded |+_theta> by cluster measurements.
    Prepare(PrepareArgs),
    /// Encode, inject one Pauli error, extract the syndrome and correct.
    Correct(CorrectArgs),
    /// Compare the server's view across the eight hidden angles.
    Blindness(BlindnessArgs),
    /// Pulse counts and efficiencies over a distance sweep, as CSV.
    Resources(ResourcesArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PatternChoice {
    All,
    Hadamard,
    Rotation,
    Cnot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GateBranches {
    Exhaustive,
    Sample,
    Zero,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = PatternChoice::All)]
    pub pattern: PatternChoice,
    /// CNOT separation; separations 1 to 3 when omitted.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..=6))]
    pub sep: Option<u16>,
    #[arg(long, value_enum, default_value_t = GateBranches::Exhaustive)]
    pub branches: GateBranches,
    /// Branches per pattern with `--branches sample`.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrepareBranches {
    Sample,
    Zero,
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    /// Hidden angle k * pi / 4.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=7))]
    pub theta: u8,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = PrepareBranches::Sample)]
    pub branches: PrepareBranches,
}

#[derive(Args, Debug)]
pub struct CorrectArgs {
    #[arg(long, value_parser = parse_pauli)]
    pub pauli: Pauli,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7))]
    pub pos: u8,
    /// Logical input |+_theta> with theta = k * pi / 4.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=7))]
    pub theta: u8,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtocolChoice {
    MinCluster,
    Prepare,
}

#[derive(Args, Debug)]
pub struct BlindnessArgs {
    #[arg(long, value_enum, default_value_t = ProtocolChoice::MinCluster)]
    pub protocol: ProtocolChoice,
    #[arg(long, default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Sampled runs per angle for protocols too long to enumerate.
    #[arg(long, default_value_t = DEFAULT_PATHS_PER_ANGLE)]
    pub paths: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ResourcesArgs {
    /// `key = value` file; missing keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lmin: f64,
    #[arg(long, default_value_t = 200.0, allow_negative_numbers = true)]
    pub lmax: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub step: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pauli(s: &str) -> std::result::Result<Pauli, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses a config file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<ExperimentParams> {
    let mut p = ExperimentParams::default();
    let mut seen = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Config(format!("line {}: {msg}", n + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", value.trim())))?;
        let slot = match key {
            "alpha" => &mut p.alpha,
            "t_s" => &mut p.t_s,
            "eta_s" => &mut p.eta_s,
            "mu" => &mut p.mu,
            "v1" => &mut p.v1,
            "v2" => &mut p.v2,
            "p_mu" => &mut p.p_mu,
            "p_v1" => &mut p.p_v1,
            "p_v2" => &mut p.p_v2,
            "S" => &mut p.s,
            "epsilon" => &mut p.epsilon,
            "e" => &mut p.e,
            "C" => &mut p.c,
            "f" => &mut p.f,
            "Y0" => &mut p.y0,
            _ => return Err(bad(format!("unknown key `{key}`"))),
        };
        if seen.contains(&key) {
            return Err(bad(format!("duplicate key `{key}`")));
        }
        seen.push(key);
        *slot = value;
    }
    p.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(p)
}

/// `--seed`, then `BLINDPREP_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

fn seed(flag: Option<u64>) -> Result<u64> {
    resolve_seed(flag, std::env::var(SEED_ENV).ok().as_deref())
}

fn theta_of(k: u8) -> f64 {
    k as f64 * FRAC_PI_4
}

/// Runs one parsed command and returns its exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut report = String::new();
    let result = match &cli.command {
        Command::VerifyGates(a) => verify_gates(a, &mut report),
        Command::Prepare(a) => prepare(a, &mut report),
        Command::Correct(a) => correct_cmd(a, &mut report),
        Command::Blindness(a) => blindness(a, &mut report),
        Command::Resources(a) => resources(a, &mut report, err),
    };
    // Reports go out even when the command fails so the failing line is visible.
    let _ = out.write_all(report.as_bytes());
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Input(_) | Error::Config(_) => EXIT_USAGE,
                _ => EXIT_FAIL,
            }
        }
    }
}

fn gate_list(a: &VerifyArgs) -> Result<Vec<(String, GateKind)>> {
    if a.sep.is_some() && !matches!(a.pattern, PatternChoice::Cnot) {
        return Err(Error::Input("--sep only applies to --pattern cnot".into()));
    }
    let mut gates = Vec::new();
    if matches!(a.pattern, PatternChoice::All | PatternChoice::Hadamard) {
        gates.push(("hadamard".to_string(), GateKind::Hadamard));
    }
    if matches!(a.pattern, PatternChoice::All | PatternChoice::Rotation) {
        for (xi, eta, zeta) in ROTATION_SAMPLES {
            gates.push((format!("rotation({xi:.4},{eta:.4},{zeta:.4})"), GateKind::Rotation { xi, eta, zeta }));
        }
    }
    if matches!(a.pattern, PatternChoice::All | PatternChoice::Cnot) {
        let seps: Vec<usize> = match a.sep {
            Some(s) => vec![s as usize],
            None => vec![1, 2, 3],
        };
        for s in seps {
            gates.push((format!("cnot(sep={s})"), GateKind::Cnot { separation: s }));
        }
    }
    Ok(gates)
}

fn verify_gates(a: &VerifyArgs, out: &mut String) -> Result<bool> {
    let gates = gate_list(a)?;
    let mode = match a.branches {
        GateBranches::Exhaustive => BranchMode::Exhaustive,
        GateBranches::Sample => BranchMode::Sampled {
            runs: a.samples,
            seed: seed(a.seed)?,
        },
        GateBranches::Zero => BranchMode::Zero,
    };
    let mut all = true;
    for (name, kind) in gates {
        let p = pattern_for_gate(kind)?;
        let probes = if kind.num_wires() <= PROBE_WIRE_LIMIT { probe_states() } else { Vec::new() };
        let r = verify_pattern_with(&p, &probes, mode)?;
        let mut min = r.worst_bound;
        if let Some(f) = r.worst_probe {
            min = min.min(f);
        }
        // Sampled branches need not sum to one.
        let pass = min >= 1.0 - GATE_TOLERANCE
            && (mode != BranchMode::Exhaustive || (r.probability_sum - 1.0).abs() <= GATE_TOLERANCE);
        all &= pass;
        let _ = writeln!(
            out,
            "{name}: wires={} measured={} branches={} probes={} probability_sum={:.12} min_fidelity={:.15} {}",
            kind.num_wires(),
            p.num_measured(),
            r.branches,
            r.probes,
            r.probability_sum,
            min,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(all)
}

fn prepare(a: &PrepareArgs, out: &mut String) -> Result<bool> {
    let theta = theta_of(a.theta);
    let mut src = match a.branches {
        PrepareBranches::Sample => OutcomeSource::seeded(seed(a.seed)?),
        PrepareBranches::Zero => OutcomeSource::zeros(),
    };
    let encoder = MbqcEncoder::new()?;
    let prep = encoder.run(theta, &mut src)?;
    let oracle = encode_circuit(&PureState::plus_theta(theta))?;
    let f = prep.block.state.fidelity(&oracle.state)?;
    let pass = f >= 1.0 - STATE_TOLERANCE;
    let t = &prep.transcript;
    let ones = t.outcomes().iter().filter(|&&b| b == 1).count();
    let _ = writeln!(out, "theta: {}pi/4", a.theta);
    let _ = writeln!(out, "patterns: {}", encoder.steps.len());
    let _ = writeln!(out, "measurements: {} (ones: {ones})", t.outcomes().len());
    let _ = writeln!(out, "branch probability: {:e}", t.probability());
    let _ = writeln!(out, "max width: {}", prep.max_width);
    let _ = writeln!(out, "transcript: {}", t.bitstring());
    for (k, frame) in prep.frames.iter().enumerate() {
        if !frame.is_identity() {
            let _ = writeln!(out, "byproducts[{k}]: {frame}");
        }
    }
    let _ = writeln!(out, "fidelity: {f:.15} {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn correct_cmd(a: &CorrectArgs, out: &mut String) -> Result<bool> {
    let error = PauliError::new(a.pauli, a.pos as usize)?;
    let clean = encode_circuit(&PureState::plus_theta(theta_of(a.theta)))?;
    let noisy = inject_error(clean.clone(), error)?;
    let mut src = OutcomeSource::seeded(seed(a.seed)?);
    let (syndrome, block) = extract_syndrome(noisy, &mut src)?;
    let fixed = correct(block, &syndrome)?;
    let f = fixed.state.fidelity(&clean.state)?;
    let pass = f >= 1.0 - STATE_TOLERANCE;
    let recovery: Vec<String> = syndrome.recovery.iter().map(|e| e.to_string()).collect();
    let _ = writeln!(out, "error: {error}");
    let _ = writeln!(out, "bit syndrome: {:03b}", syndrome.bit_syndrome);
    let _ = writeln!(out, "phase syndrome: {:03b}", syndrome.phase_syndrome);
    let _ = writeln!(out, "recovery: {}", if recovery.is_empty() { "none".into() } else { recovery.join(" ") });
    let _ = writeln!(out, "fidelity: {f:.15} {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn blindness(a: &BlindnessArgs, out: &mut String) -> Result<bool> {
    if !(a.epsilon >= 0.0) {
        return Err(Error::Input(format!("--epsilon must be nonnegative, got {}", a.epsilon)));
    }
    let thetas = protocol_angles();
    let seed = seed(a.seed)?;
    let reports = match a.protocol {
        ProtocolChoice::MinCluster => [FirstBasis::X, FirstBasis::Y, FirstBasis::Z]
            .into_iter()
            .map(|b| blindness_check_with(&MinCluster(b), &thetas, a.epsilon, a.paths, seed))
            .collect::<Result<Vec<_>>>()?,
        ProtocolChoice::Prepare => vec![blindness_check_with(&MbqcEncoder::new()?, &thetas, a.epsilon, a.paths, seed)?],
    };
    let mut all = true;
    for r in &reports {
        all &= r.pass;
        let _ = writeln!(
            out,
            "{}: angles={} paths={} {} max_tv={:e} max_relative={:e} max_trace_distance={:e} epsilon={:e} {}",
            r.protocol,
            r.thetas.len(),
            r.paths,
            if r.exhaustive { "exhaustive" } else { "sampled" },
            r.max_tv,
            r.max_relative,
            r.max_trace_distance,
            r.epsilon,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(all)
}

fn resources(a: &ResourcesArgs, out: &mut String, err: &mut dyn Write) -> Result<bool> {
    let params = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => ExperimentParams::default(),
    };
    let rows = sweep(&params, a.lmin, a.lmax, a.step)?;
    for r in rows.iter().filter(|r| !r.is_valid()) {
        let _ = writeln!(err, "warning: estimate failed at L = {} km; row carries NA", r.l_km);
    }
    let csv = to_csv(&rows);
    match &a.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            let _ = writeln!(out, "wrote {} rows to {}", rows.len(), path.display());
        }
        None => out.push_str(&csv),
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_overrides_and_comments() {
        let p = parse_config("# link\nalpha = 0.25\n\n S=500 # scale\nY0 = 1e-6\n").unwrap();
        assert_eq!(p.alpha, 0.25);
        assert_eq!(p.s, 500.0);
        assert_eq!(p.y0, 1e-6);
        assert_eq!(p.mu, ExperimentParams::default().mu);
    }

    #[test]
    fn config_rejects_bad_lines() {
        for text in ["beta = 1", "alpha", "alpha = x", "alpha = 0.2\nalpha = 0.3", "mu = 2"] {
            assert!(matches!(parse_config(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn empty_config_is_table_defaults() {
        assert_eq!(parse_config("").unwrap(), ExperimentParams::default());
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(3), Some("9")).unwrap(), 3);
        assert_eq!(resolve_seed(None, Some(" 9 ")).unwrap(), 9);
        assert_eq!(resolve_seed(None, None).unwrap(), DEFAULT_SEED);
        assert!(resolve_seed(None, Some("-1")).is_err());
    }

    #[test]
    fn sep_needs_cnot() {
        let cli = Cli::try_parse_from(["blindprep", "verify-gates", "--pattern", "hadamard", "--sep", "2"]).unwrap();
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(&cli, &mut o, &mut e), EXIT_USAGE);
    }
}
