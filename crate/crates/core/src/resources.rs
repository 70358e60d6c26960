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


//! Pulse budgets and preparation efficiency.
//!
//! Transmittance `T = t_s eta_s 10^(-alpha L / 10)`. The single-photon
//! fraction of signal pulses is bounded with the vacuum + weak decoy method;
//! other bounds can be plugged in through [`SinglePhotonBound`].

use crate::error::{Error, Result};

/// Channel, source and protocol scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentParams {
    /// Fibre loss, dB/km.
    pub alpha: f64,
    /// Distance, km.
    pub l_km: f64,
    pub t_s: f64,
    pub eta_s: f64,
    pub mu: f64,
    pub v1: f64,
    pub v2: f64,
    pub p_mu: f64,
    pub p_v1: f64,
    pub p_v2: f64,
    /// Computation scale.
    pub s: f64,
    pub epsilon: f64,
    /// Error probability per generated qubit.
    pub e: f64,
    /// Ancilla qubits per encoded qubit.
    pub c: f64,
    /// Pulse rate, Hz.
    pub f: f64,
    /// Background yield.
    pub y0: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            l_km: 0.0,
            t_s: 0.45,
            eta_s: 0.1,
            mu: 0.6,
            v1: 0.125,
            v2: 0.0,
            p_mu: 0.9,
            p_v1: 0.05,
            p_v2: 0.05,
            s: 1000.0,
            epsilon: 1e-10,
            e: 0.01,
            c: 1774.0,
            f: 1e6,
            y0: 0.0,
        }
    }
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Input(msg()))
    }
}

impl ExperimentParams {
    pub fn at(&self, l_km: f64) -> Self {
        Self { l_km, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha, self.l_km, self.t_s, self.eta_s, self.mu, self.v1, self.v2, self.p_mu, self.p_v1,
            self.p_v2, self.s, self.epsilon, self.e, self.c, self.f, self.y0,
        ];
        require(finite.iter().all(|x| x.is_finite()), || "parameters must be finite".into())?;
        require(self.alpha >= 0.0, || format!("alpha = {} is negative", self.alpha))?;
        require(self.l_km >= 0.0, || format!("L = {} is negative", self.l_km))?;
        require(self.t_s > 0.0 && self.eta_s > 0.0 && self.t_s * self.eta_s <= 1.0, || {
            format!("t_s * eta_s = {} outside (0, 1]", self.t_s * self.eta_s)
        })?;
        require(self.mu > 0.0 && self.mu <= 1.0, || format!("mu = {} outside (0, 1]", self.mu))?;
        require(self.v1 > 0.0 && self.v1 < self.mu, || format!("v1 = {} must lie in (0, mu)", self.v1))?;
        require(self.v2 >= 0.0 && self.v2 <= self.v1, || format!("v2 = {} must lie in [0, v1]", self.v2))?;
        let probs = [self.p_mu, self.p_v1, self.p_v2];
        require(probs.iter().all(|p| (0.0..=1.0).contains(p)), || "selection probabilities outside [0, 1]".into())?;
        require((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12, || {
            format!("p_mu + p_v1 + p_v2 = {}", probs.iter().sum::<f64>())
        })?;
        require(self.p_mu > 0.0, || "p_mu must be positive".into())?;
        require(self.s >= 1.0, || format!("S = {} below 1", self.s))?;
        require(self.epsilon > 0.0 && self.epsilon < 1.0, || format!("epsilon = {} outside (0, 1)", self.epsilon))?;
        require(self.e > 0.0 && self.e < 1.0, || format!("e = {} outside (0, 1)", self.e))?;
        require(self.c >= 0.0, || format!("C = {} is negative", self.c))?;
        require(self.f > 0.0, || format!("f = {} must be positive", self.f))?;
        require(self.y0 >= 0.0 && self.y0 < 1.0, || format!("Y0 = {} outside [0, 1)", self.y0))?;
        Ok(())
    }
}

/// Channel transmittance at `p.l_km`.
pub fn transmittance(p: &ExperimentParams) -> Result<f64> {
    require(p.t_s > 0.0 && p.eta_s > 0.0, || "t_s and eta_s must be positive".into())?;
    require(p.l_km >= 0.0, || format!("L = {} is negative", p.l_km))?;
    Ok(p.t_s * p.eta_s * 10f64.powf(-p.alpha * p.l_km / 10.0))
}

/// Gain of pulses with mean photon number `x`.
fn gain(p: &ExperimentParams, t: f64, x: f64) -> f64 {
    p.y0 - (-t * x).exp_m1()
}

/// Lower bound on the single-photon fraction of signal pulses.
pub trait SinglePhotonBound {
    fn name(&self) -> &'static str;

    /// The bound at transmittance `t`, clamped to `[0, 1)`.
    fn p1(&self, p: &ExperimentParams, t: f64) -> Result<f64>;
}

/// Vacuum + weak decoy bound with `v2 = 0`.
#[derive(Copy, Clone, Debug, Default)]
pub struct VacuumWeakDecoy;

impl SinglePhotonBound for VacuumWeakDecoy {
    fn name(&self) -> &'static str {
        "vacuum+weak"
    }

    fn p1(&self, p: &ExperimentParams, t: f64) -> Result<f64> {
        if p.v2 != 0.0 {
            return Err(Error::Input(format!("v2 = {} is not supported, only a vacuum decoy", p.v2)));
        }
        let (mu, v1) = (p.mu, p.v1);
        if v1 >= mu {
            return Err(Error::Input("v1 must be below mu".into()));
        }
        let (q_mu, q_v1) = (gain(p, t, mu), gain(p, t, v1));
        let y1 = mu / (mu * v1 - v1 * v1)
            * (q_v1 * v1.exp() - q_mu * mu.exp() * v1 * v1 / (mu * mu) - (mu * mu - v1 * v1) / (mu * mu) * p.y0);
        Ok(clamp_fraction(y1 * mu * (-mu).exp() / q_mu))
    }
}

/// Infinite-decoy value: the exact single-photon yield `Y1 = Y0 + T (1 - Y0)`
/// of the channel model behind the gains.
#[derive(Copy, Clone, Debug, Default)]
pub struct Asymptotic;

impl SinglePhotonBound for Asymptotic {
    fn name(&self) -> &'static str {
        "asymptotic"
    }

    fn p1(&self, p: &ExperimentParams, t: f64) -> Result<f64> {
        let y1 = p.y0 + t * (1.0 - p.y0);
        Ok(clamp_fraction(y1 * p.mu * (-p.mu).exp() / gain(p, t, p.mu)))
    }
}

fn clamp_fraction(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        0.0
    } else {
        x.min(1.0 - f64::EPSILON)
    }
}

/// [`VacuumWeakDecoy`] at `p.l_km`.
pub fn p1_lower_bound(p: &ExperimentParams) -> Result<f64> {
    VacuumWeakDecoy.p1(p, transmittance(p)?)
}

fn check_p1(p1: f64) -> Result<()> {
    if p1 > 0.0 && p1 < 1.0 {
        Ok(())
    } else {
        Err(Error::Estimation(format!("single-photon bound {p1} outside (0, 1)")))
    }
}

/// `(S/T) ln(eps/S) / (p_mu mu ln(1 - p1))`, unrounded.
fn data_term(p: &ExperimentParams, t: f64, p1: f64) -> Result<f64> {
    check_p1(p1)?;
    Ok(p.s / t * (p.epsilon / p.s).ln() / (p.p_mu * p.mu * (-p1).ln_1p()))
}

/// Lower bound on all pulses, data plus `C S / T` ancilla, rounded up.
pub fn pulses_coded(p: &ExperimentParams) -> Result<f64> {
    let t = transmittance(p)?;
    let p1 = p1_lower_bound(p)?;
    Ok((data_term(p, t, p1)? + p.c * p.s / t).ceil())
}

/// Data pulses alone, `N^d`.
pub fn pulses_noncoded(p: &ExperimentParams) -> Result<f64> {
    pulses_coded(&ExperimentParams { c: 0.0, ..p.clone() })
}

/// Data pulses with the infinite-decoy single-photon fraction and no ancillas.
pub fn pulses_asymptotic(p: &ExperimentParams) -> Result<f64> {
    let t = transmittance(p)?;
    let p1 = Asymptotic.p1(p, t)?;
    Ok(data_term(p, t, p1)?.ceil())
}

/// Repetitions of the uncoded preparation matching the coded success
/// probability: `ln[1 - (1-e^2)^S] / ln[1 - (1-e)^S]`.
pub fn repetitions(e: f64, s: f64) -> Result<f64> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::Input(format!("e = {e} outside (0, 1)")));
    }
    if !(s >= 1.0) {
        return Err(Error::Input(format!("S = {s} below 1")));
    }
    let k = (log_neg_log_fail(s * (-e * e).ln_1p()) - log_neg_log_fail(s * (-e).ln_1p())).exp();
    if !k.is_finite() {
        return Err(Error::Estimation(format!("repetitions overflow at e = {e}, S = {s}")));
    }
    Ok(k)
}

/// `ln(-ln(1 - b))` for `b = exp(y)`, `y <= 0`, without underflow when `b`
/// is tiny or cancellation when it is close to 1.
fn log_neg_log_fail(y: f64) -> f64 {
    if y < -40.0 {
        // -ln(1 - b) = b (1 + b/2 + ...)
        y + (y.exp() / 2.0).ln_1p()
    } else if y < -std::f64::consts::LN_2 {
        (-(-y.exp()).ln_1p()).ln()
    } else {
        (-(-y.exp_m1()).ln()).ln()
    }
}

/// Qubits per second, `S f / N`.
pub fn efficiency(s: f64, f: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Input(format!("pulse count {n} must be positive")));
    }
    Ok(s * f / n)
}

/// One distance of a sweep. `None` marks a failed estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceRow {
    pub l_km: f64,
    pub t: f64,
    pub p1_lower: Option<f64>,
    pub n_coded: Option<f64>,
    pub n_d: Option<f64>,
    /// Real-valued repetitions; `kN_d` uses its ceiling.
    pub k: f64,
    pub kn_d: Option<f64>,
    pub n_asym: Option<f64>,
    pub e_coded: Option<f64>,
    pub e_noncoded_k: Option<f64>,
    pub e_asym: Option<f64>,
}

impl ResourceRow {
    pub fn is_valid(&self) -> bool {
        self.n_coded.is_some() && self.n_d.is_some() && self.n_asym.is_some()
    }
}

/// Evaluates one row with an explicit single-photon bound.
pub fn row_with(p: &ExperimentParams, bound: &dyn SinglePhotonBound) -> Result<ResourceRow> {
    p.validate()?;
    let t = transmittance(p)?;
    let k = repetitions(p.e, p.s)?;
    let p1 = bound.p1(p, t)?;
    let ok = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Estimation(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let data = ok(data_term(p, t, p1))?;
    let n_d = data.map(f64::ceil);
    let n_coded = data.map(|d| (d + p.c * p.s / t).ceil());
    let kn_d = n_d.map(|n| k.ceil() * n);
    let n_asym = ok(Asymptotic.p1(p, t).and_then(|p1| data_term(p, t, p1)))?.map(f64::ceil);
    let eff = |n: Option<f64>| n.map(|n| p.s * p.f / n);
    Ok(ResourceRow {
        l_km: p.l_km,
        t,
        p1_lower: (p1 > 0.0).then_some(p1),
        n_coded,
        n_d,
        k,
        kn_d,
        n_asym,
        e_coded: eff(n_coded),
        e_noncoded_k: eff(kn_d),
        e_asym: eff(n_asym),
    })
}

/// Distances `l_min, l_min + step, ...` up to `l_max`.
pub fn grid(l_min: f64, l_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Input(format!("step must be positive, got {step}")));
    }
    if !(l_min >= 0.0 && l_min < l_max) || !l_max.is_finite() {
        return Err(Error::Input(format!("need 0 <= L_min < L_max, got {l_min}, {l_max}")));
    }
    let n = ((l_max - l_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| l_min + i as f64 * step).collect())
}

/// Sweep with the default bound. Rows are sorted by distance.
pub fn sweep(p: &ExperimentParams, l_min: f64, l_max: f64, step: f64) -> Result<Vec<ResourceRow>> {
    sweep_with(p, &VacuumWeakDecoy, l_min, l_max, step)
}

pub fn sweep_with(
    p: &ExperimentParams,
    bound: &dyn SinglePhotonBound,
    l_min: f64,
    l_max: f64,
    step: f64,
) -> Result<Vec<ResourceRow>> {
    grid(l_min, l_max, step)?
        .into_iter()
        .map(|l| row_with(&p.at(l), bound))
        .collect()
}

pub const CSV_HEADER: &str = "L_km,T,p1_lower,N_coded,N_d,k,kN_d,N_asym,E_coded,E_noncoded_k,E_asym";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:?}"))
}

/// Sweep rows as CSV, header included, `\n` line endings.
pub fn to_csv(rows: &[ResourceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            cell(Some(r.l_km)),
            cell(Some(r.t)),
            cell(r.p1_lower),
            cell(r.n_coded),
            cell(r.n_d),
            cell(Some(r.k)),
            cell(r.kn_d),
            cell(r.n_asym),
            cell(r.e_coded),
            cell(r.e_noncoded_k),
            cell(r.e_asym),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
