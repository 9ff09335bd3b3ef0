//! One-sided device-independent QKD: finite-key security, key-length
//! inversion, the tolerable noise level, and a small-scale protocol simulator.

mod hashing;
mod secdef;
mod simulate;
mod syndrome;

pub use hashing::{toeplitz_hash, toeplitz_seed_len};
pub use secdef::{cq_trace_distance, secdef_gap, SecdefGap};
pub use simulate::{
    abort_decision, relative_distance, simulate_eqkd, simulate_many, DeviceModel, ProtocolTranscript,
    SimulationSummary, HONEST_DEVICE_CAPACITY, QUANTUM_DEVICE_CAPACITY,
};
pub use syndrome::{syndrome_decode, syndrome_encode, SyndromeCode, MAX_CHUNK_LEN};

use serde::{Deserialize, Serialize};

use crate::bounds::{beta0, binary_entropy};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QkdParams {
    pub n: u64,
    pub t: u64,
    pub s: u64,
    pub ell: u64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl QkdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0 && self.t < self.n) {
            return Err(Error::Domain(format!(
                "need 0 < t < n, got t = {}, n = {}",
                self.t, self.n
            )));
        }
        if !(0.0..0.5).contains(&self.gamma) {
            return Err(Error::Domain(format!("gamma = {} outside [0, 1/2)", self.gamma)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if self.gamma + self.epsilon >= 0.5 {
            return Err(Error::Domain(format!(
                "gamma + epsilon = {} must stay below 1/2",
                self.gamma + self.epsilon
            )));
        }
        Ok(())
    }
}

/// Syndrome length preset `⌈(n − t)·h(γ + ε)⌉`.
pub fn auto_syndrome_length(n: u64, t: u64, gamma: f64, epsilon: f64) -> Result<u64> {
    if t >= n {
        return Err(Error::Domain(format!("need t < n, got t = {t}, n = {n}")));
    }
    Ok(((n - t) as f64 * binary_entropy(gamma + epsilon)?).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QkdSecurityReport {
    pub params: QkdParams,
    pub delta: f64,
    /// `5 e^{−2ε²t}`.
    pub sampling_term: f64,
    /// `2^{−budget/2}`.
    pub pa_term: f64,
    /// `log₂(1/β₀)n − h(γ+ε)n − ℓ − t − s + 2`.
    pub exponent_budget: f64,
    pub vacuous: bool,
}

fn sampling_term(t: u64, epsilon: f64) -> f64 {
    5.0 * (-2.0 * epsilon * epsilon * t as f64).exp()
}

/// Budget with `ℓ = 0`.
fn base_budget(n: u64, t: u64, s: u64, gamma: f64, epsilon: f64) -> Result<f64> {
    let n_f = n as f64;
    Ok((1.0 / beta0()).log2() * n_f - binary_entropy(gamma + epsilon)? * n_f - t as f64 - s as f64 + 2.0)
}

/// `2^{−budget/2}`.
pub fn privacy_amplification_term(exponent_budget: f64) -> f64 {
    2f64.powf(-0.5 * exponent_budget)
}

pub fn security_delta(p: &QkdParams) -> Result<QkdSecurityReport> {
    p.validate()?;
    let exponent_budget = base_budget(p.n, p.t, p.s, p.gamma, p.epsilon)? - p.ell as f64;
    let sampling_term = sampling_term(p.t, p.epsilon);
    let pa_term = privacy_amplification_term(exponent_budget);
    let delta = sampling_term + pa_term;
    Ok(QkdSecurityReport {
        params: *p,
        delta,
        sampling_term,
        pa_term,
        exponent_budget,
        vacuous: delta >= 1.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum KeyLength {
    /// Largest `ℓ ≥ 1` meeting the target, with its report.
    Key { ell: u64, report: QkdSecurityReport },
    /// Not even a one-bit key meets the target; `zero_length_ok` tells
    /// whether the empty key does.
    NoExtractableKey { zero_length_ok: bool },
    /// The sampling term alone reaches the target.
    Infeasible { sampling_term: f64 },
}

impl KeyLength {
    pub fn ell(&self) -> u64 {
        match self {
            KeyLength::Key { ell, .. } => *ell,
            _ => 0,
        }
    }
}

/// Largest `ℓ` with `security_delta ≤ delta_target`.
pub fn max_key_length(n: u64, t: u64, s: u64, gamma: f64, epsilon: f64, delta_target: f64) -> Result<KeyLength> {
    let params = |ell| QkdParams {
        n,
        t,
        s,
        ell,
        gamma,
        epsilon,
    };
    params(0).validate()?;
    if !(delta_target > 0.0) {
        return Err(Error::Domain(format!("target {delta_target} must be positive")));
    }
    let sampling = sampling_term(t, epsilon);
    if delta_target <= sampling {
        return Ok(KeyLength::Infeasible {
            sampling_term: sampling,
        });
    }
    let ok = |ell: u64| security_delta(&params(ell)).map(|r| r.delta <= delta_target);
    let estimate = base_budget(n, t, s, gamma, epsilon)? + 2.0 * (delta_target - sampling).log2();
    if estimate < 1.0 && !ok(1)? {
        return Ok(KeyLength::NoExtractableKey { zero_length_ok: ok(0)? });
    }
    // the closed form is exact up to rounding; settle the last bit on the formula itself
    let mut ell = estimate.max(0.0).floor() as u64;
    while ell > 0 && !ok(ell)? {
        ell -= 1;
    }
    while ok(ell + 1)? {
        ell += 1;
    }
    if ell == 0 {
        return Ok(KeyLength::NoExtractableKey { zero_length_ok: ok(0)? });
    }
    Ok(KeyLength::Key {
        ell,
        report: security_delta(&params(ell))?,
    })
}

/// `log₂(1/β₀)`, the key-rate budget per round.
pub fn rate_per_round() -> f64 {
    (1.0 / beta0()).log2()
}

/// The `γ* ∈ (0, ½)` with `2h(γ*) = log₂(1/β₀)`, by bisection to 1e-10.
pub fn noise_threshold() -> f64 {
    let target = rate_per_round();
    let f = |g: f64| 2.0 * binary_entropy(g).expect("in range") - target;
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticRate {
    pub n: u64,
    pub t: u64,
    pub s: u64,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta_target: f64,
    pub ell: u64,
    /// `ℓ/n`.
    pub rate: f64,
    /// `log₂(1/β₀) − 2h(γ+ε)`.
    pub limit: f64,
    pub gap: f64,
}

/// Key rate under the schedule `t = round(n^{2/3})`, `s = round(n·h(γ+ε))`.
pub fn asymptotic_rate(n: u64, gamma: f64, epsilon: f64, delta_target: f64) -> Result<AsymptoticRate> {
    let t = (n as f64).powf(2.0 / 3.0).round() as u64;
    let h = binary_entropy(gamma + epsilon)?;
    let s = (n as f64 * h).round() as u64;
    let ell = max_key_length(n, t, s, gamma, epsilon, delta_target)?.ell();
    let rate = ell as f64 / n as f64;
    let limit = rate_per_round() - 2.0 * h;
    Ok(AsymptoticRate {
        n,
        t,
        s,
        gamma,
        epsilon,
        delta_target,
        ell,
        rate,
        limit,
        gap: (limit - rate).abs(),
    })
}

/// Scans `ε` on a grid in `(0, ½ − γ)` and keeps the schedule whose rate is
/// closest to its own limit. Candidates with no extractable key are skipped.
pub fn tune_asymptotic_rate(n: u64, gamma: f64, delta_target: f64, grid: usize) -> Result<Option<AsymptoticRate>> {
    let hi = 0.5 - gamma;
    let mut best: Option<AsymptoticRate> = None;
    for i in 1..grid {
        let eps = hi * i as f64 / grid as f64;
        let r = asymptotic_rate(n, gamma, eps, delta_target)?;
        if r.ell == 0 {
            continue;
        }
        if best.as_ref().is_none_or(|b| r.gap < b.gap) {
            best = Some(r);
        }
    }
    Ok(best)
}
