//! One-round position verification with BB84 qubits: soundness bounds and a
//! one-dimensional timing simulator.
//!
//! Timeline: signals travel at unit speed. `V₀` sends the qubits and `V₁`
//! sends the basis string so that both reach the claimed position at time 0.
//! A verifier accepts a response that reaches it no later than a reply sent
//! from the claimed position at time 0 would.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bb84_parallel_value, beta0, imperfect_guessing_bound};
use crate::error::{Error, Result};
use crate::random::stream_rng;

pub const MAX_ROUND_QUBITS: usize = 64;
/// Slack on deadline comparisons.
const TIME_TOL: f64 = 1e-12;

/// `β₀^n`, the soundness against unentangled adversaries.
pub fn soundness_bound(n: u32) -> Result<f64> {
    bb84_parallel_value(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntangledSoundness {
    pub value: f64,
    pub vacuous: bool,
}

/// `d·β₀^n` for adversaries sharing a `d`-dimensional state.
pub fn entangled_soundness_bound(n: u32, d: u128) -> Result<EntangledSoundness> {
    if d == 0 {
        return Err(Error::Domain("entanglement dimension must be at least 1".into()));
    }
    let value = d as f64 * soundness_bound(n)?;
    Ok(EntangledSoundness {
        value,
        vacuous: value >= 1.0,
    })
}

/// `2^{⌈αn⌉}·β₀^n`, evaluated in the log domain so large `n` stays finite.
pub fn entangled_soundness_at_rate(n: u32, alpha: f64) -> Result<EntangledSoundness> {
    if n == 0 {
        return Err(Error::Domain("repetition count must be at least 1".into()));
    }
    if !(alpha >= 0.0) {
        return Err(Error::Domain(format!("rate {alpha} must be non-negative")));
    }
    let log2_d = (alpha * n as f64).ceil();
    let value = (log2_d - max_entanglement_rate() * n as f64).exp2();
    Ok(EntangledSoundness {
        value,
        vacuous: value >= 1.0,
    })
}

/// `log₂(1/β₀)`: entanglement rates below this leave the soundness
/// exponentially small.
pub fn max_entanglement_rate() -> f64 {
    (1.0 / beta0()).log2()
}

/// Soundness when responses within relative distance `γ` (to `V₀`) and
/// `γ′` (to `V₁`) of `x` are accepted.
pub fn noisy_soundness_bound(n: u32, gamma: f64, gamma_prime: f64) -> Result<f64> {
    imperfect_guessing_bound(0.5, 2, n, gamma, gamma_prime)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingScenario {
    pub v0: f64,
    pub v1: f64,
    pub pos: f64,
}

impl TimingScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.v0 < self.pos && self.pos < self.v1) {
            return Err(Error::Scenario(format!(
                "claimed position {} must lie strictly between {} and {}",
                self.pos, self.v0, self.v1
            )));
        }
        Ok(())
    }

    fn check_point(&self, what: &str, a: f64) -> Result<()> {
        if !(self.v0..=self.v1).contains(&a) {
            return Err(Error::Scenario(format!(
                "{what} at {a} outside the segment [{}, {}]",
                self.v0, self.v1
            )));
        }
        Ok(())
    }

    /// Time at which the qubits (from `V₀`) reach `a`.
    fn qubits_at(&self, a: f64) -> f64 {
        (a - self.v0) - (self.pos - self.v0)
    }

    /// Time at which the basis string (from `V₁`) reaches `a`.
    fn basis_at(&self, a: f64) -> f64 {
        (self.v1 - a) - (self.v1 - self.pos)
    }

    fn deadline0(&self) -> f64 {
        self.pos - self.v0
    }

    fn deadline1(&self) -> f64 {
        self.v1 - self.pos
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProverModel {
    /// At the claimed position; measures each qubit in its announced basis.
    Honest,
    /// `E₀` at `a0` measures every qubit in the Breidbart basis on arrival
    /// and forwards the outcomes to `E₁` at `a1`; both answer with them.
    BreidbartPair { a0: f64, a1: f64 },
    /// One party at `at` that waits for qubits and basis before measuring.
    Single { at: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PvRound {
    pub n: usize,
    pub x: Vec<bool>,
    pub theta: Vec<bool>,
    pub response0: Vec<bool>,
    pub response1: Vec<bool>,
    pub on_time0: bool,
    pub on_time1: bool,
    pub accepted: bool,
}

/// Probability that a Breidbart-basis measurement of `H^θ|x⟩` yields `x`.
pub fn breidbart_success_probability(theta: bool, x: bool) -> f64 {
    let (c, s) = (std::f64::consts::FRAC_PI_8.cos(), std::f64::consts::FRAC_PI_8.sin());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let state = match (theta, x) {
        (false, false) => [1.0, 0.0],
        (false, true) => [0.0, 1.0],
        (true, false) => [r, r],
        (true, true) => [r, -r],
    };
    let basis = if x { [-s, c] } else { [c, s] };
    let amp = basis[0] * state[0] + basis[1] * state[1];
    amp * amp
}

struct Timing {
    on_time0: bool,
    on_time1: bool,
}

fn timing(scenario: &TimingScenario, prover: &ProverModel) -> Result<Timing> {
    scenario.validate()?;
    let s = scenario;
    Ok(match *prover {
        ProverModel::Honest => {
            let ready = s.qubits_at(s.pos).max(s.basis_at(s.pos));
            Timing {
                on_time0: ready + (s.pos - s.v0) <= s.deadline0() + TIME_TOL,
                on_time1: ready + (s.v1 - s.pos) <= s.deadline1() + TIME_TOL,
            }
        }
        ProverModel::BreidbartPair { a0, a1 } => {
            s.check_point("first adversary", a0)?;
            s.check_point("second adversary", a1)?;
            let measured = s.qubits_at(a0);
            let at_e1 = measured + (a1 - a0).abs();
            Timing {
                on_time0: measured + (a0 - s.v0) <= s.deadline0() + TIME_TOL,
                on_time1: at_e1 + (s.v1 - a1) <= s.deadline1() + TIME_TOL,
            }
        }
        ProverModel::Single { at } => {
            s.check_point("adversary", at)?;
            let ready = s.qubits_at(at).max(s.basis_at(at));
            Timing {
                on_time0: ready + (at - s.v0) <= s.deadline0() + TIME_TOL,
                on_time1: ready + (s.v1 - at) <= s.deadline1() + TIME_TOL,
            }
        }
    })
}

fn play(n: usize, prover: &ProverModel, t: &Timing, rng: &mut impl Rng) -> PvRound {
    let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let theta: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let answer: Vec<bool> = match prover {
        ProverModel::Honest | ProverModel::Single { .. } => x.clone(),
        ProverModel::BreidbartPair { .. } => x
            .iter()
            .zip(&theta)
            .map(|(&xi, &ti)| {
                let correct = rng.random_bool(breidbart_success_probability(ti, xi));
                xi ^ !correct
            })
            .collect(),
    };
    let accepted = t.on_time0 && t.on_time1 && answer == x;
    PvRound {
        n,
        x,
        theta,
        response0: answer.clone(),
        response1: answer,
        on_time0: t.on_time0,
        on_time1: t.on_time1,
        accepted,
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ROUND_QUBITS {
        return Err(Error::Capacity {
            what: "position-verification qubits",
            requested: n as u128,
            limit: MAX_ROUND_QUBITS as u128,
        });
    }
    Ok(())
}

/// One round on stream 0 of `seed`.
pub fn simulate_pv_round(scenario: &TimingScenario, n: usize, prover: &ProverModel, seed: u64) -> Result<PvRound> {
    check_n(n)?;
    let t = timing(scenario, prover)?;
    Ok(play(n, prover, &t, &mut stream_rng(seed, 0)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PvSummary {
    pub seed: u64,
    pub trials: u64,
    pub n: usize,
    pub scenario: TimingScenario,
    pub prover: ProverModel,
    pub accepted: u64,
    pub acceptance_rate: f64,
    /// Binomial standard error of the rate.
    pub std_error: f64,
    pub soundness_bound: f64,
}

/// `trials` rounds; round `i` uses stream `i` of `seed`.
pub fn simulate_pv(
    scenario: &TimingScenario,
    n: usize,
    prover: &ProverModel,
    seed: u64,
    trials: u64,
) -> Result<PvSummary> {
    check_n(n)?;
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let t = timing(scenario, prover)?;
    let accepted: u64 = (0..trials)
        .into_par_iter()
        .map(|i| play(n, prover, &t, &mut stream_rng(seed, i)).accepted as u64)
        .sum();
    let rate = accepted as f64 / trials as f64;
    Ok(PvSummary {
        seed,
        trials,
        n,
        scenario: *scenario,
        prover: *prover,
        accepted,
        acceptance_rate: rate,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        soundness_bound: soundness_bound(n as u32)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::binary_entropy;

    fn line() -> TimingScenario {
        TimingScenario {
            v0: 0.0,
            v1: 10.0,
            pos: 4.0,
        }
    }

    #[test]
    fn bound_values() {
        assert!((soundness_bound(1).unwrap() - 0.8535533906).abs() < 1e-10);
        assert!((soundness_bound(20).unwrap() - 0.042132170870900106).abs() < 1e-14);
        for n in 1..40 {
            assert_eq!(soundness_bound(n).unwrap(), bb84_parallel_value(n).unwrap());
            assert_eq!(
                entangled_soundness_bound(n, 1).unwrap().value,
                soundness_bound(n).unwrap()
            );
            assert!(entangled_soundness_bound(n, 1u128 << n).unwrap().vacuous);
        }
        let r = entangled_soundness_bound(100, 1 << 20).unwrap();
        assert!((r.value - 0.13921).abs() < 1e-5);
        assert!(!r.vacuous);
    }

    #[test]
    fn entanglement_rate_threshold() {
        let rate = max_entanglement_rate();
        assert!(rate > 0.228 && rate < 0.229);
        let at_250 = entangled_soundness_at_rate(250, 0.2).unwrap().value;
        assert!((at_250 - 0.007230573475361848).abs() < 1e-15);
        let first_below = (1..1000).find(|&n| entangled_soundness_at_rate(n, 0.2).unwrap().value < 1e-3);
        assert_eq!(first_below, Some(355));
        let mut prev = f64::INFINITY;
        for n in (10..300).step_by(10) {
            let v = entangled_soundness_at_rate(n, 0.2).unwrap().value;
            assert!(v < prev);
            prev = v;
        }
        // at the threshold rate the bound stays flat up to the ceiling
        for n in [10u32, 50, 200] {
            let flat = (rate * n as f64).exp2() * soundness_bound(n).unwrap();
            assert!((flat - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noisy_bound_values() {
        for n in 1..10 {
            assert_eq!(noisy_soundness_bound(n, 0.0, 0.0).unwrap(), soundness_bound(n).unwrap());
        }
        let v = noisy_soundness_bound(50, 0.01, 0.01).unwrap();
        let expect = (2f64.powf(2.0 * binary_entropy(0.01).unwrap()) * beta0()).powi(50);
        assert!((v - expect).abs() < 1e-15 && v < 1.0 && v > 0.0);
        let g = crate::qkd::noise_threshold();
        for n in [1, 10, 100] {
            assert!((noisy_soundness_bound(n, g, g).unwrap() - 1.0).abs() < 1e-6);
        }
        assert!(noisy_soundness_bound(10, 0.02, 0.01).unwrap() >= noisy_soundness_bound(10, 0.01, 0.01).unwrap());
    }

    #[test]
    fn breidbart_probabilities() {
        let c2 = std::f64::consts::FRAC_PI_8.cos().powi(2);
        for theta in [false, true] {
            for x in [false, true] {
                assert!((breidbart_success_probability(theta, x) - c2).abs() < 1e-15);
            }
        }
        assert!((c2 - beta0()).abs() < 1e-15);
    }

    #[test]
    fn honest_prover_always_passes() {
        let s = simulate_pv(&line(), 16, &ProverModel::Honest, 1, 2000).unwrap();
        assert_eq!(s.accepted, 2000);
    }

    #[test]
    fn single_adversary_misses_a_deadline() {
        for at in [0.0, 1.0, 3.9, 4.1, 7.0, 10.0] {
            let r = simulate_pv_round(&line(), 4, &ProverModel::Single { at }, 2).unwrap();
            assert!(!(r.on_time0 && r.on_time1));
            assert!(!r.accepted);
        }
        let r = simulate_pv_round(&line(), 4, &ProverModel::Single { at: 4.0 }, 2).unwrap();
        assert!(r.accepted);
    }

    #[test]
    fn breidbart_pair_meets_deadlines() {
        let pair = ProverModel::BreidbartPair { a0: 2.0, a1: 7.0 };
        let t = timing(&line(), &pair).unwrap();
        assert!(t.on_time0 && t.on_time1);
        let s = simulate_pv(&line(), 1, &pair, 3, 20_000).unwrap();
        assert!((s.acceptance_rate - beta0()).abs() < 5.0 * s.std_error);
    }

    #[test]
    fn scenario_errors() {
        let bad = TimingScenario { pos: 11.0, ..line() };
        assert!(simulate_pv_round(&bad, 1, &ProverModel::Honest, 0).is_err());
        assert!(simulate_pv_round(&line(), 1, &ProverModel::Single { at: -1.0 }, 0).is_err());
        assert!(simulate_pv_round(&line(), 65, &ProverModel::Honest, 0).is_err());
    }
}
