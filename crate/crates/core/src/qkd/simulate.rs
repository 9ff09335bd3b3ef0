//! Monte-Carlo runs of the entanglement-based protocol with a pluggable
//! model for Bob's device.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hashing::{toeplitz_hash, toeplitz_seed_len};
use super::syndrome::{SyndromeCode, MAX_CHUNK_LEN};
use super::QkdParams;
use crate::error::{Error, Result};
use crate::game::{bb84_game, digits, game_power, Strategy};
use crate::linalg::ComplexMatrix;
use crate::random::{stream_rng, TrialRng};

pub const HONEST_DEVICE_CAPACITY: u64 = 4096;
pub const QUANTUM_DEVICE_CAPACITY: u64 = 5;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DeviceModel {
    /// Bob's bits equal Alice's up to independent flips.
    Honest,
    /// Outcomes drawn from the joint distribution of Alice's BB84
    /// measurements and Bob's measurements in a strategy for the `n`-fold
    /// game. Flip noise is not applied on top.
    Quantum { strategy: Strategy },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolTranscript {
    pub seed: u64,
    pub trial: u64,
    pub theta: Vec<bool>,
    pub x: Vec<bool>,
    pub y: Vec<bool>,
    /// Sorted positions of the test sample.
    pub sample_set: Vec<usize>,
    pub x_t: Vec<bool>,
    pub y_t: Vec<bool>,
    pub sample_error: f64,
    pub total_error: f64,
    /// `d_rel(x, y) > d_rel(x_T, y_T) + ε`.
    pub hoeffding_violation: bool,
    pub aborted: bool,
    pub code_seed: u64,
    pub syndrome: Vec<bool>,
    pub hash_seed: Vec<bool>,
    /// Whether Bob's corrected string equals Alice's remaining bits.
    pub decoded: bool,
    pub k: Vec<bool>,
    pub k_hat: Vec<bool>,
}

/// Fraction of positions where the strings differ; zero for empty strings.
pub fn relative_distance(a: &[bool], b: &[bool]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).filter(|(p, q)| p != q).count() as f64 / a.len() as f64
}

/// Abort when the sampled bits disagree in more than a `γ` fraction.
pub fn abort_decision(x_t: &[bool], y_t: &[bool], gamma: f64) -> bool {
    relative_distance(x_t, y_t) > gamma
}

fn check_capacity(p: &QkdParams, device: &DeviceModel) -> Result<()> {
    let limit = match device {
        DeviceModel::Honest => HONEST_DEVICE_CAPACITY,
        DeviceModel::Quantum { .. } => QUANTUM_DEVICE_CAPACITY,
    };
    if p.n > limit {
        return Err(Error::Capacity {
            what: "simulated protocol rounds",
            requested: p.n as u128,
            limit: limit as u128,
        });
    }
    Ok(())
}

fn bits_of(index: usize, n: usize) -> Vec<bool> {
    digits(index, 2, n).into_iter().map(|d| d == 1).collect()
}

/// Joint outcome probabilities `p(x, y | θ)` for every basis string, row-major
/// in `(x, y)`.
fn quantum_tables(strategy: &Strategy, n: usize) -> Result<Vec<Vec<f64>>> {
    let game = game_power(&bb84_game(), n)?;
    strategy.validate(&game)?;
    let rest = ComplexMatrix::identity(strategy.dim_c());
    Ok((0..game.theta_count())
        .map(|t| {
            let k = game.outcome_count();
            let mut table = Vec::with_capacity(k * k);
            for x in 0..k {
                for y in 0..k {
                    let op = game.element(t, x).kron(&strategy.bob_povms[t][y]).kron(&rest);
                    table.push(op.trace_product(&strategy.rho_abc).re.max(0.0));
                }
            }
            table
        })
        .collect())
}

fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

struct Prepared {
    params: QkdParams,
    noise: f64,
    tables: Option<Vec<Vec<f64>>>,
}

fn prepare(p: &QkdParams, noise: f64, device: &DeviceModel) -> Result<Prepared> {
    p.validate()?;
    check_capacity(p, device)?;
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Domain(format!("flip probability {noise} outside [0, 1]")));
    }
    let tables = match device {
        DeviceModel::Honest => None,
        DeviceModel::Quantum { strategy } => Some(quantum_tables(strategy, p.n as usize)?),
    };
    Ok(Prepared {
        params: *p,
        noise,
        tables,
    })
}

fn run_trial(prep: &Prepared, seed: u64, trial: u64) -> Result<ProtocolTranscript> {
    let p = &prep.params;
    let n = p.n as usize;
    let t = p.t as usize;
    let mut rng: TrialRng = stream_rng(seed, trial);

    let (theta, x, y) = match &prep.tables {
        None => {
            let theta: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let y = x.iter().map(|&b| b ^ rng.random_bool(prep.noise)).collect();
            (theta, x, y)
        }
        Some(tables) => {
            let theta_index = rng.random_range(0..tables.len());
            let joint = sample_index(&tables[theta_index], &mut rng);
            let k = 1usize << n;
            (bits_of(theta_index, n), bits_of(joint / k, n), bits_of(joint % k, n))
        }
    };
    if y.len() != n {
        return Err(Error::Shape(format!(
            "device returned {} bits for {} rounds",
            y.len(),
            n
        )));
    }

    let mut sample_set = sample(&mut rng, n, t).into_vec();
    sample_set.sort_unstable();
    let x_t: Vec<bool> = sample_set.iter().map(|&i| x[i]).collect();
    let y_t: Vec<bool> = sample_set.iter().map(|&i| y[i]).collect();
    let sample_error = relative_distance(&x_t, &y_t);
    let total_error = relative_distance(&x, &y);
    let aborted = abort_decision(&x_t, &y_t, p.gamma);

    let code_seed: u64 = rng.random();
    let mut transcript = ProtocolTranscript {
        seed,
        trial,
        theta,
        x,
        y,
        sample_set,
        x_t,
        y_t,
        sample_error,
        total_error,
        hoeffding_violation: total_error > sample_error + p.epsilon,
        aborted,
        code_seed,
        syndrome: Vec::new(),
        hash_seed: Vec::new(),
        decoded: false,
        k: Vec::new(),
        k_hat: Vec::new(),
    };
    if aborted {
        return Ok(transcript);
    }

    let mut in_sample = vec![false; n];
    transcript.sample_set.iter().for_each(|&i| in_sample[i] = true);
    let rest: Vec<usize> = (0..n).filter(|&i| !in_sample[i]).collect();
    let x_rest: Vec<bool> = rest.iter().map(|&i| transcript.x[i]).collect();
    let y_rest: Vec<bool> = rest.iter().map(|&i| transcript.y[i]).collect();

    let code = SyndromeCode::new(rest.len(), p.s as usize, code_seed, MAX_CHUNK_LEN)?;
    let syndrome = code.encode(&x_rest)?;
    let x_hat = code.decode(&y_rest, &syndrome)?;

    let ell = p.ell as usize;
    let hash_seed: Vec<bool> = (0..toeplitz_seed_len(rest.len(), ell)).map(|_| rng.random()).collect();
    transcript.k = toeplitz_hash(&hash_seed, &x_rest, ell)?;
    transcript.k_hat = toeplitz_hash(&hash_seed, &x_hat, ell)?;
    transcript.decoded = x_hat == x_rest;
    transcript.syndrome = syndrome;
    transcript.hash_seed = hash_seed;
    Ok(transcript)
}

/// One protocol run on stream 0 of `seed`.
pub fn simulate_eqkd(
    p: &QkdParams,
    noise_flip_prob: f64,
    device: &DeviceModel,
    seed: u64,
) -> Result<ProtocolTranscript> {
    run_trial(&prepare(p, noise_flip_prob, device)?, seed, 0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub seed: u64,
    pub trials: u64,
    pub params: QkdParams,
    pub noise_flip_prob: f64,
    pub aborts: u64,
    pub abort_rate: f64,
    /// Non-aborted runs whose keys agree.
    pub key_matches: u64,
    /// Among non-aborted runs; `None` when every run aborted.
    pub key_match_rate: Option<f64>,
    /// Non-aborted runs where reconciliation recovered Alice's bits.
    pub decoded: u64,
    /// Decoded runs whose keys nevertheless differ; always zero.
    pub decoded_key_mismatches: u64,
    pub hoeffding_violations: u64,
    pub hoeffding_violation_rate: f64,
    /// `e^{−2ε²t}`.
    pub hoeffding_bound: f64,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    aborts: u64,
    matches: u64,
    decoded: u64,
    decoded_mismatches: u64,
    violations: u64,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            aborts: self.aborts + o.aborts,
            matches: self.matches + o.matches,
            decoded: self.decoded + o.decoded,
            decoded_mismatches: self.decoded_mismatches + o.decoded_mismatches,
            violations: self.violations + o.violations,
        }
    }
}

/// `trials` independent runs; trial `i` uses stream `i` of `seed`.
pub fn simulate_many(
    p: &QkdParams,
    noise_flip_prob: f64,
    device: &DeviceModel,
    seed: u64,
    trials: u64,
) -> Result<SimulationSummary> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let prep = prepare(p, noise_flip_prob, device)?;
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let tr = run_trial(&prep, seed, i)?;
            let matched = !tr.aborted && tr.k == tr.k_hat;
            Ok(Counts {
                aborts: tr.aborted as u64,
                matches: matched as u64,
                decoded: (!tr.aborted && tr.decoded) as u64,
                decoded_mismatches: (!tr.aborted && tr.decoded && !matched) as u64,
                violations: tr.hoeffding_violation as u64,
            })
        })
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
    let accepted = trials - counts.aborts;
    Ok(SimulationSummary {
        seed,
        trials,
        params: *p,
        noise_flip_prob,
        aborts: counts.aborts,
        abort_rate: counts.aborts as f64 / trials as f64,
        key_matches: counts.matches,
        key_match_rate: (accepted > 0).then(|| counts.matches as f64 / accepted as f64),
        decoded: counts.decoded,
        decoded_key_mismatches: counts.decoded_mismatches,
        hoeffding_violations: counts.violations,
        hoeffding_violation_rate: counts.violations as f64 / trials as f64,
        hoeffding_bound: (-2.0 * p.epsilon * p.epsilon * p.t as f64).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{constant_guess, Strategy};
    use crate::linalg::{DimensionList, C64};

    fn params(n: u64, t: u64, gamma: f64, epsilon: f64) -> QkdParams {
        QkdParams {
            n,
            t,
            s: (n - t) / 2,
            ell: 8,
            gamma,
            epsilon,
        }
    }

    #[test]
    fn noiseless_runs_never_abort_and_agree() {
        let s = simulate_many(&params(64, 16, 0.0, 0.05), 0.0, &DeviceModel::Honest, 1, 500).unwrap();
        assert_eq!(s.aborts, 0);
        assert_eq!(s.key_matches, 500);
        assert_eq!(s.decoded, 500);
    }

    #[test]
    fn random_bits_almost_always_abort() {
        let s = simulate_many(&params(64, 64 - 1, 0.01, 0.05), 0.5, &DeviceModel::Honest, 2, 10_000).unwrap();
        assert!(s.abort_rate >= 0.999);
    }

    #[test]
    fn decoded_runs_share_keys() {
        let s = simulate_many(&params(200, 40, 0.1, 0.05), 0.03, &DeviceModel::Honest, 3, 300).unwrap();
        assert!(s.decoded > 0);
        assert_eq!(s.decoded_key_mismatches, 0);
    }

    #[test]
    fn abort_depends_only_on_sample() {
        let p = params(64, 20, 0.05, 0.05);
        for trial in 0..50 {
            let tr = run_trial(&prepare(&p, 0.1, &DeviceModel::Honest).unwrap(), 4, trial).unwrap();
            assert_eq!(tr.sample_set.len(), 20);
            assert_eq!(tr.aborted, abort_decision(&tr.x_t, &tr.y_t, p.gamma));
            let x_t: Vec<bool> = tr.sample_set.iter().map(|&i| tr.x[i]).collect();
            assert_eq!(x_t, tr.x_t);
        }
    }

    #[test]
    fn reproducible_across_calls() {
        let p = params(64, 16, 0.1, 0.05);
        let a = simulate_eqkd(&p, 0.05, &DeviceModel::Honest, 77).unwrap();
        let b = simulate_eqkd(&p, 0.05, &DeviceModel::Honest, 77).unwrap();
        assert_eq!(a, b);
        let s1 = simulate_many(&p, 0.05, &DeviceModel::Honest, 77, 64).unwrap();
        let s2 = simulate_many(&p, 0.05, &DeviceModel::Honest, 77, 64).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn quantum_device_with_epr_pair_is_noiseless() {
        // n = 1: A and B share an EPR pair, Bob measures in Alice's basis
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let epr = [
            C64::new(r, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(r, 0.0),
        ];
        let bb84 = bb84_game();
        let strategy = Strategy::pure(
            &epr,
            DimensionList::new(vec![2, 2, 1]).unwrap(),
            // real projectors, so Bob's copy of Alice's measurement correlates perfectly
            bb84.povms.clone(),
            vec![constant_guess(1, 2, 0); 2],
        )
        .unwrap();
        let p = QkdParams {
            n: 5,
            t: 2,
            s: 0,
            ell: 1,
            gamma: 0.0,
            epsilon: 0.1,
        };
        let err = simulate_many(
            &p,
            0.0,
            &DeviceModel::Quantum {
                strategy: strategy.clone(),
            },
            5,
            10,
        );
        assert!(err.is_err(), "one-round strategy rejected for five rounds");
        let p1 = QkdParams { n: 2, t: 1, ..p };
        let s2 = strategy.tensor_power(2).unwrap();
        let s = simulate_many(&p1, 0.0, &DeviceModel::Quantum { strategy: s2 }, 5, 200).unwrap();
        assert_eq!(s.aborts, 0);
        assert_eq!(s.key_matches, 200);
    }

    #[test]
    fn capacity_guards() {
        let big = params(HONEST_DEVICE_CAPACITY + 1, 10, 0.0, 0.1);
        assert!(matches!(
            simulate_eqkd(&big, 0.0, &DeviceModel::Honest, 0),
            Err(Error::Capacity { .. })
        ));
        let strategy = crate::seesaw::bb84_optimal_unentangled_strategy();
        let six = params(6, 2, 0.0, 0.1);
        assert!(matches!(
            simulate_eqkd(&six, 0.0, &DeviceModel::Quantum { strategy }, 0),
            Err(Error::Capacity { .. })
        ));
    }
}
