//! Alternating maximization over the state, Bob's and Charlie's measurements.
//!
//! Each block update is exact (state, binary-outcome measurements) or a
//! feasible improvement (more outcomes), so every reported value is the
//! winning probability of an explicit valid strategy and hence a lower bound
//! on the game value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrimination::{best_measurement, measurement_value};
use crate::error::{Error, Result};
use crate::game::{self, constant_guess, MonogamyGame, Strategy};
use crate::linalg::{self, partial_trace, ComplexMatrix, DimensionList, C64};
use crate::random::{random_projective_measurement, stream_rng};

/// Largest joint dimension `d_A·d_B·d_C` handled by the state step.
pub const STATE_CAPACITY: usize = 512;
/// Slack allowed when checking that the trajectory never decreases.
/// Restart values this close to the best are treated as equal.
pub const RESTART_TIE_TOL: f64 = 1e-12;
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Bob,
    Charlie,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeesawInit {
    /// Seeded random projective measurements for both parties.
    RandomProjective,
    /// Start from the measurements of a given strategy (its state is ignored).
    FromStrategy { strategy: Strategy },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub bob_dim: usize,
    pub charlie_dim: usize,
    pub restarts: usize,
    pub init: SeesawInit,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-12,
            seed: 0,
            bob_dim: 1,
            charlie_dim: 1,
            restarts: 20,
            init: SeesawInit::RandomProjective,
        }
    }
}

impl SeesawConfig {
    fn validate(&self, game: &MonogamyGame) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance {} must be positive", self.tol)));
        }
        if self.bob_dim == 0 || self.charlie_dim == 0 {
            return Err(Error::Domain("party dimensions must be at least 1".into()));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Domain("need at least one restart and one iteration".into()));
        }
        let total = game
            .dim_a
            .checked_mul(self.bob_dim)
            .and_then(|d| d.checked_mul(self.charlie_dim))
            .unwrap_or(usize::MAX);
        if total > STATE_CAPACITY {
            return Err(Error::Capacity {
                what: "seesaw joint dimension",
                requested: total as u128,
                limit: STATE_CAPACITY as u128,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeesawResult {
    pub strategy: Strategy,
    pub value: f64,
    pub iterations: usize,
    /// Value after each full state/Bob/Charlie cycle.
    pub trajectory: Vec<f64>,
    /// Index of the restart that produced the result.
    pub restart: usize,
    /// Best value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

fn dims_of(game: &MonogamyGame, bob: &[Vec<ComplexMatrix>], charlie: &[Vec<ComplexMatrix>]) -> Result<DimensionList> {
    let db = bob.first().and_then(|p| p.first()).map(ComplexMatrix::dim);
    let dc = charlie.first().and_then(|p| p.first()).map(ComplexMatrix::dim);
    match (db, dc) {
        (Some(db), Some(dc)) => DimensionList::new(vec![game.dim_a, db, dc]),
        _ => Err(Error::Shape("empty guess measurements".into())),
    }
}

fn check_families(game: &MonogamyGame, family: &[Vec<ComplexMatrix>], who: &str) -> Result<()> {
    if family.len() != game.theta_count() || family.iter().any(|p| p.len() != game.outcome_count()) {
        return Err(Error::Shape(format!(
            "{who} needs {} measurements with {} outcomes",
            game.theta_count(),
            game.outcome_count()
        )));
    }
    let dim = family[0][0].dim();
    for (t, povm) in family.iter().enumerate() {
        game::check_povm(povm, dim, &format!("{who} basis {t}"))?;
    }
    Ok(())
}

/// With both measurements fixed, the best state is the top eigenvector of
/// `(1/|Θ|) Σ_θ Π^θ`; returns it as a rank-one density and the eigenvalue.
/// Ties pick the first eigenvector of the descending sort.
pub fn optimal_state_step(
    game: &MonogamyGame,
    bob_povms: &[Vec<ComplexMatrix>],
    charlie_povms: &[Vec<ComplexMatrix>],
) -> Result<(ComplexMatrix, f64)> {
    check_families(game, bob_povms, "Bob")?;
    check_families(game, charlie_povms, "Charlie")?;
    let dims = dims_of(game, bob_povms, charlie_povms)?;
    if dims.total() > STATE_CAPACITY {
        return Err(Error::Capacity {
            what: "seesaw joint dimension",
            requested: dims.total() as u128,
            limit: STATE_CAPACITY as u128,
        });
    }
    let op = average_operator(game, bob_povms, charlie_povms);
    let eig = op.eigen_hermitian()?;
    Ok((ComplexMatrix::projector(&eig.vectors[0]), eig.max()))
}

fn average_operator(game: &MonogamyGame, bob: &[Vec<ComplexMatrix>], charlie: &[Vec<ComplexMatrix>]) -> ComplexMatrix {
    let ops: Vec<ComplexMatrix> = (0..game.theta_count())
        .into_par_iter()
        .map(|t| game::guess_operator(&game.povms[t], &bob[t], &charlie[t], |x| vec![(x, x)]))
        .collect();
    linalg::sum(&ops)
        .expect("non-empty")
        .scale(1.0 / game.theta_count() as f64)
        .hermitian_part()
}

/// Operators `σ_x^θ` on the optimized party: with the other party fixed, the
/// objective is `(1/|Θ|) Σ_θ Σ_x tr(σ_x^θ N_x^θ)`.
pub fn conditional_operators(
    game: &MonogamyGame,
    rho: &ComplexMatrix,
    dims: &DimensionList,
    fixed_povms: &[Vec<ComplexMatrix>],
    party: Party,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    let [_, db, dc] = <[usize; 3]>::try_from(dims.factors()).map_err(|_| Error::Shape("need three factors".into()))?;
    (0..game.theta_count())
        .into_par_iter()
        .map(|t| {
            (0..game.outcome_count())
                .map(|x| {
                    let f = game.element(t, x);
                    let (m, keep) = match party {
                        Party::Bob => (f.kron(&ComplexMatrix::identity(db)).kron(&fixed_povms[t][x]), 1),
                        Party::Charlie => (f.kron(&fixed_povms[t][x]).kron(&ComplexMatrix::identity(dc)), 2),
                    };
                    partial_trace(&(&m * rho), dims, &[keep]).map(|s| s.hermitian_part())
                })
                .collect()
        })
        .collect()
}

/// Optimizes one party's measurements with the state and the other party
/// fixed. Exact for two outcomes; otherwise a feasible improvement that never
/// falls below `warm` when given. Returns the measurements and the resulting
/// winning probability.
pub fn optimal_povm_step(
    game: &MonogamyGame,
    rho: &ComplexMatrix,
    dims: &DimensionList,
    fixed_party_povms: &[Vec<ComplexMatrix>],
    party: Party,
    warm: Option<&[Vec<ComplexMatrix>]>,
) -> Result<(Vec<Vec<ComplexMatrix>>, f64)> {
    rho.check_density()?;
    if rho.dim() != dims.total() || dims.len() != 3 || dims.factors()[0] != game.dim_a {
        return Err(Error::Shape(format!(
            "state of dimension {} does not match factors {:?}",
            rho.dim(),
            dims.factors()
        )));
    }
    check_families(game, fixed_party_povms, "fixed party")?;
    let sigmas = conditional_operators(game, rho, dims, fixed_party_povms, party)?;
    let results: Vec<(Vec<ComplexMatrix>, f64)> = sigmas
        .par_iter()
        .enumerate()
        .map(|(t, s)| best_measurement(s, warm.map(|w| w[t].as_slice())))
        .collect();
    let value = results.iter().map(|(_, v)| v).sum::<f64>() / game.theta_count() as f64;
    Ok((results.into_iter().map(|(p, _)| p).collect(), value))
}

fn random_family(game: &MonogamyGame, dim: usize, rng: &mut impl rand::Rng) -> Vec<Vec<ComplexMatrix>> {
    (0..game.theta_count())
        .map(|_| random_projective_measurement(dim, game.outcome_count(), rng))
        .collect()
}

struct Run {
    strategy: Strategy,
    value: f64,
    iterations: usize,
    trajectory: Vec<f64>,
}

fn single_run(game: &MonogamyGame, cfg: &SeesawConfig, restart: usize) -> Result<Run> {
    let (mut bob, mut charlie) = match &cfg.init {
        SeesawInit::RandomProjective => {
            let mut rng = stream_rng(cfg.seed, restart as u64);
            let bob = random_family(game, cfg.bob_dim, &mut rng);
            let charlie = random_family(game, cfg.charlie_dim, &mut rng);
            (bob, charlie)
        }
        SeesawInit::FromStrategy { strategy } => {
            strategy.check_shape(game)?;
            (strategy.bob_povms.clone(), strategy.charlie_povms.clone())
        }
    };
    let dims = dims_of(game, &bob, &charlie)?;
    let mut trajectory = Vec::new();
    let mut rho = ComplexMatrix::identity(dims.total()).scale(1.0 / dims.total() as f64);
    let mut value = f64::NEG_INFINITY;
    for _ in 0..cfg.max_iters {
        let (state, _) = optimal_state_step(game, &bob, &charlie)?;
        rho = state;
        let (new_bob, _) = optimal_povm_step(game, &rho, &dims, &charlie, Party::Bob, Some(&bob))?;
        bob = new_bob;
        let (new_charlie, v) = optimal_povm_step(game, &rho, &dims, &bob, Party::Charlie, Some(&charlie))?;
        charlie = new_charlie;
        let improvement = v - value;
        value = v;
        trajectory.push(v);
        if improvement < cfg.tol {
            break;
        }
    }
    let strategy = Strategy::new(rho, dims, bob, charlie)?;
    // report the exact value of the final strategy
    let exact = game::winning_probability(game, &strategy)?.value;
    Ok(Run {
        strategy,
        value: exact,
        iterations: trajectory.len(),
        trajectory,
    })
}

/// Best-of-restarts alternating maximization. Restarts run in parallel; each
/// is deterministic given `(seed, restart index)`. Ties keep the lowest
/// restart index; values within `RESTART_TIE_TOL` count as tied.
pub fn seesaw(game: &MonogamyGame, cfg: &SeesawConfig) -> Result<SeesawResult> {
    game.validate()?;
    cfg.validate(game)?;
    let restarts = match cfg.init {
        SeesawInit::FromStrategy { .. } => 1,
        SeesawInit::RandomProjective => cfg.restarts,
    };
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| single_run(game, cfg, r))
        .collect::<Result<_>>()?;
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let top = restart_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_index = restart_values
        .iter()
        .position(|&v| v >= top - RESTART_TIE_TOL)
        .expect("at least one run");
    let best = runs.into_iter().nth(best_index).expect("at least one run");
    Ok(SeesawResult {
        strategy: best.strategy,
        value: best.value,
        iterations: best.iterations,
        trajectory: best.trajectory,
        restart: best_index,
        restart_values,
    })
}

/// Objective of the per-θ discrimination problem for given measurements.
pub fn step_value(sigmas: &[Vec<ComplexMatrix>], povms: &[Vec<ComplexMatrix>]) -> f64 {
    sigmas
        .iter()
        .zip(povms)
        .map(|(s, p)| measurement_value(s, p))
        .sum::<f64>()
        / sigmas.len() as f64
}

/// Bob and Charlie send `cos(π/8)|0⟩ + sin(π/8)|1⟩` and both answer 0.
pub fn bb84_optimal_unentangled_strategy() -> Strategy {
    let angle = std::f64::consts::FRAC_PI_8;
    let phi = [C64::new(angle.cos(), 0.0), C64::new(angle.sin(), 0.0)];
    Strategy::pure(
        &phi,
        DimensionList::new(vec![2, 1, 1]).expect("valid"),
        vec![constant_guess(1, 2, 0); 2],
        vec![constant_guess(1, 2, 0); 2],
    )
    .expect("valid strategy")
}
