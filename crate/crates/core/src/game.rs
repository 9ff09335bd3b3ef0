//! Monogamy games, strategies and exact evaluation of winning probabilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, overlap_of_pair, ComplexMatrix, DimensionList, C64, NORMALIZATION_TOL};

/// Upper limit on `|Θ|^n · |X|^n` for tensor powers.
pub const POWER_CAPACITY: u128 = 1_000_000;

/// A game: Alice's space and one measurement `{F_x^θ}_x` per basis label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonogamyGame {
    pub dim_a: usize,
    pub thetas: Vec<String>,
    pub outcomes: Vec<String>,
    /// `povms[θ][x]`, aligned with `thetas` and `outcomes`.
    pub povms: Vec<Vec<ComplexMatrix>>,
}

/// Tripartite state plus per-basis measurements for Bob and Charlie.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Strategy {
    pub rho_abc: ComplexMatrix,
    pub dims: DimensionList,
    pub bob_povms: Vec<Vec<ComplexMatrix>>,
    pub charlie_povms: Vec<Vec<ComplexMatrix>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WinningProbability {
    pub value: f64,
    pub per_theta: Vec<f64>,
}

pub(crate) fn check_povm(elements: &[ComplexMatrix], dim: usize, what: &str) -> Result<()> {
    if elements.is_empty() {
        return Err(Error::InvalidPovm(format!("{what}: no elements")));
    }
    for (x, e) in elements.iter().enumerate() {
        if !e.is_square() || e.dim() != dim {
            return Err(Error::InvalidPovm(format!(
                "{what}: element {x} is {}x{}, expected {dim}x{dim}",
                e.rows(),
                e.cols()
            )));
        }
        e.check_psd()
            .map_err(|err| Error::InvalidPovm(format!("{what}: element {x}: {err}")))?;
    }
    let total = linalg::sum(elements).expect("non-empty");
    let deviation = total.max_abs_diff(&ComplexMatrix::identity(dim));
    if deviation > NORMALIZATION_TOL {
        return Err(Error::InvalidPovm(format!(
            "{what}: elements sum to identity only within {deviation:e}"
        )));
    }
    Ok(())
}

impl MonogamyGame {
    pub fn new(
        dim_a: usize,
        thetas: Vec<String>,
        outcomes: Vec<String>,
        povms: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self> {
        let game = Self {
            dim_a,
            thetas,
            outcomes,
            povms,
        };
        game.validate()?;
        Ok(game)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.outcomes.is_empty() {
            return Err(Error::Shape("game needs at least one basis and one outcome".into()));
        }
        if self.povms.len() != self.thetas.len() {
            return Err(Error::Shape(format!(
                "{} measurements for {} bases",
                self.povms.len(),
                self.thetas.len()
            )));
        }
        for (label, povm) in self.thetas.iter().zip(&self.povms) {
            if povm.len() != self.outcomes.len() {
                return Err(Error::Shape(format!(
                    "basis {label}: {} elements for {} outcomes",
                    povm.len(),
                    self.outcomes.len()
                )));
            }
            check_povm(povm, self.dim_a, &format!("basis {label}"))?;
        }
        Ok(())
    }

    pub fn theta_count(&self) -> usize {
        self.thetas.len()
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn element(&self, theta: usize, x: usize) -> &ComplexMatrix {
        &self.povms[theta][x]
    }
}

/// The BB84 game: `F_x^θ = H^θ |x><x| H^θ` on a qubit.
pub fn bb84_game() -> MonogamyGame {
    let computational = vec![ComplexMatrix::diag(&[1.0, 0.0]), ComplexMatrix::diag(&[0.0, 1.0])];
    let hadamard = vec![
        ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).expect("2x2"),
        ComplexMatrix::from_real(2, 2, &[0.5, -0.5, -0.5, 0.5]).expect("2x2"),
    ];
    MonogamyGame {
        dim_a: 2,
        thetas: vec!["0".into(), "1".into()],
        outcomes: vec!["0".into(), "1".into()],
        povms: vec![computational, hadamard],
    }
}

/// Index tuples of `0..base` of length `n`, leftmost digit most significant.
pub(crate) fn digits(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

pub(crate) fn checked_pow(base: usize, n: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}

/// The `n`-fold parallel repetition. Labels are concatenations of base
/// labels, ordered with the first round most significant.
pub fn game_power(game: &MonogamyGame, n: usize) -> Result<MonogamyGame> {
    if n == 0 {
        return Err(Error::Domain("repetition count must be positive".into()));
    }
    let size = checked_pow(game.theta_count(), n)
        .zip(checked_pow(game.outcome_count(), n))
        .and_then(|(a, b)| a.checked_mul(b));
    match size {
        Some(s) if s <= POWER_CAPACITY => {}
        other => {
            return Err(Error::Capacity {
                what: "game power |Θ|^n·|X|^n",
                requested: other.unwrap_or(u128::MAX),
                limit: POWER_CAPACITY,
            })
        }
    }
    if n == 1 {
        return Ok(game.clone());
    }
    let theta_total = game.theta_count().pow(n as u32);
    let outcome_total = game.outcome_count().pow(n as u32);
    let label = |names: &[String], idx: &[usize]| idx.iter().map(|&i| names[i].as_str()).collect::<String>();

    let thetas = (0..theta_total)
        .map(|t| label(&game.thetas, &digits(t, game.theta_count(), n)))
        .collect();
    let outcomes = (0..outcome_total)
        .map(|x| label(&game.outcomes, &digits(x, game.outcome_count(), n)))
        .collect();
    let povms = (0..theta_total)
        .into_par_iter()
        .map(|t| {
            let ts = digits(t, game.theta_count(), n);
            (0..outcome_total)
                .map(|x| {
                    let xs = digits(x, game.outcome_count(), n);
                    linalg::tensor_all(ts.iter().zip(&xs).map(|(&ti, &xi)| game.element(ti, xi))).expect("n >= 1")
                })
                .collect()
        })
        .collect();
    Ok(MonogamyGame {
        dim_a: game.dim_a.pow(n as u32),
        thetas,
        outcomes,
        povms,
    })
}

/// Maximal overlap `c(G)` over distinct bases.
pub fn overlap(game: &MonogamyGame) -> Result<f64> {
    if game.theta_count() < 2 {
        return Err(Error::Domain("overlap needs at least two bases".into()));
    }
    let roots: Vec<Vec<ComplexMatrix>> = game
        .povms
        .par_iter()
        .map(|povm| povm.iter().map(linalg::sqrt_factor).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let k = game.theta_count();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
        .filter(|(a, b)| a < b)
        .collect();
    let c = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut best = 0.0f64;
            for ra in &roots[a] {
                for rb in &roots[b] {
                    best = best.max(linalg::squared_product_norm(ra, rb)?);
                }
            }
            Ok(best)
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))?;
    let lower = 1.0 / game.outcome_count() as f64;
    debug_assert!(c >= lower - 1e-9 && c <= 1.0 + 1e-9, "overlap {c} outside [{lower}, 1]");
    Ok(c)
}

/// Overlap of `G^{×n}` restricted to basis strings that differ in every
/// round, `max ‖√F_x^θ √F_{x′}^{θ′}‖²` over `θ_i ≠ θ′_i` for all `i`. This is
/// the quantity that factorizes as `c(G)^n`; the plain [`overlap`] of a power
/// game also ranges over strings sharing some rounds and so stays at `c(G)`.
pub fn round_wise_overlap(base: &MonogamyGame, n: usize) -> Result<f64> {
    if base.theta_count() < 2 {
        return Err(Error::Domain("overlap needs at least two bases".into()));
    }
    let power = game_power(base, n)?;
    let k = base.theta_count();
    let roots: Vec<Vec<ComplexMatrix>> = power
        .povms
        .par_iter()
        .map(|povm| povm.iter().map(linalg::sqrt_factor).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let total = power.theta_count();
    let pairs: Vec<(usize, usize)> = (0..total)
        .flat_map(|a| (0..total).map(move |b| (a, b)))
        .filter(|&(a, b)| a < b && hamming_distance(a, b, k, n) == n)
        .collect();
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut best = 0.0f64;
            for ra in &roots[a] {
                for rb in &roots[b] {
                    best = best.max(linalg::squared_product_norm(ra, rb)?);
                }
            }
            Ok(best)
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
}

/// Overlap restricted to one pair of measurements, as used by the
/// uncertainty relation.
pub fn overlap_between(first: &[ComplexMatrix], second: &[ComplexMatrix]) -> Result<f64> {
    let mut best = 0.0f64;
    for a in first {
        for b in second {
            best = best.max(overlap_of_pair(a, b)?);
        }
    }
    Ok(best)
}

impl Strategy {
    pub fn new(
        rho_abc: ComplexMatrix,
        dims: DimensionList,
        bob_povms: Vec<Vec<ComplexMatrix>>,
        charlie_povms: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self> {
        let s = Self {
            rho_abc,
            dims,
            bob_povms,
            charlie_povms,
        };
        s.validate_self()?;
        Ok(s)
    }

    /// Strategy with a pure tripartite state `|ψ><ψ|`.
    pub fn pure(
        psi: &[C64],
        dims: DimensionList,
        bob_povms: Vec<Vec<ComplexMatrix>>,
        charlie_povms: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self> {
        Self::new(ComplexMatrix::projector(psi), dims, bob_povms, charlie_povms)
    }

    pub fn dim_a(&self) -> usize {
        self.dims.factors()[0]
    }

    pub fn dim_b(&self) -> usize {
        self.dims.factors()[1]
    }

    pub fn dim_c(&self) -> usize {
        self.dims.factors()[2]
    }

    fn validate_self(&self) -> Result<()> {
        if self.dims.len() != 3 {
            return Err(Error::Shape(format!(
                "strategy needs three factors, got {:?}",
                self.dims.factors()
            )));
        }
        if self.rho_abc.dim() != self.dims.total() || !self.rho_abc.is_square() {
            return Err(Error::Shape(format!(
                "state of dimension {} for factors {:?}",
                self.rho_abc.rows(),
                self.dims.factors()
            )));
        }
        self.rho_abc.check_density()?;
        if self.bob_povms.len() != self.charlie_povms.len() {
            return Err(Error::Shape("Bob and Charlie cover different basis counts".into()));
        }
        for (t, (p, q)) in self.bob_povms.iter().zip(&self.charlie_povms).enumerate() {
            check_povm(p, self.dim_b(), &format!("Bob basis {t}"))?;
            check_povm(q, self.dim_c(), &format!("Charlie basis {t}"))?;
        }
        Ok(())
    }

    /// Full validation against a game.
    pub fn validate(&self, game: &MonogamyGame) -> Result<()> {
        self.validate_self()?;
        self.check_shape(game)
    }

    pub(crate) fn check_shape(&self, game: &MonogamyGame) -> Result<()> {
        if self.dim_a() != game.dim_a {
            return Err(Error::Shape(format!(
                "strategy has d_A = {}, game has {}",
                self.dim_a(),
                game.dim_a
            )));
        }
        let k = game.theta_count();
        let x = game.outcome_count();
        if self.bob_povms.len() != k || self.charlie_povms.len() != k {
            return Err(Error::Shape(format!("strategy does not cover {k} bases")));
        }
        if self
            .bob_povms
            .iter()
            .chain(&self.charlie_povms)
            .any(|povm| povm.len() != x)
        {
            return Err(Error::Shape(format!("guess measurements must have {x} outcomes")));
        }
        Ok(())
    }

    /// Tensor product of strategies, regrouped as `(A₁…A_n)(B₁…B_n)(C₁…C_n)`
    /// so it plays the product game `G^{×n}` with round-wise answers.
    pub fn tensor_power(&self, n: usize) -> Result<Strategy> {
        if n == 0 {
            return Err(Error::Domain("repetition count must be positive".into()));
        }
        let (da, db, dc) = (self.dim_a(), self.dim_b(), self.dim_c());
        let k = self.bob_povms.len();
        let x = self.bob_povms.first().map_or(0, Vec::len);
        let theta_total = checked_pow(k, n).unwrap_or(u128::MAX);
        let outcome_total = checked_pow(x, n).unwrap_or(u128::MAX);
        if theta_total.saturating_mul(outcome_total) > POWER_CAPACITY {
            return Err(Error::Capacity {
                what: "strategy power |Θ|^n·|X|^n",
                requested: theta_total.saturating_mul(outcome_total),
                limit: POWER_CAPACITY,
            });
        }
        let copies = vec![&self.rho_abc; n];
        let raw = linalg::tensor_all(copies).expect("n >= 1");
        // permute factors (A B C)^n -> A^n B^n C^n
        let mut factors = Vec::with_capacity(3 * n);
        for _ in 0..n {
            factors.extend([da, db, dc]);
        }
        let order: Vec<usize> = (0..3)
            .flat_map(|party| (0..n).map(move |round| 3 * round + party))
            .collect();
        let rho = permute_factors(&raw, &factors, &order);

        let power = |povms: &[Vec<ComplexMatrix>]| -> Vec<Vec<ComplexMatrix>> {
            (0..k.pow(n as u32))
                .map(|t| {
                    let ts = digits(t, k, n);
                    (0..x.pow(n as u32))
                        .map(|xi| {
                            let xs = digits(xi, x, n);
                            linalg::tensor_all(ts.iter().zip(&xs).map(|(&a, &b)| &povms[a][b])).expect("n >= 1")
                        })
                        .collect()
                })
                .collect()
        };
        Strategy::new(
            rho,
            DimensionList::new(vec![da.pow(n as u32), db.pow(n as u32), dc.pow(n as u32)])?,
            power(&self.bob_povms),
            power(&self.charlie_povms),
        )
    }
}

/// Reorders tensor factors: output factor `i` is input factor `order[i]`.
pub(crate) fn permute_factors(m: &ComplexMatrix, factors: &[usize], order: &[usize]) -> ComplexMatrix {
    let dim = m.dim();
    let out_factors: Vec<usize> = order.iter().map(|&i| factors[i]).collect();
    // map each output basis index to its input index
    let map: Vec<usize> = (0..dim)
        .map(|out| {
            let mut rem = out;
            let mut out_digits = vec![0; order.len()];
            for (slot, &f) in out_digits.iter_mut().zip(&out_factors).rev() {
                *slot = rem % f;
                rem /= f;
            }
            let mut in_digits = vec![0; factors.len()];
            for (pos, &src) in order.iter().enumerate() {
                in_digits[src] = out_digits[pos];
            }
            in_digits.iter().zip(factors).fold(0, |acc, (&d, &f)| acc * f + d)
        })
        .collect();
    ComplexMatrix::from_fn(dim, dim, |r, c| m.get(map[r], map[c]))
}

/// `Π^θ = Σ_x F_x^θ ⊗ P_x^θ ⊗ Q_x^θ`.
pub fn winning_operator(game: &MonogamyGame, strategy: &Strategy, theta: usize) -> ComplexMatrix {
    guess_operator(
        &game.povms[theta],
        &strategy.bob_povms[theta],
        &strategy.charlie_povms[theta],
        |x| vec![(x, x)],
    )
}

/// `Σ_x F_x ⊗ Σ_{(y,z) ∈ targets(x)} P_y ⊗ Q_z`.
pub(crate) fn guess_operator(
    alice: &[ComplexMatrix],
    bob: &[ComplexMatrix],
    charlie: &[ComplexMatrix],
    targets: impl Fn(usize) -> Vec<(usize, usize)>,
) -> ComplexMatrix {
    let terms: Vec<ComplexMatrix> = alice
        .iter()
        .enumerate()
        .map(|(x, f)| {
            let guesses: Vec<ComplexMatrix> = targets(x).into_iter().map(|(y, z)| bob[y].kron(&charlie[z])).collect();
            f.kron(&linalg::sum(&guesses).expect("at least one target"))
        })
        .collect();
    linalg::sum(&terms).expect("non-empty POVM")
}

/// `(1/|Θ|) Σ_θ Π^θ`.
pub fn average_winning_operator(game: &MonogamyGame, strategy: &Strategy) -> ComplexMatrix {
    let ops: Vec<ComplexMatrix> = (0..game.theta_count())
        .into_par_iter()
        .map(|t| winning_operator(game, strategy, t))
        .collect();
    linalg::sum(&ops)
        .expect("non-empty")
        .scale(1.0 / game.theta_count() as f64)
}

pub fn winning_probability(game: &MonogamyGame, strategy: &Strategy) -> Result<WinningProbability> {
    strategy.check_shape(game)?;
    let per_theta: Vec<f64> = (0..game.theta_count())
        .into_par_iter()
        .map(|t| winning_operator(game, strategy, t).trace_product(&strategy.rho_abc).re)
        .collect();
    let value = per_theta.iter().sum::<f64>() / game.theta_count() as f64;
    Ok(WinningProbability { value, per_theta })
}

/// One allowed displacement pair `(π_B, π_C)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessPermutation {
    /// Outcome-index maps for Bob and Charlie.
    Explicit { bob: Vec<usize>, charlie: Vec<usize> },
    /// `x ↦ x ⊕ bob`, `x ↦ x ⊕ charlie` on outcome indices read as bit strings.
    XorShift { bob: u64, charlie: u64 },
}

impl GuessPermutation {
    fn apply(&self, x: usize) -> (usize, usize) {
        match self {
            Self::Explicit { bob, charlie } => (bob[x], charlie[x]),
            Self::XorShift { bob, charlie } => (x ^ *bob as usize, x ^ *charlie as usize),
        }
    }
}

/// Set of displacement pairs accepted as a win.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSet {
    pub outcome_count: usize,
    pub pairs: Vec<GuessPermutation>,
}

impl QSet {
    pub fn new(outcome_count: usize, pairs: Vec<GuessPermutation>) -> Result<Self> {
        let q = Self { outcome_count, pairs };
        q.validate()?;
        Ok(q)
    }

    /// Only `(id, id)`: exact guessing.
    pub fn exact(outcome_count: usize) -> Self {
        Self {
            outcome_count,
            pairs: vec![GuessPermutation::XorShift { bob: 0, charlie: 0 }],
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.outcome_count;
        if self.pairs.is_empty() {
            return Err(Error::InvalidPermutations("empty Q-set".into()));
        }
        let is_bijection = |p: &[usize]| {
            let mut seen = vec![false; n];
            p.len() == n && p.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
        };
        let mut canonical = Vec::with_capacity(self.pairs.len());
        for pair in &self.pairs {
            match pair {
                GuessPermutation::Explicit { bob, charlie } => {
                    if !is_bijection(bob) || !is_bijection(charlie) {
                        return Err(Error::InvalidPermutations(
                            "Q-set entry is not a bijection on the outcomes".into(),
                        ));
                    }
                }
                GuessPermutation::XorShift { bob, charlie } => {
                    if !n.is_power_of_two() || *bob as usize >= n || *charlie as usize >= n {
                        return Err(Error::InvalidPermutations(format!(
                            "XOR shift ({bob}, {charlie}) invalid for {n} outcomes"
                        )));
                    }
                }
            }
            let full: (Vec<usize>, Vec<usize>) = (0..n).map(|x| pair.apply(x)).unzip();
            canonical.push(full);
        }
        let mut sorted = canonical.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != canonical.len() {
            return Err(Error::InvalidPermutations("duplicate pair in Q-set".into()));
        }
        Ok(())
    }
}

/// `(1/|Θ|) Σ_θ tr(A^θ ρ)` with `A^θ = Σ_x F_x^θ ⊗ Σ_q P_{π_B^q(x)}^θ ⊗ Q_{π_C^q(x)}^θ`.
pub fn winning_probability_with_q(game: &MonogamyGame, strategy: &Strategy, q: &QSet) -> Result<WinningProbability> {
    strategy.check_shape(game)?;
    if q.outcome_count != game.outcome_count() {
        return Err(Error::Shape(format!(
            "Q-set over {} outcomes, game has {}",
            q.outcome_count,
            game.outcome_count()
        )));
    }
    q.validate()?;
    let per_theta: Vec<f64> = (0..game.theta_count())
        .into_par_iter()
        .map(|t| {
            let op = guess_operator(
                &game.povms[t],
                &strategy.bob_povms[t],
                &strategy.charlie_povms[t],
                |x| q.pairs.iter().map(|p| p.apply(x)).collect(),
            );
            op.trace_product(&strategy.rho_abc).re
        })
        .collect();
    let value = per_theta.iter().sum::<f64>() / game.theta_count() as f64;
    Ok(WinningProbability { value, per_theta })
}

/// Coordinatewise shifts `θ ↦ θ + k (mod |Θ|)` on `Θ^n`, one per `k ∈ Θ^n`,
/// as index maps over the game-power ordering. For `|Θ| = 2` this is `θ ⊕ k`.
pub fn xor_permutation_family(n: usize, alphabet_size: usize) -> Result<Vec<Vec<usize>>> {
    if alphabet_size < 2 {
        return Err(Error::Domain("alphabet needs at least two symbols".into()));
    }
    if n == 0 {
        return Err(Error::Domain("string length must be positive".into()));
    }
    let total = checked_pow(alphabet_size, n)
        .filter(|&t| t <= POWER_CAPACITY)
        .ok_or(Error::Capacity {
            what: "permutation family |Θ|^n",
            requested: checked_pow(alphabet_size, n).unwrap_or(u128::MAX),
            limit: POWER_CAPACITY,
        })? as usize;
    let strings: Vec<Vec<usize>> = (0..total).map(|i| digits(i, alphabet_size, n)).collect();
    let index = |ds: &[usize]| ds.iter().fold(0, |acc, &d| acc * alphabet_size + d);
    Ok(strings
        .iter()
        .map(|k| {
            strings
                .iter()
                .map(|theta| {
                    let shifted: Vec<usize> = theta.iter().zip(k).map(|(a, b)| (a + b) % alphabet_size).collect();
                    index(&shifted)
                })
                .collect()
        })
        .collect())
}

/// Number of coordinates where two index strings differ.
pub fn hamming_distance(a: usize, b: usize, base: usize, n: usize) -> usize {
    digits(a, base, n)
        .iter()
        .zip(digits(b, base, n))
        .filter(|(x, y)| **x != *y)
        .count()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `Σ_{w ≤ ⌊γn⌋} C(n, w)`.
pub fn hamming_ball_size(n: usize, gamma: f64) -> u128 {
    let radius = max_weight(n, gamma);
    (0..=radius).map(|w| binomial(n, w)).sum()
}

fn max_weight(n: usize, gamma: f64) -> usize {
    // tolerate representation error in products like 0.25 * 4
    ((gamma * n as f64) + 1e-9).floor() as usize
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1/2]")));
    }
    Ok(())
}

const XOR_MAX_BITS: usize = 20;

fn shifts_up_to(n: usize, radius: usize) -> Vec<u64> {
    (0u64..(1u64 << n))
        .filter(|k| k.count_ones() as usize <= radius)
        .collect()
}

/// All pairs `(⊕k, ⊕k′)` with `wt(k) ≤ γn` and `wt(k′) ≤ γ′n`.
pub fn hamming_q_set(n: usize, gamma: f64, gamma_prime: f64) -> Result<QSet> {
    check_fraction("gamma", gamma)?;
    check_fraction("gamma'", gamma_prime)?;
    if n == 0 || n > XOR_MAX_BITS {
        return Err(Error::Domain(format!("string length {n} outside 1..={XOR_MAX_BITS}")));
    }
    let size = hamming_ball_size(n, gamma) * hamming_ball_size(n, gamma_prime);
    if size > POWER_CAPACITY {
        return Err(Error::Capacity {
            what: "Hamming Q-set",
            requested: size,
            limit: POWER_CAPACITY,
        });
    }
    let bob = shifts_up_to(n, max_weight(n, gamma));
    let charlie = shifts_up_to(n, max_weight(n, gamma_prime));
    let pairs = bob
        .iter()
        .flat_map(|&k| {
            charlie
                .iter()
                .map(move |&k2| GuessPermutation::XorShift { bob: k, charlie: k2 })
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(pairs.len() as u128, size);
    Ok(QSet {
        outcome_count: 1 << n,
        pairs,
    })
}

/// Pairs `(⊕k, ⊕k)` with `wt(k) ≤ γn`: Charlie must give Bob's answer.
pub fn same_string_q_set(n: usize, gamma: f64) -> Result<QSet> {
    check_fraction("gamma", gamma)?;
    if n == 0 || n > XOR_MAX_BITS {
        return Err(Error::Domain(format!("string length {n} outside 1..={XOR_MAX_BITS}")));
    }
    let pairs = shifts_up_to(n, max_weight(n, gamma))
        .into_iter()
        .map(|k| GuessPermutation::XorShift { bob: k, charlie: k })
        .collect();
    Ok(QSet {
        outcome_count: 1 << n,
        pairs,
    })
}

/// Guess measurement that answers `x` with certainty on a space of dimension `dim`.
pub fn constant_guess(dim: usize, outcomes: usize, x: usize) -> Vec<ComplexMatrix> {
    (0..outcomes)
        .map(|y| {
            if y == x {
                ComplexMatrix::identity(dim)
            } else {
                ComplexMatrix::zeros(dim)
            }
        })
        .collect()
}

/// Guess measurement answering uniformly at random.
pub fn uniform_guess(dim: usize, outcomes: usize) -> Vec<ComplexMatrix> {
    vec![ComplexMatrix::identity(dim).scale(1.0 / outcomes as f64); outcomes]
}
