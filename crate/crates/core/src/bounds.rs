//! Closed-form upper bounds on monogamy-game winning probabilities.

use serde::Serialize;

use crate::error::{Error, Result};

/// Single-round optimum of the BB84 game, `½ + 1/(2√2)`.
pub fn beta0() -> f64 {
    0.5 + 0.5 / 2f64.sqrt()
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("repetition count must be at least 1".into()));
    }
    Ok(())
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&v) {
        return Err(Error::Domain(format!("{name} = {v} outside [0, 1/2]")));
    }
    Ok(())
}

fn round_factor(c: f64, theta_count: usize) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Domain(format!("overlap {c} outside (0, 1]")));
    }
    if theta_count < 2 {
        return Err(Error::Domain("at least two bases are required".into()));
    }
    let k = theta_count as f64;
    Ok(1.0 / k + (k - 1.0) / k * c.sqrt())
}

/// Optimal winning probability of `G_BB84^{×n}`, `β₀^n`.
pub fn bb84_parallel_value(n: u32) -> Result<f64> {
    check_n(n)?;
    Ok(beta0().powi(n as i32))
}

/// `|Q| (1/|Θ| + (|Θ|−1)/|Θ| · √c)^n`, unclamped.
pub fn general_upper_bound(c: f64, theta_count: usize, q_cardinality: u128, n: u32) -> Result<f64> {
    check_n(n)?;
    if q_cardinality == 0 {
        return Err(Error::Domain("Q-set cardinality must be positive".into()));
    }
    Ok(q_cardinality as f64 * round_factor(c, theta_count)?.powi(n as i32))
}

/// `(2^{h(γ)+h(γ′)} (1 + (|Θ|−1)√c)/|Θ|)^n`.
pub fn imperfect_guessing_bound(c: f64, theta_count: usize, n: u32, gamma: f64, gamma_prime: f64) -> Result<f64> {
    check_n(n)?;
    check_fraction("gamma", gamma)?;
    check_fraction("gamma'", gamma_prime)?;
    let entropy = binary_entropy(gamma)? + binary_entropy(gamma_prime)?;
    Ok((2f64.powf(entropy) * round_factor(c, theta_count)?).powi(n as i32))
}

/// Bound when Charlie must report Bob's string: one entropy factor.
pub fn same_string_bound(c: f64, theta_count: usize, n: u32, gamma: f64) -> Result<f64> {
    imperfect_guessing_bound(c, theta_count, n, gamma, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFormula {
    Bb84Parallel,
    GeneralOverlap,
    ImperfectGuessing,
    SameString,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BoundInputs {
    pub n: u32,
    pub c: f64,
    pub theta_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_cardinality: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
}

/// A bound together with the inputs that reproduce it. Values above one are
/// kept as computed and flagged `vacuous`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub formula: BoundFormula,
    pub inputs: BoundInputs,
    pub vacuous: bool,
}

impl BoundReport {
    fn new(value: f64, formula: BoundFormula, inputs: BoundInputs) -> Self {
        Self {
            value,
            formula,
            inputs,
            vacuous: value >= 1.0,
        }
    }

    pub fn bb84(n: u32) -> Result<Self> {
        Ok(Self::new(
            bb84_parallel_value(n)?,
            BoundFormula::Bb84Parallel,
            BoundInputs {
                n,
                c: 0.5,
                theta_count: 2,
                q_cardinality: Some(1),
                ..Default::default()
            },
        ))
    }

    pub fn general(c: f64, theta_count: usize, q_cardinality: u128, n: u32) -> Result<Self> {
        Ok(Self::new(
            general_upper_bound(c, theta_count, q_cardinality, n)?,
            BoundFormula::GeneralOverlap,
            BoundInputs {
                n,
                c,
                theta_count,
                q_cardinality: Some(q_cardinality),
                ..Default::default()
            },
        ))
    }

    pub fn imperfect(c: f64, theta_count: usize, n: u32, gamma: f64, gamma_prime: f64) -> Result<Self> {
        Ok(Self::new(
            imperfect_guessing_bound(c, theta_count, n, gamma, gamma_prime)?,
            BoundFormula::ImperfectGuessing,
            BoundInputs {
                n,
                c,
                theta_count,
                gamma: Some(gamma),
                gamma_prime: Some(gamma_prime),
                ..Default::default()
            },
        ))
    }

    pub fn same_string(c: f64, theta_count: usize, n: u32, gamma: f64) -> Result<Self> {
        Ok(Self::new(
            same_string_bound(c, theta_count, n, gamma)?,
            BoundFormula::SameString,
            BoundInputs {
                n,
                c,
                theta_count,
                gamma: Some(gamma),
                ..Default::default()
            },
        ))
    }
}
