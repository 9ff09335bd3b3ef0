//! The reduction from the conditioned secrecy criterion to an unconditioned
//! one: for classical-quantum states `ρ`, `ρ̃` and an event `Λ` on `X`,
//!
//! `Pr_ρ[Λ]·Δ(ρ_{XB|Λ}, τ_X⊗ρ_{B|Λ}) ≤ 5Δ(ρ, ρ̃) + Pr_ρ̃[Λ]·Δ(ρ̃_{XB|Λ}, τ_X⊗ρ̃_{B|Λ})`.
//!
//! States are block diagonal in `X`, so every trace distance splits into a
//! sum over blocks. The conditioned terms are computed in their
//! unnormalized form, `½ Σ_x ‖1_Λ(x)·p_xρ_x − τ(x)·Σ_{x′∈Λ} p_{x′}ρ_{x′}‖₁`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::uncertainty::CqEnsemble;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecdefGap {
    pub lhs: f64,
    pub rhs: f64,
    /// `Δ(ρ, ρ̃)`.
    pub distance: f64,
    pub event_prob: f64,
    pub event_prob_ideal: f64,
}

fn check_alphabets(a: &CqEnsemble, b: &CqEnsemble) -> Result<()> {
    if a.alphabet != b.alphabet {
        return Err(Error::Shape("ensembles use different alphabets".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "quantum parts have dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `Δ` between two classical-quantum states on the same alphabet.
pub fn cq_trace_distance(a: &CqEnsemble, b: &CqEnsemble) -> Result<f64> {
    check_alphabets(a, b)?;
    Ok(0.5
        * a.weighted()
            .iter()
            .zip(b.weighted())
            .map(|(x, y)| (x - &y).trace_norm())
            .sum::<f64>())
}

/// `(Pr[Λ], Pr[Λ]·Δ(ρ_{XB|Λ}, τ_X⊗ρ_{B|Λ}))`.
fn conditioned_term(e: &CqEnsemble, event: &[bool], tau: &[f64]) -> (f64, f64) {
    let weighted = e.weighted();
    let inside: Vec<&ComplexMatrix> = weighted.iter().zip(event).filter(|(_, &l)| l).map(|(w, _)| w).collect();
    let Some(marginal) = linalg::sum(inside) else {
        return (0.0, 0.0);
    };
    let prob = marginal.trace().re;
    let term = weighted
        .iter()
        .zip(event)
        .zip(tau)
        .map(|((w, &l), &t)| {
            let ideal = marginal.scale(t);
            if l {
                (w - &ideal).trace_norm()
            } else {
                ideal.trace_norm()
            }
        })
        .sum::<f64>();
    (prob, 0.5 * term)
}

/// Both sides of the inequality. `tau` is the ideal key distribution, uniform
/// when `None`.
pub fn secdef_gap(
    real: &CqEnsemble,
    ideal: &CqEnsemble,
    predicate: impl Fn(usize) -> bool,
    tau: Option<&[f64]>,
) -> Result<SecdefGap> {
    real.validate()?;
    ideal.validate()?;
    check_alphabets(real, ideal)?;
    let k = real.len();
    let uniform = vec![1.0 / k as f64; k];
    let tau = tau.unwrap_or(&uniform);
    if tau.len() != k || tau.iter().any(|&p| p < 0.0) || (tau.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::NotDensity(
            "key distribution must be a distribution on the alphabet".into(),
        ));
    }
    let event: Vec<bool> = (0..k).map(&predicate).collect();
    let distance = cq_trace_distance(real, ideal)?;
    let (event_prob, lhs) = conditioned_term(real, &event, tau);
    let (event_prob_ideal, ideal_term) = conditioned_term(ideal, &event, tau);
    Ok(SecdefGap {
        lhs,
        rhs: 5.0 * distance + ideal_term,
        distance,
        event_prob,
        event_prob_ideal,
    })
}
