//! Guessing probabilities, conditional min-entropy and the tripartite
//! uncertainty relation for two binary measurements on `A`.

use serde::{Deserialize, Serialize};

use crate::discrimination::{helstrom, measurement_value, pretty_good_measurement};
use crate::error::{Error, Result};
use crate::game::{check_povm, overlap_between};
use crate::linalg::{partial_trace, ComplexMatrix, DimensionList, C64};

/// Tolerance on `Σ p_x = 1`.
pub const WEIGHT_TOL: f64 = 1e-9;
/// Slack on both sides of the relation when setting `satisfied`.
pub const RELATION_SLACK: f64 = 1e-8;

/// Classical-quantum ensemble `{p_x, ρ_B^x}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqEnsemble {
    pub alphabet: Vec<String>,
    pub weights: Vec<f64>,
    pub conditionals: Vec<ComplexMatrix>,
}

impl CqEnsemble {
    pub fn new(alphabet: Vec<String>, weights: Vec<f64>, conditionals: Vec<ComplexMatrix>) -> Result<Self> {
        let e = Self {
            alphabet,
            weights,
            conditionals,
        };
        e.validate()?;
        Ok(e)
    }

    /// Labels `0, 1, …`.
    pub fn indexed(weights: Vec<f64>, conditionals: Vec<ComplexMatrix>) -> Result<Self> {
        let alphabet = (0..weights.len()).map(|x| x.to_string()).collect();
        Self::new(alphabet, weights, conditionals)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.alphabet.len();
        if k == 0 || self.weights.len() != k || self.conditionals.len() != k {
            return Err(Error::Shape(format!(
                "ensemble with {} labels, {} weights and {} conditionals",
                k,
                self.weights.len(),
                self.conditionals.len()
            )));
        }
        if self.weights.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::NotDensity("negative or NaN weight".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::NotDensity(format!("weights sum to {total}")));
        }
        let dim = self.conditionals[0].rows();
        for rho in &self.conditionals {
            if rho.rows() != dim {
                return Err(Error::Dimension("conditionals have different dimensions".into()));
            }
            rho.check_density()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.conditionals[0].dim()
    }

    /// `p_x ρ_B^x` for every `x`.
    pub fn weighted(&self) -> Vec<ComplexMatrix> {
        self.weights
            .iter()
            .zip(&self.conditionals)
            .map(|(&p, r)| r.scale(p))
            .collect()
    }

    /// Ensemble whose conditionals are the given sub-normalized operators
    /// `p_x ρ_x`; zero-weight conditionals become maximally mixed.
    pub fn from_weighted(alphabet: Vec<String>, weighted: &[ComplexMatrix]) -> Result<Self> {
        let mut weights = Vec::with_capacity(weighted.len());
        let mut conditionals = Vec::with_capacity(weighted.len());
        for w in weighted {
            let p = w.trace().re;
            weights.push(p.max(0.0));
            conditionals.push(if p > 0.0 {
                w.scale(1.0 / p).hermitian_part()
            } else {
                ComplexMatrix::identity(w.dim()).scale(1.0 / w.dim() as f64)
            });
        }
        Self::new(alphabet, weights, conditionals)
    }
}

/// Per-`θ` ensembles held by the two observers after `A` is measured.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PostMeasurement {
    /// `bob[θ]`, with weights `tr((F_x^θ ⊗ 1) ρ)`.
    pub bob: Vec<CqEnsemble>,
    pub charlie: Vec<CqEnsemble>,
}

fn binary_povm_pair(
    rho_abc: &ComplexMatrix,
    dims: &DimensionList,
    f0: &[ComplexMatrix],
    f1: &[ComplexMatrix],
) -> Result<()> {
    rho_abc.check_density()?;
    if dims.len() != 3 || dims.total() != rho_abc.dim() {
        return Err(Error::Shape(format!(
            "state of dimension {} does not match factors {:?}",
            rho_abc.dim(),
            dims.factors()
        )));
    }
    let dim_a = dims.factors()[0];
    check_povm(f0, dim_a, "first measurement")?;
    check_povm(f1, dim_a, "second measurement")?;
    if f0.len() != f1.len() {
        return Err(Error::InvalidPovm(
            "the two measurements need the same outcome set".into(),
        ));
    }
    Ok(())
}

/// The classical-quantum states obtained when `A` is measured with `F^θ`,
/// `θ ∈ {0, 1}`.
pub fn post_measurement_state(
    rho_abc: &ComplexMatrix,
    dims: &DimensionList,
    f0: &[ComplexMatrix],
    f1: &[ComplexMatrix],
) -> Result<PostMeasurement> {
    binary_povm_pair(rho_abc, dims, f0, f1)?;
    let [_, db, dc] = <[usize; 3]>::try_from(dims.factors()).expect("three factors");
    let rest = ComplexMatrix::identity(db * dc);
    let labels: Vec<String> = (0..f0.len()).map(|x| x.to_string()).collect();
    let mut bob = Vec::with_capacity(2);
    let mut charlie = Vec::with_capacity(2);
    for povm in [f0, f1] {
        let mut on_b = Vec::with_capacity(povm.len());
        let mut on_c = Vec::with_capacity(povm.len());
        for f in povm {
            let m = &f.kron(&rest) * rho_abc;
            on_b.push(partial_trace(&m, dims, &[1])?.hermitian_part());
            on_c.push(partial_trace(&m, dims, &[2])?.hermitian_part());
        }
        bob.push(CqEnsemble::from_weighted(labels.clone(), &on_b)?);
        charlie.push(CqEnsemble::from_weighted(labels.clone(), &on_c)?);
    }
    Ok(PostMeasurement { bob, charlie })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Guess {
    pub value: f64,
    pub povm: Vec<ComplexMatrix>,
}

/// Exact guessing probability of a binary ensemble, `½(1 + ‖p₀ρ₀ − p₁ρ₁‖₁)`,
/// with the optimal projective measurement.
pub fn guessing_probability_binary(e: &CqEnsemble) -> Result<Guess> {
    if e.len() != 2 {
        return Err(Error::Domain(format!(
            "exact guessing needs two outcomes, got {}; use the PGM lower bound",
            e.len()
        )));
    }
    let w = e.weighted();
    let (povm, value) = helstrom(&w[0], &w[1]);
    Ok(Guess { value, povm })
}

/// Success probability of the pretty-good measurement, a lower bound on the
/// guessing probability.
pub fn pgm_guessing_lower_bound(e: &CqEnsemble) -> f64 {
    let w = e.weighted();
    measurement_value(&w, &pretty_good_measurement(&w))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinEntropy {
    /// `−log₂` of the averaged guessing probability (of its lower bound when
    /// not exact).
    pub value: f64,
    /// Bracket on the true value; collapses to `value` when exact.
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

/// `H_min(X|BΘ) = −log₂ Σ_θ p_θ p_guess(X|B, Θ = θ)`.
pub fn min_entropy_conditional(per_theta: &[CqEnsemble], theta_weights: &[f64]) -> Result<MinEntropy> {
    if per_theta.is_empty() || per_theta.len() != theta_weights.len() {
        return Err(Error::Shape("one weight per ensemble required".into()));
    }
    if (theta_weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL || theta_weights.iter().any(|&w| w < 0.0) {
        return Err(Error::NotDensity("basis weights are not a distribution".into()));
    }
    let exact = per_theta.iter().all(|e| e.len() == 2);
    let mut pguess = 0.0;
    for (e, &w) in per_theta.iter().zip(theta_weights) {
        e.validate()?;
        let p = if e.len() == 2 {
            guessing_probability_binary(e)?.value
        } else {
            pgm_guessing_lower_bound(e)
        };
        pguess += w * p;
    }
    let value = -pguess.min(1.0).log2();
    Ok(MinEntropy {
        value: value.max(0.0),
        lower: if exact { value.max(0.0) } else { 0.0 },
        upper: value.max(0.0),
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UrReport {
    pub c: f64,
    pub pguess_b: f64,
    pub pguess_c: f64,
    pub sum: f64,
    /// `1 + √c`.
    pub bound: f64,
    pub hmin_b: f64,
    pub hmin_c: f64,
    /// `−2 log₂((1 + √c)/2)`.
    pub entropy_bound: f64,
    pub satisfied: bool,
}

/// Both observers' optimal guessing probabilities for `X` given `Θ`,
/// compared with `1 + √c`.
pub fn check_uncertainty_relation(
    rho_abc: &ComplexMatrix,
    dims: &DimensionList,
    f0: &[ComplexMatrix],
    f1: &[ComplexMatrix],
) -> Result<UrReport> {
    if f0.len() != 2 || f1.len() != 2 {
        return Err(Error::Domain(
            "the relation is evaluated for binary measurements".into(),
        ));
    }
    let post = post_measurement_state(rho_abc, dims, f0, f1)?;
    let c = overlap_between(f0, f1)?;
    let half = [0.5, 0.5];
    let guess = |side: &[CqEnsemble]| -> Result<f64> {
        Ok(0.5 * (guessing_probability_binary(&side[0])?.value + guessing_probability_binary(&side[1])?.value))
    };
    let pguess_b = guess(&post.bob)?;
    let pguess_c = guess(&post.charlie)?;
    let hmin_b = min_entropy_conditional(&post.bob, &half)?.value;
    let hmin_c = min_entropy_conditional(&post.charlie, &half)?.value;
    let sum = pguess_b + pguess_c;
    let bound = 1.0 + c.sqrt();
    let entropy_bound = ur_bound_n(c, 1)?;
    Ok(UrReport {
        c,
        pguess_b,
        pguess_c,
        sum,
        bound,
        hmin_b,
        hmin_c,
        entropy_bound,
        satisfied: sum <= bound + RELATION_SLACK && hmin_b + hmin_c >= entropy_bound - RELATION_SLACK,
    })
}

/// `−2 log₂((1 + √(cⁿ))/2)`.
pub fn ur_bound_n(c: f64, n: u32) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Domain(format!("overlap {c} outside (0, 1]")));
    }
    if n == 0 {
        return Err(Error::Domain("repetition count must be at least 1".into()));
    }
    Ok(-2.0 * ((1.0 + c.powi(n as i32).sqrt()) / 2.0).log2())
}

/// `½ Φ_AB ⊗ |0⟩⟨0|_C + ½ Φ_AC ⊗ |0⟩⟨0|_B` on three qubits, ordered `A B C`.
pub fn half_entangled_mixture() -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut ab = vec![C64::new(0.0, 0.0); 8];
    // |000⟩ + |110⟩
    ab[0] = C64::new(r, 0.0);
    ab[6] = C64::new(r, 0.0);
    let mut ac = vec![C64::new(0.0, 0.0); 8];
    // |000⟩ + |101⟩
    ac[0] = C64::new(r, 0.0);
    ac[5] = C64::new(r, 0.0);
    (&ComplexMatrix::projector(&ab) + &ComplexMatrix::projector(&ac)).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::bb84_game;
    use crate::random::{random_density, stream_rng};

    fn bb84() -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
        let g = bb84_game();
        (g.povms[0].clone(), g.povms[1].clone())
    }

    fn ket(v: &[f64]) -> ComplexMatrix {
        let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        ComplexMatrix::projector(&c)
    }

    fn epr_ab() -> ComplexMatrix {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[r, 0.0, 0.0, r]).kron(&ComplexMatrix::identity(1))
    }

    fn dims(a: usize, b: usize, c: usize) -> DimensionList {
        DimensionList::new(vec![a, b, c]).unwrap()
    }

    #[test]
    fn product_state_gives_uninformative_conditionals() {
        let mut rng = stream_rng(1, 0);
        let (ra, rb, rc) = (
            random_density(2, &mut rng),
            random_density(2, &mut rng),
            random_density(2, &mut rng),
        );
        let rho = ra.kron(&rb).kron(&rc);
        let (f0, f1) = bb84();
        let post = post_measurement_state(&rho, &dims(2, 2, 2), &f0, &f1).unwrap();
        for (theta, f) in [&f0, &f1].iter().enumerate() {
            for x in 0..2 {
                assert!((post.bob[theta].weights[x] - f[x].trace_product(&ra).re).abs() < 1e-12);
                assert!(post.bob[theta].conditionals[x].max_abs_diff(&rb) < 1e-10);
                assert!(post.charlie[theta].conditionals[x].max_abs_diff(&rc) < 1e-10);
            }
            assert!((post.bob[theta].weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn epr_pair_gives_classical_copies() {
        let (f0, f1) = bb84();
        let post = post_measurement_state(&epr_ab(), &dims(2, 2, 1), &f0, &f1).unwrap();
        assert!(post.bob[0].weights.iter().all(|w| (w - 0.5).abs() < 1e-12));
        assert!(post.bob[0].conditionals[0].max_abs_diff(&ket(&[1.0, 0.0])) < 1e-12);
        assert!(post.bob[0].conditionals[1].max_abs_diff(&ket(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn binary_guessing_values() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let zero = ket(&[1.0, 0.0]);
        let plus = ket(&[r, r]);
        let e = CqEnsemble::indexed(vec![0.5, 0.5], vec![zero.clone(), plus]).unwrap();
        assert!((guessing_probability_binary(&e).unwrap().value - 0.8535533905932737).abs() < 1e-12);
        let same = CqEnsemble::indexed(vec![0.3, 0.7], vec![zero.clone(), zero.clone()]).unwrap();
        assert!((guessing_probability_binary(&same).unwrap().value - 0.7).abs() < 1e-12);
        let orth = CqEnsemble::indexed(vec![0.5, 0.5], vec![zero, ket(&[0.0, 1.0])]).unwrap();
        assert!((guessing_probability_binary(&orth).unwrap().value - 1.0).abs() < 1e-12);
        assert!((pgm_guessing_lower_bound(&orth) - 1.0).abs() < 1e-12);
        // trivial side information: PGM gives Σ p_x²
        assert!((pgm_guessing_lower_bound(&same) - 0.58).abs() < 1e-12);
    }

    #[test]
    fn pgm_never_beats_helstrom() {
        let mut rng = stream_rng(2, 0);
        for _ in 0..500 {
            let p: f64 = rand::Rng::random(&mut rng);
            let e = CqEnsemble::indexed(
                vec![p, 1.0 - p],
                vec![random_density(2, &mut rng), random_density(2, &mut rng)],
            )
            .unwrap();
            let exact = guessing_probability_binary(&e).unwrap().value;
            assert!(pgm_guessing_lower_bound(&e) <= exact + 1e-12);
            assert!(exact >= p.max(1.0 - p) - 1e-12);
        }
    }

    #[test]
    fn ancilla_does_not_help() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..50 {
            let (r0, r1) = (random_density(2, &mut rng), random_density(2, &mut rng));
            let anc = random_density(3, &mut rng);
            let e = CqEnsemble::indexed(vec![0.4, 0.6], vec![r0.clone(), r1.clone()]).unwrap();
            let ext = CqEnsemble::indexed(vec![0.4, 0.6], vec![r0.kron(&anc), r1.kron(&anc)]).unwrap();
            let a = guessing_probability_binary(&e).unwrap().value;
            let b = guessing_probability_binary(&ext).unwrap().value;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn min_entropy_values() {
        let zero = ket(&[1.0, 0.0]);
        let det = CqEnsemble::indexed(vec![1.0, 0.0], vec![zero.clone(), zero.clone()]).unwrap();
        assert_eq!(
            min_entropy_conditional(&[det.clone(), det], &[0.5, 0.5]).unwrap().value,
            0.0
        );
        let flat = CqEnsemble::indexed(vec![0.5, 0.5], vec![zero.clone(), zero.clone()]).unwrap();
        let h = min_entropy_conditional(&[flat.clone(), flat], &[0.5, 0.5]).unwrap();
        assert!((h.value - 1.0).abs() < 1e-12 && h.exact);

        let angle = std::f64::consts::FRAC_PI_8;
        let phi = ket(&[angle.cos(), angle.sin()]);
        let (f0, f1) = bb84();
        let post = post_measurement_state(&phi, &dims(2, 1, 1), &f0, &f1).unwrap();
        let h = min_entropy_conditional(&post.bob, &[0.5, 0.5]).unwrap();
        assert!((h.value - 0.22844669683638807).abs() < 1e-12);

        let three = CqEnsemble::indexed(vec![0.2, 0.3, 0.5], vec![zero.clone(), zero.clone(), zero]).unwrap();
        let h = min_entropy_conditional(&[three], &[1.0]).unwrap();
        assert!(!h.exact && h.lower == 0.0 && h.upper >= h.lower);
    }

    #[test]
    fn relation_examples() {
        let (f0, f1) = bb84();
        let r = check_uncertainty_relation(&epr_ab(), &dims(2, 2, 1), &f0, &f1).unwrap();
        assert!((r.pguess_b - 1.0).abs() < 1e-12);
        assert!((r.pguess_c - 0.5).abs() < 1e-12);
        assert!((r.bound - 1.7071067811865475).abs() < 1e-12);
        assert!(r.satisfied);

        let angle = std::f64::consts::FRAC_PI_8;
        let phi = ket(&[angle.cos(), angle.sin()]);
        let r = check_uncertainty_relation(&phi, &dims(2, 1, 1), &f0, &f1).unwrap();
        assert!((r.sum - (1.0 + 0.5f64.sqrt())).abs() < 1e-9);
        assert!(r.satisfied);

        // identical measurements: vacuous bound reached by classical copies
        let copies = &ket(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).scale(0.5)
            + &ket(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).scale(0.5);
        let r = check_uncertainty_relation(&copies, &dims(2, 2, 2), &f0, &f0).unwrap();
        assert!((r.c - 1.0).abs() < 1e-12);
        assert!((r.sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_entangled_mixture_matches_closed_form() {
        // the mixture reaches −2log₂(½ + ½·2^{−n}) for one round; the relation
        // needs −2log₂((1 + 2^{−n/2})/2)
        let (f0, f1) = bb84();
        let rho = half_entangled_mixture();
        assert!(rho.is_density());
        let r = check_uncertainty_relation(&rho, &dims(2, 2, 2), &f0, &f1).unwrap();
        assert!((r.hmin_b + r.hmin_c - -2.0 * 0.75f64.log2()).abs() < 1e-12);
        assert!(r.satisfied);
        let gap = |n: i32| -2.0 * (0.5 + 0.5 * 2f64.powi(-n)).log2() - ur_bound_n(0.5, n as u32).unwrap();
        assert!(gap(1) > 0.3);
        assert!(gap(15) < 0.02 && gap(14) >= 0.02);
    }

    #[test]
    fn ur_bound_values() {
        assert!((ur_bound_n(0.5, 1).unwrap() - 0.45689339367277615).abs() < 1e-12);
        assert!((ur_bound_n(0.5, 200).unwrap() - 2.0).abs() < 1e-12);
        for n in 1..10 {
            assert_eq!(ur_bound_n(1.0, n).unwrap(), 0.0);
        }
        assert!(ur_bound_n(0.0, 1).is_err());
    }

    #[test]
    fn shape_and_alphabet_errors() {
        let (f0, f1) = bb84();
        assert!(post_measurement_state(&epr_ab(), &dims(2, 1, 2), &f0, &f1).is_ok());
        assert!(post_measurement_state(&epr_ab(), &dims(4, 1, 1), &f0, &f1).is_err());
        let three = CqEnsemble::indexed(vec![0.2, 0.3, 0.5], vec![ComplexMatrix::identity(1); 3]).unwrap();
        assert!(guessing_probability_binary(&three).is_err());
        assert!(CqEnsemble::indexed(vec![0.2, 0.3], vec![ComplexMatrix::identity(1); 2]).is_err());
    }
}
