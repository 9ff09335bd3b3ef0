//! Measurements that discriminate weighted operators `{w_x}`, i.e. maximize
//! `Σ_x tr(w_x N_x)` over POVMs `{N_x}`.
//!
//! Two outcomes are solved exactly by the Helstrom projector. More outcomes
//! get a feasible measurement: the pretty-good measurement, refined by
//! pairwise Helstrom exchanges. Every returned measurement is a valid POVM.

use crate::linalg::{self, psd_sqrt, ComplexMatrix};

/// Eigenvalues with `|λ|` below this are treated as zero by the tie rule.
const TIE_TOL: f64 = 1e-12;
/// Relative cut-off for the pseudo-inverse on the support.
const SUPPORT_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 200;

/// `Σ_x tr(w_x N_x)`.
pub fn measurement_value(weighted: &[ComplexMatrix], povm: &[ComplexMatrix]) -> f64 {
    weighted.iter().zip(povm).map(|(w, n)| w.trace_product(n).re).sum()
}

/// Projector onto the non-negative part of a Hermitian matrix; the zero
/// eigenspace (within `TIE_TOL`) is included.
fn non_negative_projector(d: &ComplexMatrix) -> ComplexMatrix {
    let eig = d.eigen_hermitian().expect("square");
    eig.reconstruct(|v| if v >= -TIE_TOL { 1.0 } else { 0.0 })
}

/// Helstrom measurement for two weighted operators: `N_0` projects onto the
/// non-negative part of `w_0 − w_1`, so ties go to outcome 0.
pub fn helstrom(w0: &ComplexMatrix, w1: &ComplexMatrix) -> (Vec<ComplexMatrix>, f64) {
    let p0 = non_negative_projector(&(w0 - w1).hermitian_part());
    let p1 = &ComplexMatrix::identity(w0.dim()) - &p0;
    let povm = vec![p0, p1];
    let value = measurement_value(&[w0.clone(), w1.clone()], &povm);
    (povm, value)
}

/// Pretty-good measurement `σ^{-1/2} w_x σ^{-1/2}`, `σ = Σ w_x`, with the
/// pseudo-inverse taken on the support of `σ`. The kernel of `σ` is assigned
/// to outcome 0 so the elements sum to the identity.
pub fn pretty_good_measurement(weighted: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let dim = weighted[0].dim();
    let sigma = linalg::sum(weighted).expect("non-empty").hermitian_part();
    let eig = sigma.eigen_hermitian().expect("square");
    let cutoff = SUPPORT_TOL * eig.max().abs().max(f64::MIN_POSITIVE);
    let inv_sqrt = eig.reconstruct(|v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 });
    let kernel = eig.reconstruct(|v| if v > cutoff { 0.0 } else { 1.0 });
    let mut povm: Vec<ComplexMatrix> = weighted
        .iter()
        .map(|w| (&(&inv_sqrt * w) * &inv_sqrt).hermitian_part())
        .collect();
    povm[0] = &povm[0] + &kernel;
    debug_assert_eq!(povm[0].dim(), dim);
    sanitize(povm)
}

/// Clips each element to its PSD part and rescales by `S^{-1/2}`,
/// `S = Σ N_x`, so the elements sum to the identity to working precision.
pub fn sanitize(povm: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    let clipped: Vec<ComplexMatrix> = povm
        .iter()
        .map(|n| n.hermitian_part().hermitian_function(|v| v.max(0.0)).expect("square"))
        .collect();
    let total = linalg::sum(&clipped).expect("non-empty").hermitian_part();
    let inv_sqrt = total
        .hermitian_function(|v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })
        .expect("square");
    clipped
        .iter()
        .map(|n| (&(&inv_sqrt * n) * &inv_sqrt).hermitian_part())
        .collect()
}

/// Optimal redistribution of `N_x + N_y` between outcomes `x` and `y`.
/// Returns the new pair; never decreases the objective.
fn exchange(
    wx: &ComplexMatrix,
    wy: &ComplexMatrix,
    nx: &ComplexMatrix,
    ny: &ComplexMatrix,
) -> (ComplexMatrix, ComplexMatrix) {
    let e = (nx + ny).hermitian_part();
    let root = match psd_sqrt(&e) {
        Ok(r) => r,
        Err(_) => return (nx.clone(), ny.clone()),
    };
    let d = (&(&root * &(wx - wy)) * &root).hermitian_part();
    let proj = non_negative_projector(&d);
    let new_x = (&(&root * &proj) * &root).hermitian_part();
    let new_y = (&e - &new_x).hermitian_part();
    (new_x, new_y)
}

/// Pairwise Helstrom sweeps until the objective stops improving.
pub fn refine_pairwise(weighted: &[ComplexMatrix], start: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    let k = weighted.len();
    let mut povm = start;
    let mut value = measurement_value(weighted, &povm);
    for _ in 0..MAX_SWEEPS {
        let before = value;
        for x in 0..k {
            for y in (x + 1)..k {
                let (nx, ny) = exchange(&weighted[x], &weighted[y], &povm[x], &povm[y]);
                let gain = weighted[x].trace_product(&nx).re + weighted[y].trace_product(&ny).re
                    - weighted[x].trace_product(&povm[x]).re
                    - weighted[y].trace_product(&povm[y]).re;
                if gain > 0.0 {
                    povm[x] = nx;
                    povm[y] = ny;
                }
            }
        }
        value = measurement_value(weighted, &povm);
        if value - before <= 1e-13 {
            break;
        }
    }
    sanitize(povm)
}

/// Best measurement found for `weighted`. Exact for two outcomes. With a
/// warm start the returned value is never below the warm start's value.
pub fn best_measurement(weighted: &[ComplexMatrix], warm: Option<&[ComplexMatrix]>) -> (Vec<ComplexMatrix>, f64) {
    assert!(!weighted.is_empty());
    let dim = weighted[0].dim();
    if weighted.len() == 1 {
        let povm = vec![ComplexMatrix::identity(dim)];
        let v = measurement_value(weighted, &povm);
        return (povm, v);
    }
    if weighted.len() == 2 {
        let (povm, value) = helstrom(&weighted[0], &weighted[1]);
        if let Some(w) = warm {
            let wv = measurement_value(weighted, w);
            if wv > value {
                return (w.to_vec(), wv);
            }
        }
        return (povm, value);
    }
    let mut candidates = vec![refine_pairwise(weighted, pretty_good_measurement(weighted))];
    if let Some(w) = warm {
        candidates.push(refine_pairwise(weighted, w.to_vec()));
        candidates.push(w.to_vec());
    }
    candidates
        .into_iter()
        .map(|p| {
            let v = measurement_value(weighted, &p);
            (p, v)
        })
        // first maximum wins
        .fold(None, |best: Option<(Vec<ComplexMatrix>, f64)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .expect("at least one candidate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, stream_rng};

    fn is_povm(povm: &[ComplexMatrix]) -> bool {
        let total = linalg::sum(povm).unwrap();
        povm.iter().all(|m| m.is_psd()) && total.max_abs_diff(&ComplexMatrix::identity(povm[0].dim())) < 1e-9
    }

    #[test]
    fn orthogonal_states_are_perfectly_distinguished() {
        let w0 = ComplexMatrix::diag(&[0.5, 0.0]);
        let w1 = ComplexMatrix::diag(&[0.0, 0.5]);
        let (povm, value) = helstrom(&w0, &w1);
        assert!((value - 1.0).abs() < 1e-12);
        assert!(povm[0].max_abs_diff(&ComplexMatrix::diag(&[1.0, 0.0])) < 1e-12);
        assert!(povm[1].max_abs_diff(&ComplexMatrix::diag(&[0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn identical_states_tie_to_outcome_zero() {
        let w = ComplexMatrix::from_real(2, 2, &[0.3, 0.1, 0.1, 0.2]).unwrap();
        let (povm, value) = helstrom(&w, &w);
        assert!(povm[0].max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        assert!(povm[1].max_abs_diff(&ComplexMatrix::zeros(2)) < 1e-12);
        assert!((value - w.trace().re).abs() < 1e-12);
    }

    #[test]
    fn helstrom_matches_trace_norm_formula() {
        let mut rng = stream_rng(11, 0);
        for _ in 0..50 {
            let r0 = random_density(3, &mut rng).scale(0.3);
            let r1 = random_density(3, &mut rng).scale(0.7);
            let (_, value) = helstrom(&r0, &r1);
            let formula = 0.5 * (1.0 + (&r0 - &r1).trace_norm());
            assert!((value - formula).abs() < 1e-10);
        }
    }

    #[test]
    fn multi_outcome_measurements_are_feasible_and_not_worse_than_pgm() {
        let mut rng = stream_rng(12, 0);
        for _ in 0..30 {
            let weighted: Vec<ComplexMatrix> = (0..4).map(|_| random_density(3, &mut rng).scale(0.25)).collect();
            let pgm = pretty_good_measurement(&weighted);
            assert!(is_povm(&pgm));
            let (best, value) = best_measurement(&weighted, None);
            assert!(is_povm(&best));
            assert!(value >= measurement_value(&weighted, &pgm) - 1e-12);
            assert!(value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn one_dimensional_refinement_picks_the_largest_weight() {
        let weighted: Vec<ComplexMatrix> = [0.1, 0.4, 0.2, 0.3]
            .iter()
            .map(|&w| ComplexMatrix::diag(&[w]))
            .collect();
        let (povm, value) = best_measurement(&weighted, None);
        assert!((value - 0.4).abs() < 1e-12);
        assert!((povm[1].get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_is_never_lost() {
        let weighted: Vec<ComplexMatrix> = [0.1, 0.4, 0.2].iter().map(|&w| ComplexMatrix::diag(&[w, w])).collect();
        let warm = vec![
            ComplexMatrix::zeros(2),
            ComplexMatrix::identity(2),
            ComplexMatrix::zeros(2),
        ];
        let (_, value) = best_measurement(&weighted, Some(&warm));
        assert!(value >= measurement_value(&weighted, &warm) - 1e-15);
    }

    #[test]
    fn pgm_handles_rank_deficient_sums() {
        let weighted = vec![
            ComplexMatrix::diag(&[0.5, 0.0, 0.0]),
            ComplexMatrix::diag(&[0.0, 0.5, 0.0]),
        ];
        let pgm = pretty_good_measurement(&weighted);
        assert!(is_povm(&pgm));
        assert!((measurement_value(&weighted, &pgm) - 1.0).abs() < 1e-12);
    }
}
