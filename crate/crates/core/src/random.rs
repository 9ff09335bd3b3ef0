//! Seeded randomness: per-trial streams and random quantum objects.
//!
//! Every stochastic routine takes a 64-bit seed. Trial `i` of a Monte-Carlo
//! run draws from ChaCha stream `i` under that seed, so results do not depend
//! on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{psd_sqrt, ComplexMatrix, C64};

pub type TrialRng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, entries).expect("positive dimensions")
}

/// Haar-random unit vector.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Random PSD matrix `G G†` with `G` a `dim x rank` Ginibre matrix.
pub fn random_psd(dim: usize, rank: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, rank, rng);
    (&g * &g.adjoint()).hermitian_part()
}

/// Random density matrix of full rank (induced measure).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let p = random_psd(dim, dim, rng);
    let tr = p.trace().re;
    p.scale(1.0 / tr)
}

/// Haar-random orthonormal basis, via Gram-Schmidt on Gaussian vectors.
pub fn random_basis(dim: usize, rng: &mut impl Rng) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for b in &basis {
            let proj: C64 = b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum();
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= proj * bi);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        basis.push(v);
    }
    basis
}

/// Random projective measurement with `outcomes` elements on `dim`: each
/// vector of a Haar-random basis is assigned to a uniformly random outcome.
pub fn random_projective_measurement(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let mut elements = vec![ComplexMatrix::zeros(dim); outcomes];
    for v in random_basis(dim, rng) {
        let x = rng.random_range(0..outcomes);
        elements[x] = &elements[x] + &ComplexMatrix::projector(&v);
    }
    elements
}

/// Random POVM `M_x = S^{-1/2} A_x S^{-1/2}` with `A_x` random PSD and
/// `S = Σ A_x`.
pub fn random_povm(dim: usize, outcomes: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let parts: Vec<ComplexMatrix> = (0..outcomes).map(|_| random_psd(dim, dim, rng)).collect();
    let total = crate::linalg::sum(&parts).expect("at least one outcome");
    let inv_sqrt = psd_sqrt(&total)
        .and_then(|s| s.hermitian_function(|v| if v > 1e-12 { 1.0 / v } else { 0.0 }))
        .expect("sum of random PSD matrices is PSD");
    parts
        .iter()
        .map(|a| (&(&inv_sqrt * a) * &inv_sqrt).hermitian_part())
        .collect()
}
