use crate::error::{Error, Result};

/// Seed length for hashing `input_len` bits down to `ell` bits.
pub fn toeplitz_seed_len(input_len: usize, ell: usize) -> usize {
    (input_len + ell).saturating_sub(1)
}

/// Toeplitz matrix-vector product over GF(2): output bit `j` is the XOR over
/// `i` of `seed[j + input_len − 1 − i] · input[i]`.
pub fn toeplitz_hash(seed: &[bool], input: &[bool], ell: usize) -> Result<Vec<bool>> {
    let m = input.len();
    if seed.len() != toeplitz_seed_len(m, ell) {
        return Err(Error::Shape(format!(
            "Toeplitz seed has {} bits, expected {}",
            seed.len(),
            toeplitz_seed_len(m, ell)
        )));
    }
    Ok((0..ell)
        .map(|j| {
            input
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .fold(false, |acc, (i, _)| acc ^ seed[j + m - 1 - i])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::stream_rng;
    use rand::Rng;

    fn bits(v: u32, len: usize) -> Vec<bool> {
        (0..len).map(|i| (v >> i) & 1 == 1).collect()
    }

    #[test]
    fn zeros_and_empty_outputs() {
        let seed = vec![true; 23];
        assert_eq!(toeplitz_hash(&seed, &[false; 16], 8).unwrap(), vec![false; 8]);
        assert!(toeplitz_hash(&[true; 15], &[true; 16], 0).unwrap().is_empty());
        assert!(toeplitz_hash(&seed, &[true; 16], 7).is_err());
    }

    #[test]
    fn matches_explicit_matrix() {
        // seed s0..s4, input length 3, ell 3: row j is (s_{j+2}, s_{j+1}, s_j)
        let seed = [true, false, true, true, false];
        let input = [true, true, false];
        let out = toeplitz_hash(&seed, &input, 3).unwrap();
        assert_eq!(out, vec![true ^ false, true ^ true, false ^ true]);
    }

    #[test]
    fn is_linear() {
        let mut rng = stream_rng(4, 0);
        for _ in 0..100 {
            let seed: Vec<bool> = (0..27).map(|_| rng.random()).collect();
            let a = bits(rng.random::<u32>() & 0xffff, 16);
            let b = bits(rng.random::<u32>() & 0xffff, 16);
            let sum: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ha = toeplitz_hash(&seed, &a, 12).unwrap();
            let hb = toeplitz_hash(&seed, &b, 12).unwrap();
            let hs = toeplitz_hash(&seed, &sum, 12).unwrap();
            assert_eq!(hs, ha.iter().zip(&hb).map(|(x, y)| x ^ y).collect::<Vec<_>>());
        }
    }

    #[test]
    fn collision_rate_is_universal() {
        let trials = 100_000;
        let a = bits(0xbeef, 16);
        let b = bits(0x1234, 16);
        let mut rng = stream_rng(99, 0);
        let collisions = (0..trials)
            .filter(|_| {
                let seed: Vec<bool> = (0..23).map(|_| rng.random()).collect();
                toeplitz_hash(&seed, &a, 8).unwrap() == toeplitz_hash(&seed, &b, 8).unwrap()
            })
            .count();
        let p = 1.0 / 256.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((collisions as f64 / trials as f64) <= p + 3.0 * sigma);
    }
}
