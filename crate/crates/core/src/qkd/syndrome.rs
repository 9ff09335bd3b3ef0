//! Seeded random linear code used for information reconciliation.
//!
//! The input is split into chunks of at most `chunk_len` bits; syndrome row
//! `r` belongs to chunk `r mod chunks`. Decoding is brute force per chunk.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::stream_rng;

pub const MAX_CHUNK_LEN: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeCode {
    pub input_len: usize,
    pub chunk_len: usize,
    chunks: Vec<Chunk>,
    pub syndrome_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Chunk {
    offset: usize,
    len: usize,
    rows: Vec<usize>,
    masks: Vec<u32>,
}

impl SyndromeCode {
    pub fn new(input_len: usize, syndrome_len: usize, code_seed: u64, chunk_len: usize) -> Result<Self> {
        if chunk_len == 0 || chunk_len > MAX_CHUNK_LEN {
            return Err(Error::Capacity {
                what: "syndrome chunk length",
                requested: chunk_len as u128,
                limit: MAX_CHUNK_LEN as u128,
            });
        }
        if input_len == 0 && syndrome_len > 0 {
            return Err(Error::Shape("cannot take a syndrome of an empty string".into()));
        }
        let count = input_len.div_ceil(chunk_len);
        let mut chunks: Vec<Chunk> = (0..count)
            .map(|c| Chunk {
                offset: c * chunk_len,
                len: chunk_len.min(input_len - c * chunk_len),
                rows: Vec::new(),
                masks: Vec::new(),
            })
            .collect();
        let mut rng = stream_rng(code_seed, 0);
        for r in 0..syndrome_len {
            let chunk = &mut chunks[r % count];
            let full = if chunk.len == 32 {
                u32::MAX
            } else {
                (1u32 << chunk.len) - 1
            };
            chunk.rows.push(r);
            chunk.masks.push(rng.random::<u32>() & full);
        }
        Ok(Self {
            input_len,
            chunk_len,
            chunks,
            syndrome_len,
        })
    }

    pub fn encode(&self, x: &[bool]) -> Result<Vec<bool>> {
        self.check_len(x)?;
        let mut out = vec![false; self.syndrome_len];
        for chunk in &self.chunks {
            let word = pack(&x[chunk.offset..chunk.offset + chunk.len]);
            for (&r, &m) in chunk.rows.iter().zip(&chunk.masks) {
                out[r] = (word & m).count_ones() % 2 == 1;
            }
        }
        Ok(out)
    }

    /// Nearest string to `y` with the given syndrome, chunk by chunk; ties go
    /// to the lexicographically smallest candidate.
    pub fn decode(&self, y: &[bool], syndrome: &[bool]) -> Result<Vec<bool>> {
        self.check_len(y)?;
        if syndrome.len() != self.syndrome_len {
            return Err(Error::Shape(format!(
                "syndrome has {} bits, expected {}",
                syndrome.len(),
                self.syndrome_len
            )));
        }
        let mut out = y.to_vec();
        for chunk in &self.chunks {
            let word = pack(&y[chunk.offset..chunk.offset + chunk.len]);
            let target: Vec<bool> = chunk.rows.iter().map(|&r| syndrome[r]).collect();
            let fixed = decode_chunk(word, chunk.len, &chunk.masks, &target);
            out[chunk.offset..chunk.offset + chunk.len].copy_from_slice(&unpack(fixed, chunk.len));
        }
        Ok(out)
    }

    fn check_len(&self, x: &[bool]) -> Result<()> {
        if x.len() != self.input_len {
            return Err(Error::Shape(format!(
                "input has {} bits, code expects {}",
                x.len(),
                self.input_len
            )));
        }
        Ok(())
    }
}

fn pack(bits: &[bool]) -> u32 {
    bits.iter().enumerate().fold(0, |w, (i, &b)| w | ((b as u32) << i))
}

fn unpack(word: u32, len: usize) -> Vec<bool> {
    (0..len).map(|i| (word >> i) & 1 == 1).collect()
}

/// Sort key placing bit 0 first, so integer order is string order.
fn lex_key(word: u32, len: usize) -> u32 {
    if len == 0 {
        0
    } else {
        word.reverse_bits() >> (32 - len)
    }
}

fn consistent(word: u32, masks: &[u32], target: &[bool]) -> bool {
    masks
        .iter()
        .zip(target)
        .all(|(&m, &t)| ((word & m).count_ones() % 2 == 1) == t)
}

fn decode_chunk(word: u32, len: usize, masks: &[u32], target: &[bool]) -> u32 {
    for weight in 0..=len as u32 {
        let mut best: Option<u32> = None;
        for e in patterns(len, weight) {
            let cand = word ^ e;
            if consistent(cand, masks, target) && best.is_none_or(|b| lex_key(cand, len) < lex_key(b, len)) {
                best = Some(cand);
            }
        }
        if let Some(b) = best {
            return b;
        }
    }
    // syndrome not in the code's range: keep the received word
    word
}

/// All `len`-bit words of the given weight (Gosper's hack).
fn patterns(len: usize, weight: u32) -> impl Iterator<Item = u32> {
    let limit = 1u64 << len;
    let first = if weight == 0 { 0u64 } else { (1u64 << weight) - 1 };
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur as u32)
    })
}

pub fn syndrome_encode(x: &[bool], s: usize, code_seed: u64) -> Result<Vec<bool>> {
    SyndromeCode::new(x.len(), s, code_seed, MAX_CHUNK_LEN)?.encode(x)
}

pub fn syndrome_decode(y: &[bool], syndrome: &[bool], code_seed: u64) -> Result<Vec<bool>> {
    SyndromeCode::new(y.len(), syndrome.len(), code_seed, MAX_CHUNK_LEN)?.decode(y, syndrome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::stream_rng;

    fn random_bits(len: usize, rng: &mut impl Rng) -> Vec<bool> {
        (0..len).map(|_| rng.random()).collect()
    }

    #[test]
    fn pattern_enumeration_counts() {
        assert_eq!(patterns(5, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(patterns(5, 2).count(), 10);
        assert_eq!(patterns(20, 3).count(), 1140);
        assert!(patterns(6, 3).all(|p| p.count_ones() == 3 && p < 64));
    }

    #[test]
    fn unchanged_word_decodes_to_itself() {
        let mut rng = stream_rng(2, 0);
        for len in [1, 7, 20, 33, 64] {
            let x = random_bits(len, &mut rng);
            let syn = syndrome_encode(&x, len / 2, 17).unwrap();
            assert_eq!(syndrome_decode(&x, &syn, 17).unwrap(), x);
        }
    }

    #[test]
    fn empty_syndrome_returns_input() {
        let y = vec![true, false, true, true];
        assert_eq!(syndrome_decode(&y, &[], 5).unwrap(), y);
    }

    #[test]
    fn single_flip_is_corrected_when_detectable() {
        // compare with exhaustive search over all words of the chunk
        let mut rng = stream_rng(3, 0);
        let len = 12;
        let code = SyndromeCode::new(len, 8, 21, MAX_CHUNK_LEN).unwrap();
        for _ in 0..50 {
            let x = random_bits(len, &mut rng);
            let syn = code.encode(&x).unwrap();
            let flip = rng.random_range(0..len);
            let mut y = x.clone();
            y[flip] = !y[flip];
            let decoded = code.decode(&y, &syn).unwrap();
            let oracle = (0u32..1 << len)
                .map(|w| unpack(w, len))
                .filter(|c| code.encode(c).unwrap() == syn)
                .min_by(|a, b| {
                    let da = a.iter().zip(&y).filter(|(p, q)| p != q).count();
                    let db = b.iter().zip(&y).filter(|(p, q)| p != q).count();
                    da.cmp(&db).then_with(|| a.cmp(b))
                })
                .unwrap();
            assert_eq!(decoded, oracle);
            let detectable = code.encode(&y).unwrap() != syn;
            let others_consistent = (0..len).filter(|&j| j != flip).any(|j| {
                let mut z = y.clone();
                z[j] = !z[j];
                code.encode(&z).unwrap() == syn
            });
            if detectable && !others_consistent {
                assert_eq!(decoded, x);
            }
        }
    }

    #[test]
    fn chunking_and_capacity() {
        assert!(SyndromeCode::new(10, 4, 0, 21).is_err());
        assert!(SyndromeCode::new(10, 4, 0, 0).is_err());
        let code = SyndromeCode::new(45, 9, 0, MAX_CHUNK_LEN).unwrap();
        assert_eq!(code.chunks.len(), 3);
        assert_eq!(code.chunks[2].len, 5);
        assert_eq!(code.chunks.iter().map(|c| c.rows.len()).sum::<usize>(), 9);
        assert!(code.encode(&[false; 44]).is_err());
    }
}
