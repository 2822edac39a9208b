use serde::Serialize;

use crate::error::{Error, Result};

/// Some chunk is all zeros and some chunk is all ones.
pub fn is_crude(v: &[bool], k: usize, chunks: usize) -> Result<bool> {
    if k == 0 || v.len() != k * chunks {
        return Err(Error::Width {
            expected: k * chunks,
            got: v.len(),
        });
    }
    let zero = v.chunks(k).any(|c| c.iter().all(|&b| !b));
    let one = v.chunks(k).any(|c| c.iter().all(|&b| b));
    Ok(zero && one)
}

/// Probability that a uniform block of `chunks` chunks of `k` bits is crude.
pub fn crude_block_prob(k: usize, chunks: usize) -> f64 {
    let l = chunks as i32;
    let p_mono = 0.5f64.powi(k as i32);
    // no all-zero chunk, no all-one chunk, neither
    1.0 - 2.0 * (1.0 - p_mono).powi(l) + (1.0 - 2.0 * p_mono).powi(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrudeStats {
    pub exact_block_prob: f64,
    /// Union bound `2 beta log2(n) (1 - 2^-k)^l` on the chance that some
    /// of the `beta log2(n)` blocks is not crude.
    pub paper_bound_complement: f64,
}

pub fn crude_stats(k: usize, chunks: usize, beta: f64, n: u64) -> CrudeStats {
    let per_block = 2.0 * (1.0 - 0.5f64.powi(k as i32)).powi(chunks as i32);
    CrudeStats {
        exact_block_prob: crude_block_prob(k, chunks),
        paper_bound_complement: beta * (n as f64).log2() * per_block,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &[u8]) -> Vec<bool> {
        s.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn crude_examples() {
        assert!(is_crude(&bits(&[0, 0, 1, 1]), 2, 2).unwrap());
        assert!(!is_crude(&bits(&[0, 1, 0, 1]), 2, 2).unwrap());
        assert!(!is_crude(&bits(&[0, 0, 0, 0]), 2, 2).unwrap());
        assert!(is_crude(&bits(&[0, 0, 1]), 2, 2).is_err());
    }

    #[test]
    fn exact_probability_matches_enumeration() {
        for (k, l) in [(2, 1), (2, 3), (2, 4), (3, 3), (4, 2), (2, 7)] {
            let w = k * l;
            let hits = (0..1u64 << w)
                .filter(|x| {
                    let v: Vec<bool> = (0..w).map(|j| x >> j & 1 == 1).collect();
                    is_crude(&v, k, l).unwrap()
                })
                .count();
            let want = hits as f64 / (1u64 << w) as f64;
            assert!((crude_block_prob(k, l) - want).abs() < 1e-12, "k={k} l={l}");
        }
        assert_eq!(crude_block_prob(2, 4), 0.4296875);
        assert_eq!(crude_block_prob(2, 3), 0.28125);
    }

    #[test]
    fn paper_bound_dominates() {
        let s = crude_stats(2, 4, 1.0, 2);
        assert_eq!(s.paper_bound_complement, 0.6328125);
        assert!(1.0 - s.exact_block_prob <= s.paper_bound_complement);
        let mut last = 0.0;
        for l in 1..=20 {
            let p = crude_block_prob(2, l);
            assert!(p >= last);
            last = p;
        }
        assert!(last > 0.99);
    }
}
