use std::fmt;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Chunk length `k` and slack `eps` of a balanced code whose radix is
/// `2^(k/(1+eps))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FriendlyPair {
    pub k: usize,
    pub eps: Ratio<u64>,
}

impl FriendlyPair {
    pub fn new(k: usize, eps: Ratio<u64>) -> Result<FriendlyPair> {
        let p = FriendlyPair { k, eps };
        if k == 0 || k % 2 == 1 || eps <= Ratio::from_integer(0) {
            return Err(Error::Invalid(format!("bad pair k={k} eps={eps}")));
        }
        if !(Ratio::from_integer(k as u64) / (Ratio::one() + eps)).is_integer() {
            return Err(Error::Invalid(format!("k/(1+eps) not an integer for {p}")));
        }
        if !p.has_enough_words() {
            return Err(Error::Invalid(format!("too few balanced words for {p}")));
        }
        Ok(p)
    }

    /// `k/(1+eps)`, the number of bits carried by one chunk.
    pub fn radix_bits(&self) -> u32 {
        let r = Ratio::from_integer(self.k as u64) / (Ratio::one() + self.eps);
        r.to_integer() as u32
    }

    pub fn radix(&self) -> u64 {
        1u64 << self.radix_bits()
    }

    pub fn has_enough_words(&self) -> bool {
        let words: BigUint = binomial(BigUint::from(self.k), BigUint::from(self.k / 2));
        words >= BigUint::one() << self.radix_bits()
    }

    pub fn log_condition(&self, c: f64) -> bool {
        c.log2() * (1.0 + self.eps.to_f64().unwrap_or(f64::INFINITY)) < 1.0
    }

    pub fn is_friendly(&self, c: f64) -> bool {
        self.log_condition(c) && self.has_enough_words()
    }
}

impl fmt::Display for FriendlyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, eps={})", self.k, self.eps)
    }
}

/// `1, 1/2, 1/3, 2/3, 1/4, 3/4, ...` up to denominator `max_den`.
pub fn eps_ladder(max_den: u64) -> Vec<Ratio<u64>> {
    let mut out = vec![Ratio::one()];
    for q in 2..=max_den {
        for p in 1..q {
            if num_integer::gcd(p, q) == 1 {
                out.push(Ratio::new(p, q));
            }
        }
    }
    out
}

const MAX_K: usize = 120;

/// Smallest `k` admitting a friendly pair for `c`; ties go to the first
/// `eps` on the ladder.
pub fn find_friendly_pair(c: f64) -> Result<FriendlyPair> {
    if !(c > 1.0 && c < 2.0) {
        return Err(Error::Invalid(format!("c = {c} outside (1, 2)")));
    }
    for k in (2..=MAX_K).step_by(2) {
        // (p+q) must divide k*q with gcd(p,q)=1, so p+q divides k
        for eps in eps_ladder(k as u64) {
            let p = FriendlyPair { k, eps };
            let bits = Ratio::from_integer(k as u64) / (Ratio::one() + eps);
            if bits.is_integer() && bits.to_integer() <= 62 && p.is_friendly(c) {
                return Ok(p);
            }
        }
    }
    Err(Error::Infeasible(format!("no friendly pair with k <= {MAX_K} for c = {c}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_pairs() {
        assert_eq!(
            find_friendly_pair(1.3).unwrap(),
            FriendlyPair { k: 2, eps: Ratio::one() }
        );
        let p = find_friendly_pair(1.5).unwrap();
        assert_eq!((p.k, p.eps), (6, Ratio::new(1, 2)));
        assert_eq!(p.radix(), 16);
    }

    #[test]
    fn ladder_order() {
        let l = eps_ladder(4);
        let want = [(1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)];
        assert_eq!(l, want.iter().map(|&(p, q)| Ratio::new(p, q)).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(find_friendly_pair(1.0).is_err());
        assert!(find_friendly_pair(2.0).is_err());
        assert!(FriendlyPair::new(3, Ratio::one()).is_err());
    }

    proptest! {
        #[test]
        fn found_pairs_satisfy_all_conditions(c in 1.01f64..1.9) {
            let p = find_friendly_pair(c).unwrap();
            prop_assert!(p.k.is_multiple_of(2));
            prop_assert!(p.log_condition(c));
            let bits = p.radix_bits();
            prop_assert_eq!(Ratio::from_integer(bits as u64) * (Ratio::one() + p.eps), Ratio::from_integer(p.k as u64));
            // C(k, k/2) computed by a running product as an independent check
            let mut words = 1f64;
            for i in 0..p.k / 2 {
                words = words * (p.k - i) as f64 / (i + 1) as f64;
            }
            prop_assert!(words + 0.5 >= 2f64.powi(bits as i32));
            prop_assert!(FriendlyPair::new(p.k, p.eps).is_ok());
        }
    }
}
