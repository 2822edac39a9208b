use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `LCM(n, n-1, ..., n-k)` and the lower bound `(n-k)^k / k!`, floored.
pub fn lcm_bounds(n: u64, k: u64) -> Result<(BigUint, BigUint)> {
    if k >= n {
        return Err(Error::Invalid(format!("need k < n, got k = {k}, n = {n}")));
    }
    let exact = lcm_range(n - k..=n);
    let mut num = BigUint::one();
    let mut fact = BigUint::one();
    for i in 1..=k {
        num *= n - k;
        fact *= i;
    }
    Ok((exact, num / fact))
}

pub fn lcm_range(r: impl IntoIterator<Item = u64>) -> BigUint {
    r.into_iter().fold(BigUint::one(), |acc, x| acc.lcm(&BigUint::from(x.max(1))))
}

/// Slot `s` counts modulo `n - s` for each engaged slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArithmeticModel {
    pub n: u64,
    pub moduli: Vec<u64>,
}

impl ArithmeticModel {
    pub fn new(n: u64, engaged: usize) -> Result<ArithmeticModel> {
        if engaged as u64 > n {
            return Err(Error::Infeasible(format!("{engaged} engaged slots need n >= {engaged}")));
        }
        Ok(ArithmeticModel {
            n,
            moduli: (0..engaged as u64).map(|s| n - s).collect(),
        })
    }

    /// One macro-step: every slot advances by one in its own modulus.
    pub fn step(&self, v: &[u64]) -> Vec<u64> {
        v.iter().zip(&self.moduli).map(|(&x, &m)| (x + 1) % m).collect()
    }

    pub fn after(&self, v: &[u64], steps: u64) -> Vec<u64> {
        v.iter()
            .zip(&self.moduli)
            .map(|(&x, &m)| ((x % m) + steps % m) % m)
            .collect()
    }

    /// Period in macro-steps.
    pub fn period(&self) -> BigUint {
        lcm_range(self.moduli.iter().copied())
    }
}

/// `|I| * LCM{n - s : s engaged}`, in network steps.
pub fn predicted_period(n: u64, tape_len: usize, engaged: usize) -> Result<BigUint> {
    Ok(ArithmeticModel::new(n, engaged)?.period() * BigUint::from(tape_len))
}

/// `LCM(n, ..., n - |I| + 1) / n^{|Q|}`, the floor the period must clear.
pub fn period_floor(n: u64, tape_len: usize, q_len: usize) -> BigUint {
    let hi = n;
    let lo = n.saturating_sub(tape_len as u64 - 1).max(1);
    lcm_range(lo..=hi) / BigUint::from(n).pow(q_len as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_lcm(xs: &[u64]) -> u128 {
        fn gcd(a: u128, b: u128) -> u128 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        xs.iter().fold(1u128, |a, &x| a / gcd(a, x as u128) * x as u128)
    }

    #[test]
    fn sixteen_four() {
        let (e, b) = lcm_bounds(16, 4).unwrap();
        assert_eq!(e, BigUint::from(21840u32));
        assert_eq!(b, BigUint::from(864u32));
    }

    #[test]
    fn bound_holds_up_to_200() {
        for n in 2..=200u64 {
            for k in 1..n {
                let (e, b) = lcm_bounds(n, k).unwrap();
                assert!(e >= b, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn model_period_is_brute_force_cycle() {
        let m = ArithmeticModel::new(8, 2).unwrap();
        assert_eq!(m.period(), BigUint::from(56u32));
        let start = vec![3, 5];
        let mut v = start.clone();
        let mut t = 0u64;
        loop {
            v = m.step(&v);
            t += 1;
            if v == start {
                break;
            }
        }
        assert_eq!(t, 56);
        assert_eq!(predicted_period(8, 21, 2).unwrap(), BigUint::from(56u32 * 21));
    }

    proptest! {
        #[test]
        fn lcm_matches_u128(n in 2u64..40, k in 1u64..12) {
            prop_assume!(k < n);
            let xs: Vec<u64> = (n - k..=n).collect();
            let (e, _) = lcm_bounds(n, k).unwrap();
            prop_assert_eq!(e, BigUint::from(brute_lcm(&xs)));
        }

        #[test]
        fn after_is_iterated_step(v0 in 0u64..16, v1 in 0u64..15, steps in 0u64..200) {
            let m = ArithmeticModel::new(16, 2).unwrap();
            let mut v = vec![v0, v1];
            for _ in 0..steps { v = m.step(&v); }
            prop_assert_eq!(m.after(&[v0, v1], steps), v);
        }
    }
}
