use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A bit-packed network state; bit `i` lives in word `i / 64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    n: usize,
    words: Vec<u64>,
}

impl State {
    pub fn zeros(n: usize) -> State {
        State {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn ones(n: usize) -> State {
        let mut s = State {
            n,
            words: vec![!0; n.div_ceil(64)],
        };
        s.mask_tail();
        s
    }

    pub fn from_bits(bits: &[bool]) -> State {
        let mut s = State::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    pub fn from_words(n: usize, words: Vec<u64>) -> Result<State> {
        if words.len() != n.div_ceil(64) {
            return Err(Error::Width {
                expected: n.div_ceil(64),
                got: words.len(),
            });
        }
        let mut s = State { n, words };
        s.mask_tail();
        Ok(s)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> State {
        let mut s = State::zeros(n);
        for w in s.words.iter_mut() {
            *w = rng.gen();
        }
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let r = self.n % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i & 63);
        if v {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.get(i)).collect()
    }

    pub fn project(&self, idx: &[usize]) -> Vec<bool> {
        idx.iter().map(|&i| self.get(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Coordinatewise order: every 1 of `self` is a 1 of `other`.
    pub fn le(&self, other: &State) -> bool {
        self.n == other.n
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// Hex digits, least significant nibble first: digit `j` holds bits
    /// `4j..4j+4` with bit `4j` as its low bit.
    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.bits())
    }

    pub fn from_hex(n: usize, s: &str) -> Result<State> {
        let bits = hex_to_bits(s, n)?;
        Ok(State::from_bits(&bits))
    }

    /// Stable 128-bit digest of the packed words.
    pub fn digest(&self) -> u128 {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for w in &self.words {
            h.update(w.to_le_bytes());
        }
        let out = h.finalize();
        let mut b = [0u8; 16];
        b.copy_from_slice(&out[..16]);
        u128::from_le_bytes(b)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 64 {
            let s: String = (0..self.n)
                .map(|i| if self.get(i) { '1' } else { '0' })
                .collect();
            write!(f, "State({s})")
        } else {
            write!(f, "State[{}]({})", self.n, self.to_hex())
        }
    }
}

pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c
                .iter()
                .enumerate()
                .fold(0u32, |acc, (j, &b)| acc | (u32::from(b) << j));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

pub fn hex_to_bits(s: &str, n: usize) -> Result<Vec<bool>> {
    let s = s.trim();
    if s.len() != n.div_ceil(4) {
        return Err(Error::Parse(format!(
            "hex state of {n} bits needs {} digits, got {}",
            n.div_ceil(4),
            s.len()
        )));
    }
    let mut bits = Vec::with_capacity(n);
    for c in s.chars() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))?;
        for j in 0..4 {
            if bits.len() < n {
                bits.push((v >> j) & 1 == 1);
            } else if (v >> j) & 1 == 1 {
                return Err(Error::Parse("bits set past the state length".into()));
            }
        }
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let s = State::from_bits(&[true, false, true, true, false, true]);
        assert_eq!(s.to_hex(), "d2");
        assert_eq!(State::from_hex(6, "d2").unwrap(), s);
        assert!(State::from_hex(6, "f4").is_err());
    }

    #[test]
    fn order_and_digest() {
        let a = State::from_bits(&[true, false, false]);
        let b = State::from_bits(&[true, true, false]);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert_ne!(a.digest(), b.digest());
        assert_eq!(State::ones(70).count_ones(), 70);
    }
}
