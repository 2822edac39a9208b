use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::friendly::FriendlyPair;
use crate::error::{Error, Result};
use crate::netcore::{bits_of, word_of};

/// All `k`-bit vectors with `k/2` ones, in lexicographic order of their
/// coordinate tuples. A vector is packed with coordinate `j` at bit `j`.
pub fn balanced_vectors(k: usize) -> Result<Vec<u64>> {
    if k % 2 == 1 || k > 30 {
        return Err(Error::Invalid(format!("balanced vectors need even k <= 30, got {k}")));
    }
    let mut v: Vec<Vec<bool>> = (0..1u64 << k)
        .filter(|x| x.count_ones() as usize == k / 2)
        .map(|x| bits_of(x, k))
        .collect();
    v.sort();
    Ok(v.iter().map(|b| word_of(b)).collect())
}

/// Integers written as `chunks` base-`K` digits, least significant first,
/// each digit mapped to a balanced `k`-bit word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeBook {
    pub pair: FriendlyPair,
    pub radix: u64,
    pub chunks: usize,
    alphabet: Vec<u64>,
    index: HashMap<u64, u64>,
}

pub fn make_codebook(pair: FriendlyPair, chunks: usize) -> Result<CodeBook> {
    if chunks == 0 {
        return Err(Error::Invalid("a codebook needs at least one chunk".into()));
    }
    let radix = pair.radix();
    let all = balanced_vectors(pair.k)?;
    assert!(all.len() as u64 >= radix, "friendly pair has enough words");
    let alphabet: Vec<u64> = all[..radix as usize].to_vec();
    let index = alphabet.iter().enumerate().map(|(i, &w)| (w, i as u64)).collect();
    Ok(CodeBook {
        pair,
        radix,
        chunks,
        alphabet,
        index,
    })
}

/// All `n = K^l` (`l >= 1`) inside `range`.
pub fn suitable_n(pair: FriendlyPair, range: RangeInclusive<u64>) -> Vec<u64> {
    let k = pair.radix();
    let mut out = Vec::new();
    let mut n = k;
    while n <= *range.end() {
        if range.contains(&n) {
            out.push(n);
        }
        match n.checked_mul(k) {
            Some(m) if k > 1 => n = m,
            _ => break,
        }
    }
    out
}

impl CodeBook {
    pub fn k(&self) -> usize {
        self.pair.k
    }

    pub fn width(&self) -> usize {
        self.pair.k * self.chunks
    }

    pub fn alphabet(&self) -> &[u64] {
        &self.alphabet
    }

    /// Digit `d` as a packed chunk.
    pub fn word(&self, d: u64) -> u64 {
        self.alphabet[d as usize]
    }

    pub fn digit(&self, chunk: u64) -> Option<u64> {
        self.index.get(&chunk).copied()
    }

    /// `K^chunks`, the number of encodable values.
    pub fn capacity(&self) -> Option<u64> {
        self.radix.checked_pow(self.chunks as u32)
    }

    pub fn encode(&self, value: u64) -> Result<Vec<bool>> {
        if self.capacity().is_some_and(|n| value >= n) {
            return Err(Error::Invalid(format!(
                "value {value} does not fit in {} chunks of radix {}",
                self.chunks, self.radix
            )));
        }
        let mut v = Vec::with_capacity(self.width());
        let mut rest = value;
        for _ in 0..self.chunks {
            v.extend(bits_of(self.word(rest % self.radix), self.k()));
            rest /= self.radix;
        }
        Ok(v)
    }

    /// The value, if every chunk is a code word.
    pub fn decode(&self, v: &[bool]) -> Option<u64> {
        if v.len() != self.width() {
            return None;
        }
        let mut value = 0u64;
        for c in v.chunks(self.k()).rev() {
            value = value.checked_mul(self.radix)? + self.digit(word_of(c))?;
        }
        Some(value)
    }

    pub fn to_file(&self) -> CodeBookFile {
        CodeBookFile {
            k: self.pair.k,
            eps: format!("{}/{}", self.pair.eps.numer(), self.pair.eps.denom()),
            radix: self.radix,
            chunks: self.chunks,
            alphabet: self
                .alphabet
                .iter()
                .map(|&w| bits_of(w, self.k()).iter().map(|&b| if b { '1' } else { '0' }).collect())
                .collect(),
        }
    }

    pub fn from_file(f: &CodeBookFile) -> Result<CodeBook> {
        let (p, q) = f
            .eps
            .split_once('/')
            .and_then(|(p, q)| Some((p.trim().parse().ok()?, q.trim().parse().ok()?)))
            .ok_or_else(|| Error::Parse(format!("eps {:?} is not p/q", f.eps)))?;
        if q == 0 {
            return Err(Error::Parse("eps denominator is zero".into()));
        }
        let cb = make_codebook(FriendlyPair::new(f.k, Ratio::new(p, q))?, f.chunks)?;
        if cb.to_file() != *f {
            return Err(Error::Parse("alphabet or radix does not match the pair".into()));
        }
        Ok(cb)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("codebook serializes")
    }

    pub fn from_json(s: &str) -> Result<CodeBook> {
        CodeBook::from_file(&serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBookFile {
    pub k: usize,
    pub eps: String,
    #[serde(rename = "K")]
    pub radix: u64,
    pub chunks: usize,
    pub alphabet: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{find_friendly_pair, is_crude};
    use num_traits::One;
    use proptest::prelude::*;

    fn k2() -> FriendlyPair {
        FriendlyPair { k: 2, eps: Ratio::one() }
    }

    fn bits(s: &[u8]) -> Vec<bool> {
        s.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn balanced_examples() {
        let v = balanced_vectors(2).unwrap();
        assert_eq!(v.iter().map(|&w| bits_of(w, 2)).collect::<Vec<_>>(), vec![
            bits(&[0, 1]),
            bits(&[1, 0])
        ]);
        assert_eq!(balanced_vectors(4).unwrap().len(), 6);
        assert_eq!(balanced_vectors(10).unwrap().len(), 252);
        assert!(balanced_vectors(3).is_err());
        let v = balanced_vectors(6).unwrap();
        for &a in &v {
            for &b in &v {
                assert!(a == b || (a & !b != 0 && b & !a != 0));
            }
        }
    }

    #[test]
    fn codebook_examples() {
        let cb = make_codebook(k2(), 4).unwrap();
        assert_eq!((cb.radix, cb.capacity()), (2, Some(16)));
        assert_eq!(cb.digit(word_of(&bits(&[0, 1]))), Some(0));
        assert_eq!(cb.digit(word_of(&bits(&[1, 0]))), Some(1));
        assert_eq!(cb.encode(5).unwrap(), bits(&[1, 0, 0, 1, 1, 0, 0, 1]));
        assert_eq!(cb.decode(&bits(&[0, 0, 0, 1, 0, 1, 0, 1])), None);
        assert!(cb.encode(16).is_err());
        assert_eq!(suitable_n(k2(), 1..=64), vec![2, 4, 8, 16, 32, 64]);
        let p = find_friendly_pair(1.5).unwrap();
        assert_eq!(suitable_n(p, 1..=5000), vec![16, 256, 4096]);
    }

    #[test]
    fn json_round_trip() {
        let cb = make_codebook(find_friendly_pair(1.5).unwrap(), 3).unwrap();
        let s = cb.to_json();
        assert!(s.contains("\"K\": 16"));
        assert!(s.contains("\"eps\": \"1/2\""));
        assert_eq!(CodeBook::from_json(&s).unwrap(), cb);
    }

    #[test]
    fn codes_and_crude_vectors_are_incomparable() {
        for (pair, chunks) in [(k2(), 8), (FriendlyPair { k: 4, eps: Ratio::one() }, 4)] {
            let cb = make_codebook(pair, chunks).unwrap();
            let w = cb.width();
            assert!(w <= 16);
            let codes: Vec<u64> = (0..cb.capacity().unwrap())
                .map(|v| word_of(&cb.encode(v).unwrap()))
                .collect();
            for &a in &codes {
                for &b in &codes {
                    assert!(a == b || (a & !b != 0 && b & !a != 0));
                }
            }
            for x in 0..1u64 << w {
                let v = bits_of(x, w);
                let crude = is_crude(&v, pair.k, chunks).unwrap();
                assert!(!(crude && cb.decode(&v).is_some()));
                if crude {
                    for &c in &codes {
                        assert!(x & !c != 0 && c & !x != 0);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(chunks in 1usize..6, v in any::<u64>()) {
            let cb = make_codebook(find_friendly_pair(1.5).unwrap(), chunks).unwrap();
            let v = v % cb.capacity().unwrap();
            let e = cb.encode(v).unwrap();
            prop_assert_eq!(e.iter().filter(|&&b| b).count(), 3 * chunks);
            prop_assert_eq!(cb.decode(&e), Some(v));
        }
    }
}
