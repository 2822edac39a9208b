use serde::{Deserialize, Serialize};

use crate::coding::CodeBook;
use crate::error::{Error, Result};
use crate::netcore::bits_of;

/// One value of the counter sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleEntry {
    /// Increment modulo `n - i`. With `enable` off the reset never fires
    /// and the increment is plain `mod n`; only `i = 0` uses that.
    Code { i: u64, enable: bool },
    /// Leave the slot alone.
    CrudeMarker,
}

/// Width of a counter word: `m` data chunks plus one enable chunk.
pub fn r_width(cb: &CodeBook, m: usize) -> usize {
    cb.k() * (m + 1)
}

/// The coding vector written into repaired slots: the code of 0.
pub fn x_star(cb: &CodeBook) -> Vec<bool> {
    cb.encode(0).expect("0 is always encodable")
}

/// Fixed crude counter word: an all-zero chunk, an all-one chunk, then
/// alternating digit-0 and digit-1 chunks.
pub fn r_crude(cb: &CodeBook, m: usize) -> Vec<bool> {
    let k = cb.k();
    let mut v = vec![false; k];
    v.extend(vec![true; k]);
    for j in 2..=m {
        v.extend(bits_of(cb.word((j % 2) as u64), k));
    }
    v
}

/// Bits of a counter word. Data chunks hold `K^m - i` in base `K`.
pub fn entry_bits(cb: &CodeBook, m: usize, e: &ScheduleEntry) -> Result<Vec<bool>> {
    match *e {
        ScheduleEntry::CrudeMarker => Ok(r_crude(cb, m)),
        ScheduleEntry::Code { i, enable } => {
            let span = cb
                .radix
                .checked_pow(m as u32)
                .ok_or_else(|| Error::Invalid("K^m overflows".into()))?;
            if i > span || (enable == (i == 0)) {
                return Err(Error::Invalid(format!(
                    "entry i={i} enable={enable} not representable with K^m = {span}"
                )));
            }
            let mut rest = (span - i) % span;
            let mut v = Vec::with_capacity(r_width(cb, m));
            for _ in 0..m {
                v.extend(bits_of(cb.word(rest % cb.radix), cb.k()));
                rest /= cb.radix;
            }
            v.extend(bits_of(cb.word(u64::from(enable)), cb.k()));
            Ok(v)
        }
    }
}

/// Reference increment: `V(x)+1 mod n`, reset to 0 when it equals `n-i`;
/// a crude marker passes `x` through.
pub fn oracle_increment(cb: &CodeBook, x: &[bool], r: &ScheduleEntry) -> Result<Vec<bool>> {
    let v = cb
        .decode(x)
        .ok_or_else(|| Error::Invalid("increment input is not a coding vector".into()))?;
    let n = cb.capacity().ok_or_else(|| Error::Invalid("n overflows".into()))?;
    let next = (v + 1) % n;
    match *r {
        ScheduleEntry::CrudeMarker => Ok(x.to_vec()),
        ScheduleEntry::Code { i, enable } => {
            if enable && v + 1 == n - i.min(n) {
                cb.encode(0)
            } else {
                cb.encode(next)
            }
        }
    }
}

/// The normalizer formula on any `z = X || R`: bit `i` of the result is
/// `z_i OR ONE` where `x*_i = 1` and `z_i AND ZERO` elsewhere; `ONE` says
/// some chunk is all ones, `ZERO` that no chunk is all zeros.
pub fn oracle_normalize(cb: &CodeBook, z: &[bool], x_star: &[bool]) -> Result<Vec<bool>> {
    let k = cb.k();
    if !z.len().is_multiple_of(k) || z.len() < x_star.len() {
        return Err(Error::Width {
            expected: x_star.len(),
            got: z.len(),
        });
    }
    let one = z.chunks(k).any(|c| c.iter().all(|&b| b));
    let zero = z.chunks(k).all(|c| c.iter().any(|&b| b));
    Ok(x_star
        .iter()
        .zip(z)
        .map(|(&s, &zi)| if s { zi || one } else { zi && zero })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{is_crude, make_codebook, FriendlyPair};
    use crate::netcore::word_of;
    use num_rational::Ratio;

    fn cb(chunks: usize) -> CodeBook {
        make_codebook(FriendlyPair { k: 2, eps: Ratio::from_integer(1) }, chunks).unwrap()
    }

    #[test]
    fn increment_examples() {
        let cb = cb(4);
        let on = |i| ScheduleEntry::Code { i, enable: true };
        let code = |v| cb.encode(v).unwrap();
        assert_eq!(oracle_increment(&cb, &code(5), &on(3)).unwrap(), code(6));
        assert_eq!(oracle_increment(&cb, &code(12), &on(3)).unwrap(), code(0));
        let off = ScheduleEntry::Code { i: 0, enable: false };
        assert_eq!(oracle_increment(&cb, &code(15), &off).unwrap(), code(0));
        let marker = ScheduleEntry::CrudeMarker;
        assert_eq!(oracle_increment(&cb, &code(9), &marker).unwrap(), code(9));
    }

    #[test]
    fn entry_encoding() {
        let cb = cb(4);
        let bits = entry_bits(&cb, 2, &ScheduleEntry::Code { i: 1, enable: true }).unwrap();
        // data digits of 3 = (1, 1), enable digit 1
        let digits: Vec<u64> = bits.chunks(2).map(|c| cb.digit(word_of(c)).unwrap()).collect();
        assert_eq!(digits, vec![1, 1, 1]);
        let off = entry_bits(&cb, 2, &ScheduleEntry::Code { i: 0, enable: false }).unwrap();
        assert_eq!(cb.digit(word_of(&off[4..])), Some(0));
        assert!(entry_bits(&cb, 2, &ScheduleEntry::Code { i: 0, enable: true }).is_err());
        assert!(entry_bits(&cb, 2, &ScheduleEntry::Code { i: 5, enable: true }).is_err());
        let crude = r_crude(&cb, 2);
        assert!(is_crude(&crude, 2, 3).unwrap());
        assert_eq!(crude.iter().filter(|&&b| b).count(), 3);
    }

    #[test]
    fn normalize_clauses() {
        let cb = cb(3);
        let xs = x_star(&cb);
        let mut z = cb.encode(7).unwrap();
        z.extend(entry_bits(&cb, 2, &ScheduleEntry::Code { i: 3, enable: true }).unwrap());
        assert_eq!(oracle_normalize(&cb, &z, &xs).unwrap(), cb.encode(7).unwrap());
        let mut z = cb.encode(7).unwrap();
        z.extend(r_crude(&cb, 2));
        assert_eq!(oracle_normalize(&cb, &z, &xs).unwrap(), xs);
        let z = vec![true, true, false, false, true, false, false, true, true, false, false, true];
        assert_eq!(oracle_normalize(&cb, &z, &xs).unwrap(), xs);
    }
}
