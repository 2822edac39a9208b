use crate::circuitkit::{dnf_synthesize, monotone_extension, Circuit, PartialTable};
use crate::coding::CodeBook;
use crate::error::Result;

/// Dual-rail flag: `(1,0)` for true, `(0,1)` for false.
pub(crate) fn rail(v: bool) -> u64 {
    if v {
        0b01
    } else {
        0b10
    }
}

/// Per-chunk circuits shared by the increment gadget. Each comes from a
/// partial table on an antichain, extended monotonically and synthesized
/// as a DNF.
#[derive(Clone, Debug)]
pub struct ChunkKit {
    /// chunk -> rail(chunk is the top digit)
    pub top: Circuit,
    /// chunk -> chunk + 1 mod K
    pub inc: Circuit,
    /// (chunk, carry rail) -> chunk + carry mod K
    pub add_carry: Circuit,
    /// (chunk, chunk) -> rail(equal)
    pub equal: Circuit,
    /// enable chunk -> rail(enabled)
    pub enable: Circuit,
    /// (x, y, reset rail, crude rail) -> x if crude, digit 0 on reset, else y
    pub select: Circuit,
}

fn synth(t: &PartialTable) -> Result<Circuit> {
    Ok(dnf_synthesize(&monotone_extension(t)?)?.0)
}

impl ChunkKit {
    pub fn new(cb: &CodeBook) -> Result<ChunkKit> {
        let k = cb.k();
        let kr = cb.radix;
        let words: Vec<u64> = cb.alphabet().to_vec();
        let next = |w: u64| cb.word((cb.digit(w).expect("code word") + 1) % kr);

        let mut top = PartialTable::new(k, 2);
        let mut inc = PartialTable::new(k, k);
        let mut add_carry = PartialTable::new(k + 2, k);
        let mut equal = PartialTable::new(2 * k, 2);
        let mut enable = PartialTable::new(k, 2);
        let mut select = PartialTable::new(2 * k + 4, k);
        for &x in &words {
            top.insert(x, rail(cb.digit(x) == Some(kr - 1)))?;
            inc.insert(x, next(x))?;
            add_carry.insert(x | rail(true) << k, next(x))?;
            add_carry.insert(x | rail(false) << k, x)?;
            for &y in &words {
                equal.insert(x | y << k, rail(x == y))?;
                let base = x | y << k;
                let (reset, crude) = (2 * k, 2 * k + 2);
                select.insert(base | rail(true) << reset | rail(false) << crude, cb.word(0))?;
                select.insert(base | rail(false) << reset | rail(false) << crude, y)?;
                select.insert(base | rail(false) << reset | rail(true) << crude, x)?;
            }
        }
        enable.insert(cb.word(1), rail(true))?;
        enable.insert(cb.word(0), rail(false))?;
        Ok(ChunkKit {
            top: synth(&top)?,
            inc: synth(&inc)?,
            add_carry: synth(&add_carry)?,
            equal: synth(&equal)?,
            enable: synth(&enable)?,
            select: synth(&select)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{find_friendly_pair, make_codebook, FriendlyPair};
    use crate::netcore::{bits_of, word_of};
    use num_rational::Ratio;

    fn run(c: &Circuit, x: u64) -> u64 {
        word_of(&c.eval(&bits_of(x, c.n_inputs())).unwrap())
    }

    #[test]
    fn chunk_functions_on_their_domains() {
        let pairs = [
            FriendlyPair { k: 2, eps: Ratio::from_integer(1) },
            FriendlyPair { k: 4, eps: Ratio::from_integer(1) },
            find_friendly_pair(1.5).unwrap(),
        ];
        for pair in pairs {
            let cb = make_codebook(pair, 2).unwrap();
            let kit = ChunkKit::new(&cb).unwrap();
            let (k, kr) = (cb.k(), cb.radix);
            for d in 0..kr {
                let x = cb.word(d);
                let up = cb.word((d + 1) % kr);
                assert_eq!(run(&kit.top, x), if d == kr - 1 { 0b01 } else { 0b10 });
                assert_eq!(run(&kit.inc, x), up);
                assert_eq!(run(&kit.add_carry, x | 0b01 << k), up);
                assert_eq!(run(&kit.add_carry, x | 0b10 << k), x);
                for e in 0..kr {
                    let y = cb.word(e);
                    assert_eq!(run(&kit.equal, x | y << k), if d == e { 0b01 } else { 0b10 });
                    let base = x | y << k;
                    assert_eq!(run(&kit.select, base | 0b01 << (2 * k) | 0b10 << (2 * k + 2)), cb.word(0));
                    assert_eq!(run(&kit.select, base | 0b10 << (2 * k) | 0b10 << (2 * k + 2)), y);
                    assert_eq!(run(&kit.select, base | 0b10 << (2 * k) | 0b01 << (2 * k + 2)), x);
                }
            }
            // the top digit wraps to digit 0 when a carry arrives
            assert_eq!(run(&kit.add_carry, cb.word(kr - 1) | 0b01 << k), cb.word(0));
            assert_eq!(run(&kit.enable, cb.word(1)), 0b01);
            assert_eq!(run(&kit.enable, cb.word(0)), 0b10);
            for c in [&kit.top, &kit.inc, &kit.add_carry, &kit.equal, &kit.enable, &kit.select] {
                assert!(c.is_bi_quadratic());
            }
        }
    }
}
