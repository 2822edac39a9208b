use std::collections::BTreeMap;

use serde::Serialize;

use super::builder::{ceil_log2, Builder, Sig};
use super::circuit::Circuit;
use crate::error::{Error, Result};
use crate::netcore::{bits_of, out_mask, TruthTable, TABLE_MAX_ARITY};

pub const DNF_MAX_ARITY: usize = 16;

/// A Boolean function known only on some inputs. Keys and values are
/// packed the same way as [`TruthTable`] rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialTable {
    pub r: usize,
    pub u: usize,
    pub entries: BTreeMap<u64, u64>,
}

impl PartialTable {
    pub fn new(r: usize, u: usize) -> PartialTable {
        PartialTable {
            r,
            u,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, x: u64, y: u64) -> Result<()> {
        if self.r < 64 && x >> self.r != 0 {
            return Err(Error::Width {
                expected: self.r,
                got: 64 - x.leading_zeros() as usize,
            });
        }
        if y & !out_mask(self.u) != 0 {
            return Err(Error::Width {
                expected: self.u,
                got: 64 - y.leading_zeros() as usize,
            });
        }
        self.entries.insert(x, y);
        Ok(())
    }
}

/// Extend a partial table to a total monotone one. Each output coordinate
/// at `s` is the minimum over domain points above `s`, and 1 when there
/// are none.
pub fn monotone_extension(t: &PartialTable) -> Result<TruthTable> {
    if t.r > TABLE_MAX_ARITY {
        return Err(Error::TooLarge {
            what: "table arity",
            got: t.r,
            limit: TABLE_MAX_ARITY,
        });
    }
    let mask = out_mask(t.u);
    let mut rows = vec![mask; 1 << t.r];
    for (&x, &y) in &t.entries {
        rows[x as usize] = y;
    }
    for j in 0..t.r {
        let bit = 1usize << j;
        for s in 0..rows.len() {
            if s & bit == 0 {
                rows[s] &= rows[s | bit];
            }
        }
    }
    for (&x, &y) in &t.entries {
        if rows[x as usize] != y {
            let low = y & !rows[x as usize];
            let (&hi, &fhi) = t
                .entries
                .iter()
                .find(|(&h, &fh)| h & x == x && low & !fh != 0)
                .expect("a lower minimum comes from a dominating point");
            return Err(Error::NotMonotone {
                lo: bits_of(x, t.r),
                hi: bits_of(hi, t.r),
                flo: bits_of(y, t.u),
                fhi: bits_of(fhi, t.u),
            });
        }
    }
    TruthTable::new(t.r, t.u, rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct DnfReport {
    pub arity: usize,
    pub out_width: usize,
    /// Minimal true points per output.
    pub terms: Vec<usize>,
    pub depth: usize,
    pub size: usize,
    /// Worst case over all monotone tables of this shape.
    pub depth_bound: usize,
    pub size_bound: usize,
}

/// Largest antichain in the cube of dimension `r`.
fn max_antichain(r: usize) -> usize {
    let k = r / 2;
    (0..k).fold(1usize, |acc, i| acc * (r - i) / (i + 1))
}

/// Depth and size limits for a monotone DNF circuit with `r` inputs and
/// `u` outputs.
pub fn dnf_bounds(r: usize, u: usize) -> (usize, usize) {
    let b = max_antichain(r);
    let uses = u * b;
    let lf = ceil_log2(uses.max(1));
    let la = ceil_log2(r.max(1));
    let lo = ceil_log2(b);
    let depth = (lf + la + lo).max(1) + 1;
    // fanout trees, AND trees with their padding, OR trees, output copies
    let size = r * (2 * uses + lf)
        + uses * (2 * r + la + lf)
        + u * (2 * b + lo + la + lf)
        + u * (depth + 1);
    (depth, size)
}

/// Monotone DNF circuit: input fan-out trees, one AND tree per minimal
/// true point, one OR tree per output.
pub fn dnf_synthesize(t: &TruthTable) -> Result<(Circuit, DnfReport)> {
    let (r, u) = (t.arity(), t.out_width());
    if r > DNF_MAX_ARITY {
        return Err(Error::TooLarge {
            what: "DNF arity",
            got: r,
            limit: DNF_MAX_ARITY,
        });
    }
    if let Some((x, y)) = t.monotonicity_witness() {
        return Err(Error::NotMonotone {
            lo: bits_of(x, r),
            hi: bits_of(y, r),
            flo: bits_of(t.get(x), u),
            fhi: bits_of(t.get(y), u),
        });
    }
    let terms: Vec<Vec<u64>> = (0..u)
        .map(|i| {
            let on = |s: u64| t.get(s) >> i & 1 == 1;
            (0..1u64 << r)
                .filter(|&s| on(s) && (0..r).all(|j| s >> j & 1 == 0 || !on(s & !(1 << j))))
                .collect()
        })
        .collect();
    for (i, ts) in terms.iter().enumerate() {
        if ts.is_empty() || ts[0] == 0 {
            return Err(Error::ConstantOutput { output: i });
        }
    }

    let mut b = Builder::new(r);
    let mut leaves: Vec<Vec<Sig>> = (0..r)
        .map(|j| {
            let uses = terms.iter().flatten().filter(|&&s| s >> j & 1 == 1).count();
            if uses == 0 {
                Vec::new()
            } else {
                let x = b.input(j);
                b.fanout(x, uses)
            }
        })
        .collect();
    let mut outs = Vec::with_capacity(u);
    for ts in &terms {
        let ands: Vec<Sig> = ts
            .iter()
            .map(|&s| {
                let lits: Vec<Sig> = (0..r)
                    .filter(|&j| s >> j & 1 == 1)
                    .map(|j| leaves[j].pop().expect("one leaf per use"))
                    .collect();
                b.reduce(crate::netcore::Op::And, &lits)
            })
            .collect();
        outs.push(b.reduce(crate::netcore::Op::Or, &ands));
    }
    let c = b.finish(&outs)?;
    let (depth_bound, size_bound) = dnf_bounds(r, u);
    let report = DnfReport {
        arity: r,
        out_width: u,
        terms: terms.iter().map(Vec::len).collect(),
        depth: c.depth(),
        size: c.size(),
        depth_bound,
        size_bound,
    };
    Ok((c, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn partial(r: usize, u: usize, pts: &[(u64, u64)]) -> PartialTable {
        let mut t = PartialTable::new(r, u);
        for &(x, y) in pts {
            t.insert(x, y).unwrap();
        }
        t
    }

    #[test]
    fn extension_examples() {
        // keys: bit 0 is the first coordinate
        let t = monotone_extension(&partial(2, 1, &[(0b10, 1), (0b01, 0)])).unwrap();
        assert_eq!(t.get(0b00), 0);
        assert_eq!(t.get(0b11), 1);
        let t = monotone_extension(&partial(2, 1, &[(0b11, 0)])).unwrap();
        assert_eq!(t.get(0b00), 0);
        let maj = TruthTable::from_fn(3, 1, |x| u64::from(x.count_ones() >= 2)).unwrap();
        let mut p = PartialTable::new(3, 1);
        for x in 0..8 {
            p.insert(x, maj.get(x)).unwrap();
        }
        assert_eq!(monotone_extension(&p).unwrap(), maj);
    }

    #[test]
    fn extension_rejects_with_witness() {
        let err = monotone_extension(&partial(2, 1, &[(0b01, 1), (0b11, 0)])).unwrap_err();
        assert_eq!(
            err,
            Error::NotMonotone {
                lo: vec![true, false],
                hi: vec![true, true],
                flo: vec![true],
                fhi: vec![false],
            }
        );
    }

    #[test]
    fn majority_and_copy() {
        let maj = TruthTable::from_fn(3, 1, |x| u64::from(x.count_ones() >= 2)).unwrap();
        let (c, rep) = dnf_synthesize(&maj).unwrap();
        assert_eq!(c.eval(&[true, true, false]).unwrap(), vec![true]);
        assert_eq!(c.eval(&[true, false, false]).unwrap(), vec![false]);
        assert_eq!(rep.terms, vec![3]);
        let id = TruthTable::from_fn(1, 1, |x| x).unwrap();
        let (c, _) = dnf_synthesize(&id).unwrap();
        assert_eq!((c.depth(), c.size()), (1, 1));
    }

    #[test]
    fn synthesis_refusals() {
        let not = TruthTable::from_fn(1, 1, |x| 1 - x).unwrap();
        assert!(matches!(dnf_synthesize(&not), Err(Error::NotMonotone { .. })));
        let zero = TruthTable::from_fn(2, 1, |_| 0).unwrap();
        assert_eq!(dnf_synthesize(&zero).unwrap_err(), Error::ConstantOutput { output: 0 });
        let one = TruthTable::from_fn(2, 1, |_| 1).unwrap();
        assert_eq!(dnf_synthesize(&one).unwrap_err(), Error::ConstantOutput { output: 0 });
        let wide = TruthTable::from_fn(17, 1, |x| u64::from(x != 0)).unwrap();
        assert!(matches!(dnf_synthesize(&wide), Err(Error::TooLarge { .. })));
    }

    fn antichain_table(r: usize, u: usize, seed: u64) -> PartialTable {
        // points of weight r/2 form an antichain, so any values extend
        let mut t = PartialTable::new(r, u);
        let mut z = seed;
        for x in (0..1u64 << r).filter(|x| x.count_ones() as usize == r / 2) {
            z = z.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            t.insert(x, (z >> 20) & out_mask(u)).unwrap();
        }
        t
    }

    proptest! {
        #[test]
        fn extension_agrees_on_antichains(r in 1usize..9, u in 1usize..4, seed in any::<u64>()) {
            let p = antichain_table(r, u, seed);
            let t = monotone_extension(&p).unwrap();
            prop_assert!(t.is_monotone());
            for (&x, &y) in &p.entries {
                prop_assert_eq!(t.get(x), y);
            }
        }

        #[test]
        fn dnf_computes_the_table(r in 2usize..8, u in 1usize..4, seed in any::<u64>()) {
            let p = antichain_table(r, u, seed);
            let t = monotone_extension(&p).unwrap();
            match dnf_synthesize(&t) {
                Ok((c, rep)) => {
                    prop_assert!(c.is_bi_quadratic());
                    prop_assert!(rep.depth <= rep.depth_bound);
                    prop_assert!(rep.size <= rep.size_bound);
                    for x in 0..1u64 << r {
                        let got = crate::netcore::word_of(&c.eval(&bits_of(x, r)).unwrap());
                        prop_assert_eq!(got, t.get(x));
                    }
                }
                Err(Error::ConstantOutput { output }) => {
                    let col: Vec<u64> = t.rows().iter().map(|v| v >> output & 1).collect();
                    prop_assert!(col.iter().all(|&b| b == col[0]));
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
