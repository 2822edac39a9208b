use super::builder::{ceil_log2, Builder, Sig};
use super::circuit::Circuit;
use crate::error::{Error, Result};
use crate::netcore::Op;

fn positive(what: &'static str, v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::Invalid(format!("{what} must be positive")))
    } else {
        Ok(())
    }
}

/// One COPY per input, depth 1.
pub fn identity(width: usize) -> Result<Circuit> {
    delay_line(width, 1)
}

/// `width` parallel COPY chains of length `steps`.
pub fn delay_line(width: usize, steps: usize) -> Result<Circuit> {
    positive("width", width)?;
    positive("steps", steps)?;
    let mut b = Builder::new(width);
    let outs: Vec<Sig> = b.inputs().into_iter().map(|s| b.delay(s, steps)).collect();
    b.finish(&outs)
}

/// One input replicated to `copies` outputs.
pub fn fanout_tree(copies: usize) -> Result<Circuit> {
    positive("copies", copies)?;
    let mut b = Builder::new(1);
    let x = b.input(0);
    let outs = b.fanout(x, copies);
    b.finish(&outs)
}

/// Conjunction or disjunction of `width` inputs.
pub fn reduce_tree(op: Op, width: usize) -> Result<Circuit> {
    positive("width", width)?;
    if op == Op::Copy {
        return Err(Error::Invalid("reduce_tree needs AND or OR".into()));
    }
    let mut b = Builder::new(width);
    let ins = b.inputs();
    let out = b.reduce(op, &ins);
    b.finish(&[out])
}

/// `bottom` feeds `top`: the result computes `top(bottom(x))`.
pub fn concat(top: &Circuit, bottom: &Circuit) -> Result<Circuit> {
    if bottom.outputs().len() != top.n_inputs() {
        return Err(Error::Width {
            expected: top.n_inputs(),
            got: bottom.outputs().len(),
        });
    }
    let mut b = Builder::new(bottom.n_inputs());
    let ins = b.inputs();
    let mid = b.instantiate(bottom, &ins)?;
    let outs = b.instantiate(top, &mid)?;
    b.finish(&outs)
}

/// Side by side; the shallower part gets COPY padding on its outputs.
pub fn parallel(a: &Circuit, c: &Circuit) -> Result<Circuit> {
    let mut b = Builder::new(a.n_inputs() + c.n_inputs());
    let ins = b.inputs();
    let mut outs = b.instantiate(a, &ins[..a.n_inputs()])?;
    outs.extend(b.instantiate(c, &ins[a.n_inputs()..])?);
    b.finish(&outs)
}

/// Comparator layers of Batcher's odd-even mergesort on `width` wires.
///
/// Wires are padded to a power of two with ones. A pad sits above every
/// real wire and never moves, so comparators touching a pad are identities
/// and are left out.
pub fn batcher_layers(width: usize) -> Vec<Vec<(usize, usize)>> {
    let n = width.next_power_of_two();
    let mut layers = Vec::new();
    let mut p = 1;
    while p < n {
        let mut k = p;
        while k >= 1 {
            let mut layer = Vec::new();
            let mut j = k % p;
            while j + k < n {
                for i in 0..k.min(n - j - k) {
                    let (lo, hi) = (i + j, i + j + k);
                    if lo / (2 * p) == hi / (2 * p) && hi < width {
                        layer.push((lo, hi));
                    }
                }
                j += 2 * k;
            }
            if !layer.is_empty() {
                layers.push(layer);
            }
            k /= 2;
        }
        p *= 2;
    }
    layers
}

/// Upper bound on the comparator depth for `width` wires.
pub fn sorting_depth_bound(width: usize) -> usize {
    let l = ceil_log2(width.max(1));
    l * (l + 1) / 2
}

/// 0/1 sorter, zeros first. Each comparator is one AND on the lower wire
/// and one OR on the upper wire; idle wires are copied.
pub fn sorting_network(width: usize) -> Result<Circuit> {
    positive("width", width)?;
    let mut b = Builder::new(width);
    let mut wires = b.inputs();
    for layer in batcher_layers(width) {
        let mut next: Vec<Option<Sig>> = vec![None; width];
        for &(lo, hi) in &layer {
            next[lo] = Some(b.and(wires[lo], wires[hi]));
            next[hi] = Some(b.or(wires[lo], wires[hi]));
        }
        wires = next
            .into_iter()
            .zip(&wires)
            .map(|(n, &w)| n.unwrap_or_else(|| b.copy(w)))
            .collect();
    }
    b.finish(&wires)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::bits_of;
    use proptest::prelude::*;

    fn eval(c: &Circuit, bits: &[u8]) -> Vec<u8> {
        let ins: Vec<bool> = bits.iter().map(|&b| b == 1).collect();
        c.eval(&ins).unwrap().into_iter().map(u8::from).collect()
    }

    #[test]
    fn identity_and_reduce_examples() {
        assert_eq!(eval(&identity(3).unwrap(), &[1, 0, 1]), vec![1, 0, 1]);
        let and5 = reduce_tree(Op::And, 5).unwrap();
        assert_eq!(eval(&and5, &[1; 5]), vec![1]);
        assert_eq!(eval(&and5, &[1, 1, 1, 1, 0]), vec![0]);
        assert_eq!(and5.depth(), 3);
        assert_eq!(eval(&reduce_tree(Op::Or, 4).unwrap(), &[0, 0, 1, 0]), vec![1]);
        assert_eq!(eval(&reduce_tree(Op::Or, 7).unwrap(), &[0; 7]), vec![0]);
        assert!(reduce_tree(Op::And, 0).is_err());
    }

    #[test]
    fn composition_examples() {
        let id3 = identity(3).unwrap();
        let c = concat(&id3, &id3).unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(eval(&c, &[0, 1, 1]), vec![0, 1, 1]);

        let id1 = identity(1).unwrap();
        let pair = parallel(&id1, &id1).unwrap();
        let c = concat(&reduce_tree(Op::And, 2).unwrap(), &pair).unwrap();
        assert_eq!(eval(&c, &[1, 1]), vec![1]);

        let and4 = reduce_tree(Op::And, 4).unwrap();
        let p = parallel(&and4, &id1).unwrap();
        assert_eq!(p.depth(), 2);
        // 3 gates in the tree, 1 COPY plus 1 pad on the identity leg
        assert_eq!(p.size(), and4.size() + 2);
        assert!(concat(&id3, &and4).is_err());
    }

    #[test]
    fn fanout_tree_examples() {
        let one = fanout_tree(1).unwrap();
        assert_eq!((one.depth(), one.size()), (1, 1));
        let five = fanout_tree(5).unwrap();
        assert_eq!(five.depth(), 3);
        assert!(five.size() <= 10);
        assert_eq!(eval(&five, &[1]), vec![1; 5]);
        assert!(fanout_tree(0).is_err());
    }

    #[test]
    fn delay_line_examples() {
        let d = delay_line(3, 1).unwrap();
        assert_eq!(eval(&d, &[0, 1, 1]), vec![0, 1, 1]);
        let d = delay_line(2, 4).unwrap();
        assert_eq!((d.depth(), d.size()), (4, 8));
        assert_eq!(eval(&d, &[1, 0]), vec![1, 0]);
    }

    #[test]
    fn sorter_examples() {
        let s = sorting_network(4).unwrap();
        assert_eq!(eval(&s, &[1, 0, 1, 0]), vec![0, 0, 1, 1]);
        let comparators: usize = batcher_layers(4).iter().map(Vec::len).sum();
        assert_eq!(comparators, 5);
        assert_eq!(s.depth(), 3);
        assert_eq!(eval(&s, &[1; 4]), vec![1; 4]);
        assert_eq!(eval(&s, &[0; 4]), vec![0; 4]);
    }

    #[test]
    fn sorters_sort_exhaustively_up_to_twelve() {
        for w in 1..=12 {
            let s = sorting_network(w).unwrap();
            assert!(s.depth() <= sorting_depth_bound(w).max(1));
            assert!(s.is_bi_quadratic());
            for x in 0..1u64 << w {
                let out = s.eval(&bits_of(x, w)).unwrap();
                let ones = x.count_ones() as usize;
                let want: Vec<bool> = (0..w).map(|i| i >= w - ones).collect();
                assert_eq!(out, want, "w={w} x={x:b}");
            }
        }
    }

    #[test]
    fn comparators_in_a_layer_are_disjoint() {
        for w in [5, 8, 16, 33, 64] {
            for layer in batcher_layers(w) {
                let mut used = vec![false; w];
                for (a, b) in layer {
                    assert!(a < b && b < w);
                    assert!(!std::mem::replace(&mut used[a], true));
                    assert!(!std::mem::replace(&mut used[b], true));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn fanout_tree_size_and_depth(c in 1usize..300) {
            let t = fanout_tree(c).unwrap();
            let l = ceil_log2(c);
            prop_assert_eq!(t.depth(), l.max(1));
            prop_assert!(t.size() <= 2 * c + l);
            prop_assert!(t.hidden().len() <= c.max(1) + l);
            prop_assert!(t.is_bi_quadratic());
            prop_assert_eq!(t.eval(&[true]).unwrap(), vec![true; c]);
            prop_assert_eq!(t.eval(&[false]).unwrap(), vec![false; c]);
        }

        #[test]
        fn reduce_tree_matches_fold(w in 1usize..40, x in any::<u64>()) {
            let bits = bits_of(x, w);
            let and = reduce_tree(Op::And, w).unwrap();
            let or = reduce_tree(Op::Or, w).unwrap();
            prop_assert_eq!(and.depth(), ceil_log2(w).max(1));
            prop_assert!(and.size() <= 2 * w);
            prop_assert!(and.is_bi_quadratic());
            prop_assert_eq!(and.eval(&bits).unwrap(), vec![bits.iter().all(|&b| b)]);
            prop_assert_eq!(or.eval(&bits).unwrap(), vec![bits.iter().any(|&b| b)]);
        }

        #[test]
        fn large_sorters_sort(w in 13usize..100, seed in any::<u64>()) {
            let s = sorting_network(w).unwrap();
            let words: Vec<u64> = (0..w as u64)
                .map(|i| seed.rotate_left((i * 7) as u32) ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15))
                .collect();
            let out = s.eval_words(&words).unwrap();
            for lane in 0..64 {
                let col: Vec<bool> = out.iter().map(|w| w >> lane & 1 == 1).collect();
                let ones = words.iter().filter(|w| *w >> lane & 1 == 1).count();
                prop_assert_eq!(col.iter().filter(|&&b| b).count(), ones);
                prop_assert!(col.windows(2).all(|p| p[0] <= p[1]));
            }
        }
    }
}
