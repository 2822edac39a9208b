use super::codes::{r_width, x_star};
use crate::circuitkit::{Builder, Circuit, Sig};
use crate::coding::CodeBook;
use crate::error::Result;
use crate::netcore::Op;

/// The normalizer on `X || R`: passes coding `X` through and writes `x*`
/// when the whole input is crude.
pub fn build_normalizer(cb: &CodeBook, m: usize) -> Result<Circuit> {
    let (k, l) = (cb.k(), cb.chunks);
    let xs = x_star(cb);
    let mut b = Builder::new(k * l + r_width(cb, m));
    let ins: Vec<Sig> = b.inputs().into_iter().map(|s| b.copy(s)).collect();
    // X bits feed the chunk AND, the chunk OR and their output gate
    let mut leaves: Vec<Vec<Sig>> = ins
        .iter()
        .enumerate()
        .map(|(i, &s)| b.fanout(s, if i < k * l { 3 } else { 2 }))
        .collect();
    let mut ands = Vec::new();
    let mut ors = Vec::new();
    for chunk in leaves.chunks_mut(k) {
        let a: Vec<Sig> = chunk.iter_mut().map(|l| l.pop().expect("leaf")).collect();
        let o: Vec<Sig> = chunk.iter_mut().map(|l| l.pop().expect("leaf")).collect();
        ands.push(b.reduce(Op::And, &a));
        ors.push(b.reduce(Op::Or, &o));
    }
    let one = b.reduce(Op::Or, &ands);
    let zero = b.reduce(Op::And, &ors);
    let ones = xs.iter().filter(|&&s| s).count();
    let mut one = b.fanout(one, ones);
    let mut zero = b.fanout(zero, xs.len() - ones);
    let outs: Vec<Sig> = xs
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let z = leaves[i].pop().expect("leaf");
            if s {
                let o = one.pop().expect("leaf");
                b.or(z, o)
            } else {
                let o = zero.pop().expect("leaf");
                b.and(z, o)
            }
        })
        .collect();
    b.finish(&outs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{make_codebook, FriendlyPair};
    use crate::gadgets::{entry_bits, oracle_normalize, r_crude, ScheduleEntry};
    use crate::netcore::{bits_of, run, State};
    use num_rational::Ratio;

    fn k2(l: usize) -> CodeBook {
        make_codebook(FriendlyPair { k: 2, eps: Ratio::from_integer(1) }, l).unwrap()
    }

    #[test]
    fn matches_formula_exhaustively() {
        for (l, m) in [(3, 2), (4, 3), (5, 2)] {
            let cb = k2(l);
            let c = build_normalizer(&cb, m).unwrap();
            let w = c.n_inputs();
            assert!(w <= 16);
            let xs = x_star(&cb);
            for z in 0..1u64 << w {
                let z = bits_of(z, w);
                assert_eq!(c.eval(&z).unwrap(), oracle_normalize(&cb, &z, &xs).unwrap());
            }
        }
    }

    #[test]
    fn output_gates_read_one_rail_and_one_broadcast() {
        let cb = k2(3);
        let c = build_normalizer(&cb, 2).unwrap();
        for &o in c.outputs() {
            let g = c.gate(o);
            assert_ne!(g.op, Op::Copy);
            assert_ne!(g.a(), g.b());
        }
    }

    #[test]
    fn embedded_crude_input_yields_x_star_after_depth() {
        let cb = k2(3);
        let c = build_normalizer(&cb, 2).unwrap();
        let mut nb = crate::circuitkit::NetBuilder::new();
        let src: Vec<usize> = (0..c.n_inputs()).map(|_| nb.holder()).collect();
        let p = nb.embed(&c, &src, None).unwrap();
        let net = nb.finish().unwrap();
        let mut s = State::zeros(net.len());
        let mut z = cb.encode(5).unwrap();
        z.extend(r_crude(&cb, 2));
        for (&v, &bit) in src.iter().zip(&z) {
            s.set(v, bit);
        }
        let end = run(&net, &s, c.depth() as u64, None).unwrap();
        assert_eq!(end.project(&p.outputs), x_star(&cb));
        let mut z = cb.encode(5).unwrap();
        z.extend(entry_bits(&cb, 2, &ScheduleEntry::Code { i: 1, enable: true }).unwrap());
        for (&v, &bit) in src.iter().zip(&z) {
            s.set(v, bit);
        }
        let end = run(&net, &s, c.depth() as u64, None).unwrap();
        assert_eq!(end.project(&p.outputs), cb.encode(5).unwrap());
    }
}
