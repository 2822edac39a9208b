use super::chunks::ChunkKit;
use super::codes::r_width;
use crate::circuitkit::{Builder, Circuit, Sig};
use crate::coding::CodeBook;
use crate::error::{Error, Result};
use crate::netcore::Op;

/// Per-bit fan-out leaves, handed out one at a time.
struct Leaves(Vec<Vec<Sig>>);

impl Leaves {
    fn spread(b: &mut Builder, sigs: &[Sig], uses: usize) -> Leaves {
        Leaves(sigs.iter().map(|&s| b.fanout(s, uses)).collect())
    }

    fn take(&mut self) -> Vec<Sig> {
        self.0.iter_mut().map(|l| l.pop().expect("leaf budget")).collect()
    }
}

fn spread_one(b: &mut Builder, s: Sig, uses: usize) -> Vec<Sig> {
    b.fanout(s, uses)
}

/// The increment gadget on `X || R_c`: `X` has `l` chunks, `R_c` holds
/// `m` data chunks and an enable chunk. Outputs the new `X`.
pub fn build_increment(cb: &CodeBook, m: usize) -> Result<Circuit> {
    let kit = ChunkKit::new(cb)?;
    build_increment_with(cb, m, &kit)
}

pub fn build_increment_with(cb: &CodeBook, m: usize, kit: &ChunkKit) -> Result<Circuit> {
    let (k, l) = (cb.k(), cb.chunks);
    if m == 0 || m > l {
        return Err(Error::Invalid(format!("need 1 <= m <= {l}, got {m}")));
    }
    let mut b = Builder::new(k * l + r_width(cb, m));
    let ins: Vec<Sig> = b.inputs().into_iter().map(|s| b.copy(s)).collect();
    let (xin, rin) = ins.split_at(k * l);

    // x chunk j feeds: top-digit test (except the last chunk), adder, selector
    let mut xs: Vec<Leaves> = (0..l)
        .map(|j| {
            let uses = if j + 1 < l { 3 } else { 2 };
            Leaves::spread(&mut b, &xin[j * k..(j + 1) * k], uses)
        })
        .collect();
    // r chunk feeds: comparator or enable decoder, crude AND, crude OR
    let mut rs: Vec<Leaves> = (0..=m)
        .map(|j| Leaves::spread(&mut b, &rin[j * k..(j + 1) * k], 3))
        .collect();

    // carry into chunk j: every lower chunk holds the top digit
    let mut tops: Vec<(Vec<Sig>, Vec<Sig>)> = Vec::new();
    for (j, x) in xs.iter_mut().enumerate().take(l - 1) {
        let t = b.instantiate(&kit.top, &x.take())?;
        let uses = l - 1 - j;
        tops.push((spread_one(&mut b, t[0], uses), spread_one(&mut b, t[1], uses)));
    }
    let mut ys = Vec::with_capacity(l);
    for j in 0..l {
        let x = xs[j].take();
        let y = if j == 0 {
            b.instantiate(&kit.inc, &x)?
        } else {
            let ca: Vec<Sig> = tops[..j].iter_mut().map(|t| t.0.pop().expect("carry")).collect();
            let cb_: Vec<Sig> = tops[..j].iter_mut().map(|t| t.1.pop().expect("carry")).collect();
            let a = b.reduce(Op::And, &ca);
            let o = b.reduce(Op::Or, &cb_);
            let mut input = x;
            input.extend([a, o]);
            b.instantiate(&kit.add_carry, &input)?
        };
        ys.push(Leaves::spread(&mut b, &y, 2));
    }

    // y equals n - i: low chunks match r, high chunks are top digits
    let mut eq_a = Vec::with_capacity(l);
    let mut eq_b = Vec::with_capacity(l);
    for (j, y) in ys.iter_mut().enumerate() {
        let e = if j < m {
            let mut input = y.take();
            input.extend(rs[j].take());
            b.instantiate(&kit.equal, &input)?
        } else {
            b.instantiate(&kit.top, &y.take())?
        };
        eq_a.push(e[0]);
        eq_b.push(e[1]);
    }
    let ea = b.reduce(Op::And, &eq_a);
    let eb = b.reduce(Op::Or, &eq_b);
    let on = b.instantiate(&kit.enable, &rs[m].take())?;

    // crude marker: some r chunk all ones, and some all zeros
    let ands: Vec<Sig> = rs.iter_mut().map(|r| {
        let c = r.take();
        b.reduce(Op::And, &c)
    }).collect();
    let ors: Vec<Sig> = rs.iter_mut().map(|r| {
        let c = r.take();
        b.reduce(Op::Or, &c)
    }).collect();
    let crude_a = b.reduce(Op::Or, &ands);
    let crude_b = b.reduce(Op::And, &ors);
    let mut ca = spread_one(&mut b, crude_a, l + 1);
    let mut cb_ = spread_one(&mut b, crude_b, l + 1);

    let ra = b.reduce(Op::And, &[ea, on[0], cb_.pop().expect("leaf")]);
    let rb = b.reduce(Op::Or, &[eb, on[1], ca.pop().expect("leaf")]);
    let mut ra = spread_one(&mut b, ra, l);
    let mut rb = spread_one(&mut b, rb, l);

    let mut outs = Vec::with_capacity(k * l);
    for j in 0..l {
        let mut input = xs[j].take();
        input.extend(ys[j].take());
        input.extend([
            ra.pop().expect("leaf"),
            rb.pop().expect("leaf"),
            ca.pop().expect("leaf"),
            cb_.pop().expect("leaf"),
        ]);
        outs.extend(b.instantiate(&kit.select, &input)?);
    }
    b.finish(&outs)
}
