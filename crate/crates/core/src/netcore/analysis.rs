use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::network::Network;
use super::sim::{step_into, Lanes};
use super::state::State;
use super::table::TruthTable;
use crate::error::{Error, Result};

pub const MONOTONE_MAX_VARS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub fan_in: Vec<u8>,
    pub fan_out: Vec<u32>,
    /// Distinct inputs that can change the gate's value under a one-bit flip.
    pub semantic_fan_in: Vec<u8>,
    /// Gates declaring more input slots than they semantically use.
    pub fictitious: Vec<usize>,
    pub max_fan_out: u32,
    pub quadratic: bool,
    pub bi_quadratic: bool,
}

pub fn structure_report(net: &Network) -> StructureReport {
    let n = net.len();
    let mut fan_in = Vec::with_capacity(n);
    let mut fan_out = vec![0u32; n];
    let mut semantic = Vec::with_capacity(n);
    let mut fictitious = Vec::new();
    for (i, g) in net.gates().iter().enumerate() {
        let ins = g.inputs();
        fan_in.push(ins.len() as u8);
        for &x in ins {
            fan_out[x as usize] += 1;
        }
        let s = semantic_inputs(g.op, ins);
        if s < ins.len() {
            fictitious.push(i);
        }
        semantic.push(s as u8);
    }
    let max_fan_out = fan_out.iter().copied().max().unwrap_or(0);
    let quadratic = fan_in.iter().all(|&f| f == 1 || f == 2);
    StructureReport {
        fan_in,
        fan_out,
        semantic_fan_in: semantic,
        fictitious,
        max_fan_out,
        quadratic,
        bi_quadratic: quadratic && max_fan_out <= 2,
    }
}

fn semantic_inputs(op: super::Op, ins: &[u32]) -> usize {
    let mut distinct: Vec<u32> = ins.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let eval = |assign: u32| {
        let val = |x: u32| {
            let k = distinct.iter().position(|&d| d == x).expect("present");
            (assign >> k) & 1 == 1
        };
        op.apply(val(ins[0]), val(*ins.last().expect("nonempty")))
    };
    (0..distinct.len())
        .filter(|&k| (0..1u32 << distinct.len()).any(|a| eval(a) != eval(a ^ (1 << k))))
        .count()
}

pub fn monotonicity_check_table(t: &TruthTable) -> Result<bool> {
    if t.arity() > MONOTONE_MAX_VARS {
        return Err(Error::TooLarge {
            what: "table arity",
            got: t.arity(),
            limit: MONOTONE_MAX_VARS,
        });
    }
    Ok(t.is_monotone())
}

/// Exhaustive check of the global update map over all covering pairs.
pub fn monotonicity_check_net(net: &Network) -> Result<bool> {
    let n = net.len();
    if n > MONOTONE_MAX_VARS {
        return Err(Error::TooLarge {
            what: "network size",
            got: n,
            limit: MONOTONE_MAX_VARS,
        });
    }
    let image = |x: u64| {
        let s = State::from_words(n, vec![x]).expect("fits one word");
        let mut out = State::zeros(n);
        step_into(net, &s, &mut out);
        out.words()[0]
    };
    let images: Vec<u64> = (0..1u64 << n).map(image).collect();
    for x in 0..1u64 << n {
        for j in 0..n {
            if x & (1 << j) == 0 && images[x as usize] & !images[(x | 1 << j) as usize] != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Count of random ordered pairs `s <= s'` with `f(s) !<= f(s')`.
pub fn random_monotonicity_violations(net: &Network, pairs: u64, seed: u64) -> usize {
    let n = net.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut done = 0u64;
    while done < pairs {
        let take = (pairs - done).min(64);
        let live = if take == 64 { !0u64 } else { (1u64 << take) - 1 };
        let mut lo = Lanes::zeros(n);
        let mut hi = Lanes::zeros(n);
        for v in 0..n {
            let a: u64 = rng.gen();
            let raise: u64 = rng.gen::<u64>() & rng.gen::<u64>();
            lo.set(v, a);
            hi.set(v, a | raise);
        }
        lo.step(net).expect("sized");
        hi.step(net).expect("sized");
        let mut bad = 0u64;
        for v in 0..n {
            bad |= lo.get(v) & !hi.get(v);
        }
        violations += (bad & live).count_ones() as usize;
        done += take;
    }
    violations
}
