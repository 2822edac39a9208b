use serde::{Deserialize, Serialize};

use crate::circuitkit::{concat, identity, sorting_network, Circuit, NetBuilder};
use crate::error::{Error, Result};
use crate::netcore::{Gate, Lanes, Network};
use crate::rng::trial_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Latches AND with the low half of the sorted level; emits a single 1.
    OneThenZero,
    /// The dual: OR with the high half; emits a single 0.
    ZeroThenOne,
}

impl Polarity {
    /// Value of every variable once the generator has settled.
    pub fn rest_value(self) -> bool {
        self == Polarity::ZeroThenOne
    }
}

pub const PULSE_MIN_K: usize = 16;
pub const PULSE_MAX_K: usize = 1 << 14;

/// Variables of one placed pulse generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PulseLayout {
    pub polarity: Polarity,
    pub k: usize,
    /// Latched bottom level.
    pub latch: Vec<usize>,
    /// Sorted top level.
    pub sorted: Vec<usize>,
    /// Pulse outputs.
    pub outputs: Vec<usize>,
    /// Every variable owned by the generator.
    pub vars: Vec<usize>,
    /// Depth of the buffered sorter from latch to sorted level.
    pub sorter_depth: usize,
}

impl PulseLayout {
    /// The step at which the outputs carry the pulse.
    pub fn pulse_time(&self) -> usize {
        self.sorter_depth + 1
    }
}

/// Buffered sorter: one COPY layer keeps each latch at fan-out 2.
pub fn buffered_sorter(k: usize) -> Result<Circuit> {
    concat(&sorting_network(k)?, &identity(k)?)
}

/// Place a generator with `k` latches and `p_count <= k/4` outputs.
pub fn place_pulse(
    nb: &mut NetBuilder,
    sorter: &Circuit,
    polarity: Polarity,
    p_count: usize,
) -> Result<PulseLayout> {
    let k = sorter.n_inputs();
    if k < PULSE_MIN_K || !k.is_multiple_of(16) || p_count == 0 || p_count > k / 4 {
        return Err(Error::Invalid(format!(
            "pulse generator with {k} latches cannot drive {p_count} outputs"
        )));
    }
    let start = nb.len();
    let latch: Vec<usize> = nb.alloc(k).collect();
    let placed = nb.embed(sorter, &latch, None)?;
    let sorted = placed.outputs.clone();
    let (feedback, window) = match polarity {
        Polarity::OneThenZero => (0, 9 * k / 16),
        Polarity::ZeroThenOne => (k / 2, 5 * k / 16),
    };
    for (i, &h) in latch.iter().enumerate() {
        let f = sorted[feedback + i / 2];
        let g = match polarity {
            Polarity::OneThenZero => Gate::and(h, f),
            Polarity::ZeroThenOne => Gate::or(h, f),
        };
        nb.set(h, g)?;
    }
    let outputs: Vec<usize> = nb.alloc(p_count).collect();
    for (i, &p) in outputs.iter().enumerate() {
        nb.set(p, Gate::copy(sorted[window + i / 2]))?;
    }
    Ok(PulseLayout {
        polarity,
        k,
        latch,
        sorted,
        outputs,
        vars: (start..nb.len()).collect(),
        sorter_depth: sorter.depth(),
    })
}

fn ln_binomial_pmf(n: usize) -> Vec<f64> {
    // ln C(n, j) - n ln 2
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0f64;
    let base = n as f64 * std::f64::consts::LN_2;
    out.push(-base);
    for j in 1..=n {
        acc += ((n - j + 1) as f64).ln() - (j as f64).ln();
        out.push(acc - base);
    }
    out
}

fn binomial_pmf(n: usize) -> Vec<f64> {
    ln_binomial_pmf(n).into_iter().map(f64::exp).collect()
}

const EXACT_PROB_MAX_K: usize = 4096;

/// Probability, over a uniform initial state, that a generator with `k`
/// latches emits its pulse on all `k/4` outputs: at most `9k/16` zeros
/// at step 0 and at least `11k/16` at step 1.
pub fn pulse_success_prob(k: usize) -> f64 {
    pulse_event_prob(k, k / 4)
}

/// As [`pulse_success_prob`] when only the first `used` outputs are
/// wired: the step-1 threshold drops to `9k/16 + ceil(used/2)`.
///
/// Latches come in pairs sharing one feedback bit `b`. With `B` pairs
/// having `b = 0`, the zero counts are `S(0) = Z0 + Z1` and
/// `S(1) = 2B + Z1` where `Z0 ~ Bin(2B)` and `Z1 ~ Bin(k - 2B)`.
/// Above 4096 latches the value at 4096 is returned as a lower bound.
pub fn pulse_event_prob(k: usize, used: usize) -> f64 {
    if k > EXACT_PROB_MAX_K {
        let scaled = (used * EXACT_PROB_MAX_K).div_ceil(k);
        return pulse_event_prob(EXACT_PROB_MAX_K, scaled);
    }
    assert!(k.is_multiple_of(16) && k > 0, "latch count must be a multiple of 16");
    assert!(used <= k / 4, "at most k/4 outputs");
    let (lo, hi) = (9 * k / 16, 9 * k / 16 + used.div_ceil(2));
    let pairs = binomial_pmf(k / 2);
    let mut total = 0.0;
    for (b, &pb) in pairs.iter().enumerate() {
        if pb < 1e-300 {
            continue;
        }
        let z0 = binomial_pmf(2 * b);
        let mut cdf0 = Vec::with_capacity(z0.len());
        let mut acc = 0.0;
        for p in &z0 {
            acc += p;
            cdf0.push(acc);
        }
        let z1 = binomial_pmf(k - 2 * b);
        let mut inner = 0.0;
        for (z, &p1) in z1.iter().enumerate() {
            if 2 * b + z >= hi && z <= lo {
                inner += p1 * cdf0[(lo - z).min(2 * b)];
            }
        }
        total += pb * inner;
    }
    total.min(1.0)
}

/// Smallest latch count (a power of two, at least `max(16, 4 p_count)`)
/// whose pulse probability reaches `q_target`.
pub fn pulse_size(p_count: usize, q_target: f64) -> Result<usize> {
    let mut k = (4 * p_count).max(PULSE_MIN_K).next_power_of_two();
    while k <= PULSE_MAX_K {
        if pulse_event_prob(k, p_count) >= q_target {
            return Ok(k);
        }
        k *= 2;
    }
    Err(Error::Infeasible(format!(
        "no pulse generator up to {PULSE_MAX_K} latches reaches q = {q_target}"
    )))
}

/// A standalone generator as an input-output system of depth equal to its
/// pulse time.
#[derive(Clone, Debug)]
pub struct PulseGenerator {
    pub circuit: Circuit,
    pub layout: PulseLayout,
    pub success_prob: f64,
}

pub fn pulse_generator(p_count: usize, polarity: Polarity, q_target: f64) -> Result<PulseGenerator> {
    let k = pulse_size(p_count, q_target)?;
    pulse_generator_k(k, p_count, polarity)
}

pub fn pulse_generator_k(k: usize, p_count: usize, polarity: Polarity) -> Result<PulseGenerator> {
    let mut nb = NetBuilder::new();
    let layout = place_pulse(&mut nb, &buffered_sorter(k)?, polarity, p_count)?;
    let net = nb.finish()?;
    let circuit = Circuit::io_system(
        0,
        net.gates().to_vec(),
        layout.outputs.clone(),
        layout.pulse_time(),
    )?;
    Ok(PulseGenerator {
        circuit,
        layout,
        success_prob: pulse_event_prob(k, p_count),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PulseTally {
    pub trials: u64,
    pub successes: u64,
    /// Trials where some latch moved against its polarity.
    pub latch_violations: u64,
}

/// Monte Carlo over uniform initial states: a success emits the pulse
/// value at `d`, the rest value on `[d+1, 2d+1]`, and has every variable
/// at rest at `2d+1`.
pub fn pulse_monte_carlo(g: &PulseGenerator, trials: u64, seed: u64) -> PulseTally {
    use rayon::prelude::*;
    let net = g.circuit.to_network();
    let batches = trials.div_ceil(64);
    (0..batches)
        .into_par_iter()
        .map(|batch| pulse_batch(&net, &g.layout, batch, (trials - 64 * batch).min(64), seed))
        .reduce(PulseTally::default, |a, b| PulseTally {
            trials: a.trials + b.trials,
            successes: a.successes + b.successes,
            latch_violations: a.latch_violations + b.latch_violations,
        })
}

fn pulse_batch(net: &Network, l: &PulseLayout, batch: u64, live: u64, seed: u64) -> PulseTally {
    use rand::Rng;
    let mut rng = trial_rng(seed, batch);
    let mut lanes = Lanes::zeros(net.len());
    for v in 0..net.len() {
        lanes.set(v, rng.gen());
    }
    let mask = if live == 64 { !0 } else { (1u64 << live) - 1 };
    let rest = l.polarity.rest_value();
    let rest_word = if rest { !0u64 } else { 0 };
    let d = l.pulse_time();
    let mut bad = 0u64;
    let mut moved = 0u64;
    for t in 1..=(2 * d + 1) {
        let before: Vec<u64> = l.latch.iter().map(|&v| lanes.get(v)).collect();
        lanes.step(net).expect("sized");
        for (&v, &w) in l.latch.iter().zip(&before) {
            // latches only move toward the rest value
            moved |= (lanes.get(v) ^ w) & !(lanes.get(v) ^ !rest_word);
        }
        for &p in &l.outputs {
            let w = lanes.get(p);
            if t == d {
                bad |= w ^ !rest_word;
            } else if t > d {
                bad |= w ^ rest_word;
            }
        }
    }
    for v in 0..net.len() {
        bad |= lanes.get(v) ^ rest_word;
    }
    PulseTally {
        trials: live,
        successes: u64::from((!bad & mask).count_ones()),
        latch_violations: u64::from((moved & mask).count_ones()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{step, structure_report, State};

    #[test]
    fn exact_probability_matches_enumeration_at_16() {
        // latch bits a (16) and feedback bits b (8, shared by pairs)
        let (k, lo, hi) = (16usize, 9usize, 11usize);
        let mut hits = 0u64;
        for a in 0..1u32 << k {
            let s0 = k - a.count_ones() as usize;
            if s0 > lo {
                continue;
            }
            for b in 0..1u32 << (k / 2) {
                let mut a1 = a;
                for i in 0..k {
                    if b >> (i / 2) & 1 == 0 {
                        a1 &= !(1 << i);
                    }
                }
                if k - a1.count_ones() as usize >= hi {
                    hits += 1;
                }
            }
        }
        let exact = hits as f64 / (1u64 << (k + k / 2)) as f64;
        assert!((pulse_success_prob(16) - exact).abs() < 1e-12);
        // with 2 of 4 outputs wired the step-1 threshold is 10
        let mut hits = 0u64;
        for a in 0..1u32 << k {
            if k - a.count_ones() as usize > lo {
                continue;
            }
            for b in 0..1u32 << (k / 2) {
                let a1 = (0..k).filter(|&i| b >> (i / 2) & 1 == 1).fold(0u32, |m, i| m | (a & 1 << i));
                if k - a1.count_ones() as usize >= 10 {
                    hits += 1;
                }
            }
        }
        let exact = hits as f64 / (1u64 << (k + k / 2)) as f64;
        assert!((pulse_event_prob(16, 2) - exact).abs() < 1e-12);
    }

    #[test]
    fn probability_grows_with_size() {
        let ps: Vec<f64> = [16, 32, 64, 128, 256, 512, 1024].iter().map(|&k| pulse_success_prob(k)).collect();
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
        assert!((ps[3] - 0.8640).abs() < 5e-4, "{}", ps[3]);
        assert!(ps[6] > 0.9999);
        assert_eq!(pulse_size(10, 0.5).unwrap(), 64);
        assert_eq!(pulse_size(10, 0.95).unwrap(), 256);
        assert!(pulse_size(1, 1.0).is_err());
    }

    #[test]
    fn generator_structure() {
        for pol in [Polarity::OneThenZero, Polarity::ZeroThenOne] {
            let g = pulse_generator_k(64, 16, pol).unwrap();
            let rep = structure_report(&g.circuit.to_network());
            assert!(rep.bi_quadratic);
            assert_eq!(g.layout.outputs.len(), 16);
        }
        assert!(pulse_generator_k(64, 17, Polarity::OneThenZero).is_err());
    }

    #[test]
    fn all_rest_initial_latches_never_pulse() {
        let g = pulse_generator_k(32, 8, Polarity::OneThenZero).unwrap();
        let net = g.circuit.to_network();
        let mut s = State::zeros(net.len());
        for _ in 0..3 * g.layout.pulse_time() {
            s = step(&net, &s).unwrap();
            assert!(g.layout.outputs.iter().all(|&p| !s.get(p)));
        }
    }

    #[test]
    fn monte_carlo_near_exact_value() {
        let g = pulse_generator_k(64, 16, Polarity::ZeroThenOne).unwrap();
        let t = pulse_monte_carlo(&g, 4096, 7);
        let p = g.success_prob;
        let se = (p * (1.0 - p) / 4096.0).sqrt();
        let f = t.successes as f64 / 4096.0;
        assert_eq!(t.latch_violations, 0);
        assert!((f - p).abs() < 4.0 * se, "{f} vs {p}");
        assert_eq!(t, pulse_monte_carlo(&g, 4096, 7));
    }
}
