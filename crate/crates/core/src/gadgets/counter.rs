use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pulse::{
    buffered_sorter, place_pulse, pulse_event_prob, pulse_size, Polarity, PulseLayout, PULSE_MAX_K,
};
use super::schedule::CounterSchedule;
use crate::circuitkit::{sorting_depth_bound, Circuit, NetBuilder};
use crate::error::{Error, Result};
use crate::netcore::{Gate, Lanes, Network, State};
use crate::rng::{trial_rng, trial_seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterMode {
    /// Ring preloaded through the network preset; depth 1.
    Seeded,
    /// Ring initialized by pulse-driven latches from any hidden state.
    SelfInit,
}

/// Overrides for a self-initializing counter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CounterOptions {
    /// Latch counts of the generators, instead of sizing from `q_target`.
    pub ones_k: Option<usize>,
    pub zeros_k: Option<usize>,
    /// Delay the pulses so the counter has at least this depth.
    pub min_depth: usize,
}

/// A counter emitting `g(t mod T)` on its outputs.
#[derive(Clone, Debug)]
pub struct CounterSystem {
    pub mode: CounterMode,
    pub schedule: CounterSchedule,
    pub circuit: Circuit,
    pub depth: usize,
    /// `ring[j][b]`: bit `b` of block `H_j`.
    pub ring: Vec<Vec<usize>>,
    pub outputs: Vec<usize>,
    /// Drives the latches of ring bits that must become 1.
    pub ones_gen: Option<PulseLayout>,
    /// Drives the latches of ring bits that must become 0.
    pub zeros_gen: Option<PulseLayout>,
    /// COPY chains aligning the shallower generator's pulse; the value
    /// is the rest value of the chain.
    pub pads: Vec<(usize, bool)>,
    /// Required initial values (seeded ring).
    pub preset: BTreeMap<usize, bool>,
    /// Joint probability that both generators emit a clean single pulse.
    /// This is a lower bound on success: a late extra firing still leaves
    /// the ring correct.
    pub predicted_success: f64,
}

fn size_pair(ones: usize, zeros: usize, q_target: f64) -> Result<(usize, usize)> {
    let min = |c: usize| if c == 0 { 0 } else { pulse_size(c, 0.0).expect("q = 0 is feasible") };
    let (mut k1, mut k0) = (min(ones), min(zeros));
    let prob1 = |k: usize| if ones == 0 { 1.0 } else { pulse_event_prob(k, ones) };
    let prob0 = |k: usize| if zeros == 0 { 1.0 } else { pulse_event_prob(k, zeros) };
    while prob1(k1) * prob0(k0) < q_target {
        if k1 > 0 && (k0 == 0 || prob1(k1) <= prob0(k0)) {
            k1 *= 2;
        } else {
            k0 *= 2;
        }
        if k1 > PULSE_MAX_K || k0 > PULSE_MAX_K {
            return Err(Error::Infeasible(format!(
                "counter with {ones}+{zeros} latch bits cannot reach q = {q_target}"
            )));
        }
    }
    Ok((k1, k0))
}

/// Generator sizes and depth of a self-initializing counter whose ring
/// holds `ones` one bits and `zeros` zero bits.
pub fn counter_plan(ones: usize, zeros: usize, q_target: f64) -> Result<(usize, usize, usize)> {
    let (k1, k0) = size_pair(ones, zeros, q_target)?;
    let ds = [k1, k0]
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| sorting_depth_bound(k) + 1)
        .max()
        .ok_or_else(|| Error::Invalid("empty ring".into()))?;
    Ok((k1, k0, ds + 3))
}

pub fn build_counter(schedule: &CounterSchedule, mode: CounterMode, q_target: f64) -> Result<CounterSystem> {
    build_counter_with(schedule, mode, q_target, CounterOptions::default())
}

pub fn build_counter_with(
    schedule: &CounterSchedule,
    mode: CounterMode,
    q_target: f64,
    opts: CounterOptions,
) -> Result<CounterSystem> {
    let (t_len, w) = (schedule.period(), schedule.width());
    if !(0.0..1.0).contains(&q_target) {
        return Err(Error::Invalid(format!("q_target {q_target} outside [0, 1)")));
    }
    let mut nb = NetBuilder::new();
    let ring: Vec<Vec<usize>> = (0..t_len).map(|_| nb.alloc(w).collect()).collect();
    let outputs: Vec<usize> = nb.alloc(w).collect();
    for b in 0..w {
        nb.set(outputs[b], Gate::copy(ring[t_len - 1][b]))?;
        nb.label(outputs[b], format!("R{b}"));
    }
    let mut sys = CounterSystem {
        mode,
        schedule: schedule.clone(),
        circuit: Circuit::io_system(0, vec![Gate::copy(0)], vec![0], 1)?,
        depth: 1,
        ring: ring.clone(),
        outputs: outputs.clone(),
        ones_gen: None,
        zeros_gen: None,
        pads: Vec::new(),
        preset: BTreeMap::new(),
        predicted_success: 1.0,
    };
    match mode {
        CounterMode::Seeded => {
            for (j, block) in ring.iter().enumerate() {
                let prev = &ring[(j + t_len - 1) % t_len];
                let g = schedule.at(((t_len - j) % t_len) as u64);
                for b in 0..w {
                    nb.set(block[b], Gate::copy(prev[b]))?;
                    nb.preset(block[b], g[b]);
                    sys.preset.insert(block[b], g[b]);
                }
            }
        }
        CounterMode::SelfInit => {
            let ones: usize = schedule.patterns.iter().flatten().filter(|&&b| b).count();
            let zeros = t_len * w - ones;
            let (k1, k0) = match (opts.ones_k, opts.zeros_k) {
                (Some(a), Some(b)) => (if ones > 0 { a } else { 0 }, if zeros > 0 { b } else { 0 }),
                _ => size_pair(ones, zeros, q_target)?,
            };
            let mut gens: Vec<(Polarity, PulseLayout)> = Vec::new();
            for (pol, k, count) in [(Polarity::OneThenZero, k1, ones), (Polarity::ZeroThenOne, k0, zeros)] {
                if count > 0 {
                    gens.push((pol, place_pulse(&mut nb, &buffered_sorter(k)?, pol, count)?));
                }
            }
            let ds = gens.iter().map(|(_, g)| g.sorter_depth).max().expect("some ring bit");
            let ds = ds.max(opts.min_depth.saturating_sub(3));
            let d = ds + 3;
            // pad the pulses so both land at ds + 1
            let mut feeds: BTreeMap<Polarity, Vec<usize>> = BTreeMap::new();
            for (pol, g) in &gens {
                let mut outs = g.outputs.clone();
                for _ in g.sorter_depth..ds {
                    let next: Vec<usize> = nb.alloc(outs.len()).collect();
                    for (&n, &o) in next.iter().zip(&outs) {
                        nb.set(n, Gate::copy(o))?;
                        sys.pads.push((n, pol.rest_value()));
                    }
                    outs = next;
                }
                outs.reverse();
                feeds.insert(*pol, outs);
            }
            // at step d-1 block j must hold g((d-1-j) mod T)
            for (j, block) in ring.iter().enumerate() {
                let prev = &ring[(j + t_len - 1) % t_len];
                let g = schedule.at(((d - 1 + t_len * (j + 1) - j) % t_len) as u64);
                for b in 0..w {
                    let gate = if g[b] {
                        let p = feeds.get_mut(&Polarity::OneThenZero).and_then(Vec::pop).expect("pulse");
                        Gate::or(prev[b], p)
                    } else {
                        let p = feeds.get_mut(&Polarity::ZeroThenOne).and_then(Vec::pop).expect("pulse");
                        Gate::and(prev[b], p)
                    };
                    nb.set(block[b], gate)?;
                }
            }
            for (pol, g) in gens {
                sys.predicted_success *= pulse_event_prob(g.k, g.outputs.len());
                match pol {
                    Polarity::OneThenZero => sys.ones_gen = Some(g),
                    Polarity::ZeroThenOne => sys.zeros_gen = Some(g),
                }
            }
            sys.depth = d;
        }
    }
    for (j, block) in ring.iter().enumerate() {
        for (b, &v) in block.iter().enumerate() {
            nb.label(v, format!("H{j}.{b}"));
        }
    }
    let net = nb.finish()?;
    sys.circuit = Circuit::io_system(0, net.gates().to_vec(), outputs, sys.depth)?;
    Ok(sys)
}

impl CounterSystem {
    pub fn n_vars(&self) -> usize {
        self.circuit.n_vars()
    }

    pub fn network(&self) -> Network {
        let mut net = self.circuit.to_network();
        net.preset = self.preset.clone();
        for (j, block) in self.ring.iter().enumerate() {
            for (b, &v) in block.iter().enumerate() {
                net.labels.insert(v, format!("H{j}.{b}"));
            }
        }
        for (b, &v) in self.outputs.iter().enumerate() {
            net.labels.insert(v, format!("R{b}"));
        }
        net
    }

    /// First step from which the state no longer depends on the start.
    pub fn settle_time(&self) -> usize {
        match self.mode {
            CounterMode::Seeded => 1,
            CounterMode::SelfInit => 2 * self.depth + 1,
        }
    }

    /// The state at step `t >= settle_time()` on every successful start:
    /// generators at rest, ring rotated to `g(t - j)`, outputs `g(t)`.
    pub fn fixed_state(&self, t: u64) -> State {
        let mut s = State::zeros(self.n_vars());
        self.write_fixed_state(t, &mut s, |v| v);
        s
    }

    /// As `fixed_state`, writing into `s` through an index map.
    pub fn write_fixed_state(&self, t: u64, s: &mut State, map: impl Fn(usize) -> usize) {
        let t_len = self.ring.len() as u64;
        for (j, block) in self.ring.iter().enumerate() {
            let g = self.schedule.at(t + t_len * (j as u64 + 1) - j as u64);
            for (&v, &bit) in block.iter().zip(g) {
                s.set(map(v), bit);
            }
        }
        for (&v, &bit) in self.outputs.iter().zip(self.schedule.at(t)) {
            s.set(map(v), bit);
        }
        for g in [&self.ones_gen, &self.zeros_gen].into_iter().flatten() {
            for &v in &g.vars {
                s.set(map(v), g.polarity.rest_value());
            }
        }
        for &(v, value) in &self.pads {
            s.set(map(v), value);
        }
    }

    /// A start known to succeed: half the latches at rest, the sorted level
    /// entirely at rest, the seeded ring in place.
    pub fn write_canonical_init(&self, s: &mut State, map: impl Fn(usize) -> usize) {
        for (&v, &b) in &self.preset {
            s.set(map(v), b);
        }
        for g in [&self.ones_gen, &self.zeros_gen].into_iter().flatten() {
            let rest = g.polarity.rest_value();
            for &v in &g.vars {
                s.set(map(v), rest);
            }
            for &v in &g.latch[g.k / 2..] {
                s.set(map(v), !rest);
            }
        }
    }

    pub fn canonical_init(&self) -> State {
        let mut s = State::zeros(self.n_vars());
        self.write_canonical_init(&mut s, |v| v);
        s
    }

    /// Uniform start honoring the preset.
    pub fn random_init(&self, seed: u64, trial: u64) -> State {
        let mut s = State::random(self.n_vars(), &mut trial_rng(seed, trial));
        for (&v, &b) in &self.preset {
            s.set(v, b);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub success: bool,
    /// First step where outputs were wrong, or the settle step when only
    /// the hidden state was.
    pub first_bad_t: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterReport {
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    pub predicted: f64,
    pub records: Vec<TrialRecord>,
}

impl CounterReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "seed", "success", "first_bad_t"])
            .map_err(|e| Error::Invalid(e.to_string()))?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                u8::from(r.success).to_string(),
                r.first_bad_t.map(|t| t.to_string()).unwrap_or_default(),
            ])
            .map_err(|e| Error::Invalid(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Counter trials from uniform starts. A trial succeeds when the outputs
/// equal `g(t mod T)` for every `t` in `[d, d + 5T]` and the whole state
/// equals `fixed_state` at the settle step.
pub fn counter_monte_carlo(sys: &CounterSystem, trials: u64, seed: u64) -> CounterReport {
    let net = sys.network();
    let batches = trials.div_ceil(64);
    let records: Vec<TrialRecord> = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let first = 64 * b;
            counter_batch(sys, &net, first, (trials - first).min(64), seed)
        })
        .collect();
    let successes = records.iter().filter(|r| r.success).count() as u64;
    CounterReport {
        trials,
        successes,
        fraction: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        predicted: sys.predicted_success,
        records,
    }
}

fn counter_batch(sys: &CounterSystem, net: &Network, first: u64, live: u64, seed: u64) -> Vec<TrialRecord> {
    let states: Vec<State> = (first..first + live).map(|t| sys.random_init(seed, t)).collect();
    let mut lanes = Lanes::from_states(&states).expect("1..=64 states");
    let d = sys.depth as u64;
    let t_len = sys.ring.len() as u64;
    let settle = sys.settle_time() as u64;
    let horizon = (d + 5 * t_len).max(settle);
    let mut first_bad: Vec<Option<u64>> = vec![None; live as usize];
    let check_outputs = |t: u64, lanes: &Lanes, first_bad: &mut Vec<Option<u64>>| {
        let g = sys.schedule.at(t);
        let mut bad = 0u64;
        for (&v, &bit) in sys.outputs.iter().zip(g) {
            bad |= lanes.get(v) ^ if bit { !0 } else { 0 };
        }
        for (j, fb) in first_bad.iter_mut().enumerate() {
            if fb.is_none() && bad >> j & 1 == 1 {
                *fb = Some(t);
            }
        }
    };
    if d == 0 {
        check_outputs(0, &lanes, &mut first_bad);
    }
    for t in 1..=horizon {
        lanes.step(net).expect("sized");
        if t >= d && t <= d + 5 * t_len {
            check_outputs(t, &lanes, &mut first_bad);
        }
        if t == settle {
            let fixed = sys.fixed_state(t);
            let mut bad = 0u64;
            for v in 0..net.len() {
                bad |= lanes.get(v) ^ if fixed.get(v) { !0 } else { 0 };
            }
            for (j, fb) in first_bad.iter_mut().enumerate() {
                if bad >> j & 1 == 1 {
                    fb.get_or_insert(t);
                }
            }
        }
    }
    (0..live)
        .map(|j| {
            let trial = first + j;
            let fb = first_bad[j as usize];
            TrialRecord {
                trial,
                seed: trial_seed(seed, trial),
                success: fb.is_none(),
                first_bad_t: fb,
            }
        })
        .collect()
}
