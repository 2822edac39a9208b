use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::arith::ArithmeticModel;
use super::assemble::MMSystem;
use crate::coding::{crude_block_prob, is_crude};
use crate::error::{Error, Result};
use crate::netcore::{run, Lanes, State};
use crate::rng::{trial_rng, trial_seed};

/// Uniform start for `trial`, with preset bits applied. With
/// `condition_e` each engaged block is redrawn until crude, which samples
/// the uniform law conditioned on event E.
pub fn random_init(sys: &MMSystem, seed: u64, trial: u64, condition_e: bool) -> State {
    let mut rng = trial_rng(seed, trial);
    let mut s = State::random(sys.n_vars(), &mut rng);
    sys.apply_preset(&mut s);
    if condition_e {
        let cb = sys.codebook();
        for slot in 0..sys.layout.engaged {
            let vars = sys.layout.block_vars(sys.layout.slot_pos(slot, 0));
            loop {
                let bits: Vec<bool> = (0..vars.len()).map(|_| rng.gen()).collect();
                if is_crude(&bits, cb.k(), cb.chunks).expect("block width") {
                    for (&v, &b) in vars.iter().zip(&bits) {
                        s.set(v, b);
                    }
                    break;
                }
            }
        }
    }
    s
}

/// Outcome of following one start through the congruence window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub event_e: bool,
    pub event_f: bool,
    pub hit_s_plus: bool,
    pub macro_steps: u64,
    /// Engaged slot values at `t0`.
    pub values_t0: Option<Vec<u64>>,
    pub pass: bool,
    /// `(macro-step, slot)` of the first broken congruence.
    pub first_violation: Option<(u64, usize)>,
}

/// Follow `s0` to `t0 + macro_steps |I|` and check that every engaged
/// slot advances by one modulo its own modulus at each macro-step, in
/// agreement with the arithmetic model.
pub fn verify_congruence_window(sys: &MMSystem, s0: &State, macro_steps: u64) -> Result<WindowReport> {
    let l = sys.layout.tape_len as u64;
    let (t0, settle) = (sys.layout.t0, sys.settle_time());
    let model = ArithmeticModel::new(sys.params.n, sys.layout.engaged)?;
    let mut rep = WindowReport {
        event_e: sys.event_e(s0),
        event_f: false,
        hit_s_plus: false,
        macro_steps,
        values_t0: None,
        pass: true,
        first_violation: None,
    };
    let mut sink = |t: u64, s: &State| {
        if t == settle {
            rep.event_f = sys.event_f_at_settle(s);
        }
        if t == t0 {
            rep.hit_s_plus = *s == sys.s_plus;
        }
        if t >= t0 && (t - t0).is_multiple_of(l) && rep.pass {
            let k = (t - t0) / l;
            let got = sys.slot_values(s, t);
            match (&rep.values_t0, got) {
                (_, None) => {
                    rep.pass = false;
                    rep.first_violation = Some((k, undecodable_slot(sys, s, t)));
                }
                (None, Some(v)) => rep.values_t0 = Some(v),
                (Some(v0), Some(v)) => {
                    let want = model.after(v0, k);
                    if let Some(slot) = (0..v.len()).find(|&i| v[i] != want[i]) {
                        rep.pass = false;
                        rep.first_violation = Some((k, slot));
                    }
                }
            }
        }
    };
    run(&sys.net, s0, t0 + macro_steps * l, Some(&mut sink))?;
    Ok(rep)
}

fn undecodable_slot(sys: &MMSystem, s: &State, t: u64) -> usize {
    (0..sys.layout.engaged)
        .find(|&slot| {
            let p = sys.layout.slot_pos(slot, t);
            sys.codebook().decode(&s.project(&sys.layout.block_vars(p))).is_none()
        })
        .unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentOptions {
    pub trials: u64,
    pub seed: u64,
    pub macro_steps: u64,
    /// Steps to simulate; at least `t0 + macro_steps |I|`.
    pub horizon: Option<u64>,
    pub condition_e: bool,
    /// Track coalescence of trials `2j` and `2j + 1`.
    pub pairs: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            trials: 1000,
            seed: 0,
            macro_steps: 10,
            horizon: None,
            condition_e: false,
            pairs: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MMTrial {
    pub trial: u64,
    pub seed: u64,
    pub event_e: bool,
    pub event_f: bool,
    /// First step at which this trial and its partner agree.
    pub coalesced_t: Option<u64>,
    pub hit_s_plus: bool,
    pub window_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub n: u64,
    pub tape_len: usize,
    pub engaged: usize,
    pub n_vars: usize,
    pub t0: u64,
    pub horizon: u64,
    pub trials: u64,
    pub condition_e: bool,
    pub event_e: u64,
    pub event_f: u64,
    pub event_ef: u64,
    pub hit_s_plus: u64,
    pub window_pass: u64,
    pub window_pass_given_ef: u64,
    pub pairs: u64,
    pub pairs_coalesced_by_t0: u64,
    /// `P(E)` for a uniform start.
    pub p_e_exact: f64,
    pub predicted_counter_success: f64,
    #[serde(skip)]
    pub records: Vec<MMTrial>,
}

impl ExperimentReport {
    pub fn fraction(&self, count: u64) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            count as f64 / self.trials as f64
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Invalid(e.to_string());
        w.write_record(["trial", "seed", "eventE", "eventF", "coalesced_t", "hit_s_plus", "window_pass"])
            .map_err(err)?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                u8::from(r.event_e).to_string(),
                u8::from(r.event_f).to_string(),
                r.coalesced_t.map(|t| t.to_string()).unwrap_or_default(),
                u8::from(r.hit_s_plus).to_string(),
                u8::from(r.window_pass).to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Monte Carlo over uniform starts, 64 trials per batch.
pub fn run_experiments(sys: &MMSystem, opts: &ExperimentOptions) -> Result<ExperimentReport> {
    let l = sys.layout.tape_len as u64;
    let needed = (sys.layout.t0 + opts.macro_steps * l).max(sys.settle_time());
    let horizon = opts.horizon.unwrap_or(needed);
    if horizon < needed {
        return Err(Error::Horizon { horizon, needed });
    }
    let model = ArithmeticModel::new(sys.params.n, sys.layout.engaged)?;
    let batches = opts.trials.div_ceil(64);
    let records: Vec<MMTrial> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let first = 64 * b;
            run_batch(sys, opts, &model, first, (opts.trials - first).min(64), horizon)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let count = |f: &dyn Fn(&MMTrial) -> bool| records.iter().filter(|r| f(r)).count() as u64;
    let t0 = sys.layout.t0;
    let pairs = if opts.pairs { opts.trials / 2 } else { 0 };
    let cb = sys.codebook();
    Ok(ExperimentReport {
        n: sys.params.n,
        tape_len: sys.layout.tape_len,
        engaged: sys.layout.engaged,
        n_vars: sys.n_vars(),
        t0,
        horizon,
        trials: opts.trials,
        condition_e: opts.condition_e,
        event_e: count(&|r| r.event_e),
        event_f: count(&|r| r.event_f),
        event_ef: count(&|r| r.event_e && r.event_f),
        hit_s_plus: count(&|r| r.hit_s_plus),
        window_pass: count(&|r| r.window_pass),
        window_pass_given_ef: count(&|r| r.event_e && r.event_f && r.window_pass),
        pairs,
        pairs_coalesced_by_t0: count(&|r| r.trial % 2 == 0 && r.coalesced_t.is_some_and(|t| t <= t0)),
        p_e_exact: crude_block_prob(cb.k(), cb.chunks).powi(sys.layout.engaged as i32),
        predicted_counter_success: sys.bundle.counter.predicted_success,
        records,
    })
}

fn mask_of(bit: bool) -> u64 {
    if bit {
        !0
    } else {
        0
    }
}

fn run_batch(
    sys: &MMSystem,
    opts: &ExperimentOptions,
    model: &ArithmeticModel,
    first: u64,
    live: u64,
    horizon: u64,
) -> Result<Vec<MMTrial>> {
    let live_n = live as usize;
    let states: Vec<State> = (first..first + live)
        .map(|t| random_init(sys, opts.seed, t, opts.condition_e))
        .collect();
    let event_e: Vec<bool> = states.iter().map(|s| sys.event_e(s)).collect();
    let mut lanes = Lanes::from_states(&states)?;
    drop(states);
    let (l, t0, settle) = (sys.layout.tape_len as u64, sys.layout.t0, sys.settle_time());
    let n = sys.n_vars();
    let mut coalesced: Vec<Option<u64>> = vec![None; live_n];
    let mut bad_f = 0u64;
    let mut miss = 0u64;
    let mut bad_window = 0u64;
    let mut v0: Vec<Option<Vec<u64>>> = vec![None; live_n];
    let fixed = sys.counter_fixed(settle);
    for t in 0..=horizon {
        if t > 0 {
            lanes.step(&sys.net)?;
        }
        if t == settle {
            for (v, g) in sys.layout.counter.clone().enumerate() {
                bad_f |= lanes.get(g) ^ mask_of(fixed.get(v));
            }
        }
        // pairs (2j, 2j+1) inside the batch; `first` is always even
        let open = (0..live_n / 2).any(|j| coalesced[2 * j].is_none());
        if opts.pairs && open {
            let even = 0x5555_5555_5555_5555u64;
            let mut diff = 0u64;
            for v in 0..n {
                let w = lanes.get(v);
                diff |= (w ^ (w >> 1)) & even;
            }
            for j in (0..live_n).step_by(2) {
                if j + 1 < live_n && coalesced[j].is_none() && diff >> j & 1 == 0 {
                    coalesced[j] = Some(t);
                    coalesced[j + 1] = Some(t);
                }
            }
        }
        if t == t0 {
            for v in 0..n {
                miss |= lanes.get(v) ^ mask_of(sys.s_plus.get(v));
            }
        }
        if t >= t0 && (t - t0).is_multiple_of(l) && (t - t0) / l <= opts.macro_steps {
            let k = (t - t0) / l;
            let blocks: Vec<Vec<usize>> = (0..sys.layout.engaged)
                .map(|slot| sys.layout.block_vars(sys.layout.slot_pos(slot, t)))
                .collect();
            for (j, start) in v0.iter_mut().enumerate() {
                if bad_window >> j & 1 == 1 {
                    continue;
                }
                let vals: Option<Vec<u64>> = blocks
                    .iter()
                    .map(|b| sys.codebook().decode(&lanes.lane_bits(j, b)))
                    .collect();
                let ok = match (&*start, vals) {
                    (_, None) => false,
                    (None, Some(v)) => {
                        *start = Some(v);
                        true
                    }
                    (Some(a), Some(v)) => model.after(a, k) == v,
                };
                if !ok {
                    bad_window |= 1 << j;
                }
            }
        }
    }
    Ok((0..live_n)
        .map(|j| {
            let trial = first + j as u64;
            MMTrial {
                trial,
                seed: trial_seed(opts.seed, trial),
                event_e: event_e[j],
                event_f: bad_f >> j & 1 == 0,
                coalesced_t: coalesced[j],
                hit_s_plus: miss >> j & 1 == 0,
                window_pass: bad_window >> j & 1 == 0,
            }
        })
        .collect())
}
