use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::params::{Check, MMParams};
use crate::circuitkit::NetBuilder;
use crate::coding::{is_crude, CodeBook};
use crate::error::{Error, Result};
use crate::gadgets::{build_tape_gadgets, counter_schedule, CounterMode, CounterOptions, GadgetBundle};
use crate::netcore::{run, Gate, Network, State};

/// Where every part of the tape system lives in the network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub tape_len: usize,
    pub block_width: usize,
    pub engaged: usize,
    /// `X_p` occupies `tape.start + p * block_width ..`.
    pub tape: Range<usize>,
    /// Normalizer input, normalizer output, increment output.
    pub i0: usize,
    pub i1: usize,
    pub i2: usize,
    /// Counter variables, including its outputs `r`.
    pub counter: Range<usize>,
    pub r: Vec<usize>,
    /// Delay line variables, including its outputs `r_c`.
    pub delay: Range<usize>,
    pub r_c: Vec<usize>,
    pub f3_hidden: Range<usize>,
    pub f1_hidden: Range<usize>,
    pub dummies: Range<usize>,
    pub dummy_depth: usize,
    pub tau1: usize,
    pub tau2: usize,
    pub tau3: usize,
    /// Every gadget has seen settled inputs by `t1`.
    pub t1: u64,
    /// First time after `t1` with slot `s` sitting at position `s`.
    pub t0: u64,
}

impl Layout {
    pub fn block(&self, p: usize) -> Range<usize> {
        let a = self.tape.start + p * self.block_width;
        a..a + self.block_width
    }

    pub fn block_vars(&self, p: usize) -> Vec<usize> {
        self.block(p).collect()
    }

    /// Position of slot `s` at time `t`.
    pub fn slot_pos(&self, s: usize, t: u64) -> usize {
        let l = self.tape_len as u64;
        ((s as u64 + self.tau2 as u64 + l - 1 + l - t % l) % l) as usize
    }

    /// The slots `Q` that do not count.
    pub fn q_slots(&self) -> Range<usize> {
        self.engaged..self.tape_len
    }

    /// Named disjoint ranges covering every variable.
    pub fn parts(&self) -> Vec<(&'static str, Range<usize>)> {
        vec![
            ("tape", self.tape.clone()),
            ("counter", self.counter.clone()),
            ("delay", self.delay.clone()),
            ("normalizer", self.f3_hidden.clone()),
            ("increment", self.f1_hidden.clone()),
            ("dummies", self.dummies.clone()),
        ]
    }
}

/// A planned and wired tape system.
#[derive(Clone, Debug)]
pub struct MMSystem {
    pub params: MMParams,
    pub layout: Layout,
    pub bundle: GadgetBundle,
    pub net: Network,
    /// State reached at `t0` from every start in event E (and F).
    pub s_plus: State,
}

/// A crude block: an all-zero chunk followed by all-one chunks.
pub fn crude_block(cb: &CodeBook) -> Vec<bool> {
    let k = cb.k();
    (0..cb.width()).map(|i| i >= k).collect()
}

pub fn assemble(params: &MMParams) -> Result<MMSystem> {
    let cb = params.codebook()?;
    let (m, l_len, e) = (params.m, params.tape_len, params.engaged);
    let tape = build_tape_gadgets(&cb, m)?;
    if (tape.0.depth(), tape.1.depth()) != (params.tau1, params.tau3) {
        return Err(Error::Invalid("gadget depths differ from the plan".into()));
    }
    let schedule = counter_schedule(&cb, m, l_len, params.tau2, e)?;
    let opts = CounterOptions {
        ones_k: params.ones_generator_k,
        zeros_k: params.zeros_generator_k,
        min_depth: params.tau2,
    };
    let bundle = GadgetBundle::new(&cb, m, tape, &schedule, params.mode, params.q2, opts)?;
    let (tau1, tau2, tau3) = bundle.taus();
    if tau2 != params.tau2 {
        return Err(Error::Invalid(format!("counter depth {tau2}, planned {}", params.tau2)));
    }
    let w = cb.width();
    let i0 = l_len - 1;
    let i1 = i0 - tau3;
    let i2 = i1 - tau1;

    let mut nb = NetBuilder::new();
    let tape_r = nb.alloc(l_len * w);
    let block = |p: usize| -> Vec<usize> { (tape_r.start + p * w..tape_r.start + (p + 1) * w).collect() };
    for p in 0..l_len {
        for (b, v) in block(p).into_iter().enumerate() {
            nb.label(v, format!("X{p}.{b}"));
        }
    }
    let cp = nb.embed(&bundle.counter.circuit, &[], None)?;
    let c_off = cp.fresh.start;
    for (&v, &val) in &bundle.counter.preset {
        nb.preset(c_off + v, val);
    }
    let r = cp.outputs.clone();
    let dp = nb.embed(&bundle.delay, &r, None)?;
    let r_c = dp.outputs.clone();
    for (b, (&a, &c)) in r.iter().zip(&r_c).enumerate() {
        nb.label(a, format!("R{b}"));
        nb.label(c, format!("Rc{b}"));
    }
    let mut src = block(i0);
    src.extend(&r);
    let f3p = nb.embed(&bundle.f3, &src, Some(&block(i1)))?;
    let mut src = block(i1);
    src.extend(&r_c);
    let f1p = nb.embed(&bundle.f1, &src, Some(&block(i2)))?;
    for p in 0..l_len {
        if p == i1 || p == i2 {
            continue;
        }
        for (a, b) in block(p).into_iter().zip(block((p + 1) % l_len)) {
            nb.set(a, Gate::copy(b))?;
        }
    }

    // dummies: COPY trees hanging off tape blocks other than X_i0, X_i1
    let natural = nb.len();
    let extra = params.target_n.map_or(0, |t| t.saturating_sub(natural));
    let d_start = nb.len();
    let mut dummy_depth = 0;
    if extra > 0 {
        let mut frontier: Vec<usize> = (0..l_len)
            .filter(|&p| p != i0 && p != i1)
            .flat_map(block)
            .collect();
        let mut left = extra;
        let mut first = true;
        while left > 0 {
            let take = if first { frontier.len().min(left) } else { (2 * frontier.len()).min(left) };
            let fresh: Vec<usize> = nb.alloc(take).collect();
            for (j, &v) in fresh.iter().enumerate() {
                let parent = if first { frontier[j] } else { frontier[j / 2] };
                nb.set(v, Gate::copy(parent))?;
            }
            left -= take;
            frontier = fresh;
            first = false;
            dummy_depth += 1;
        }
    }
    let dummies = d_start..nb.len();
    let net = nb.finish()?;

    let (lu, t2) = (l_len as u64, tau2 as u64);
    let t1 = t2 + lu + (tau1 + tau3) as u64;
    let min_t0 = t1 + lu + dummy_depth as u64;
    let phase = (t2 + lu - 1) % lu;
    let t0 = min_t0 + (phase + lu - min_t0 % lu) % lu;
    let layout = Layout {
        tape_len: l_len,
        block_width: w,
        engaged: e,
        tape: tape_r,
        i0,
        i1,
        i2,
        counter: cp.fresh.clone(),
        r,
        delay: dp.fresh.clone(),
        r_c,
        f3_hidden: f3p.fresh.clone(),
        f1_hidden: f1p.fresh.clone(),
        dummies,
        dummy_depth,
        tau1,
        tau2,
        tau3,
        t1,
        t0,
    };
    let mut sys = MMSystem {
        params: params.clone(),
        layout,
        bundle,
        net,
        s_plus: State::zeros(0),
    };
    sys.s_plus = run(&sys.net, &sys.canonical_init(), t0, None)?;
    Ok(sys)
}

impl MMSystem {
    pub fn n_vars(&self) -> usize {
        self.net.len()
    }

    pub fn codebook(&self) -> &CodeBook {
        &self.bundle.codebook
    }

    /// Offset of counter variable 0 in the network.
    pub fn counter_offset(&self) -> usize {
        self.layout.counter.start
    }

    /// Every tape block crude, the counter at its canonical start, all
    /// else 0.
    pub fn canonical_init(&self) -> State {
        let mut s = State::zeros(self.n_vars());
        let crude = crude_block(self.codebook());
        for p in 0..self.layout.tape_len {
            for (v, &b) in self.layout.block(p).zip(&crude) {
                s.set(v, b);
            }
        }
        let off = self.counter_offset();
        self.bundle.counter.write_canonical_init(&mut s, |v| off + v);
        self.apply_preset(&mut s);
        s
    }

    pub fn apply_preset(&self, s: &mut State) {
        for (&v, &b) in &self.net.preset {
            s.set(v, b);
        }
    }

    /// Event E: every engaged slot starts crude.
    pub fn event_e(&self, s0: &State) -> bool {
        let cb = self.codebook();
        (0..self.layout.engaged).all(|s| {
            let p = self.layout.slot_pos(s, 0);
            is_crude(&s0.project(&self.layout.block_vars(p)), cb.k(), cb.chunks).expect("block width")
        })
    }

    /// Time at which event F is checked.
    pub fn settle_time(&self) -> u64 {
        self.bundle.counter.settle_time() as u64
    }

    /// Counter state expected at time `t` once it is settled.
    pub fn counter_fixed(&self, t: u64) -> State {
        self.bundle.counter.fixed_state(t)
    }

    /// Event F on a state observed at `settle_time()`.
    pub fn event_f_at_settle(&self, s: &State) -> bool {
        let fixed = self.counter_fixed(self.settle_time());
        self.layout.counter.clone().enumerate().all(|(v, g)| s.get(g) == fixed.get(v))
    }

    /// Values of the engaged slots at time `t`, when all decode.
    pub fn slot_values(&self, s: &State, t: u64) -> Option<Vec<u64>> {
        (0..self.layout.engaged)
            .map(|slot| {
                let p = self.layout.slot_pos(slot, t);
                self.codebook().decode(&s.project(&self.layout.block_vars(p)))
            })
            .collect()
    }

    /// Every inequality evaluated on the realized sizes.
    pub fn check_constraints(&self) -> Vec<Check> {
        let p = &self.params;
        let enforced = p.profile == super::params::Profile::Strict;
        let logn = p.log_n as f64;
        let lc = p.c.log2();
        let n_total = self.n_vars() as f64;
        let x = (self.layout.tape_len * self.layout.block_width) as f64;
        let y = n_total - x;
        let mut checks = p.checks.clone();
        checks.push(Check::new(
            "Xisize: |X_i| = (1+eps) log n",
            self.layout.block_width as f64,
            "==",
            (1.0 + p.eps_f64()) * logn,
            true,
        ));
        checks.push(Check::new(
            "Yest: |Y| <= (beta delta - nu/log c) log^2 n",
            y,
            "<=",
            (p.beta as f64 * p.delta_f64() - p.nu / lc) * logn * logn,
            enforced,
        ));
        checks.push(Check::new(
            "sizeN lower: beta(1+eps+delta0) log^2 n <= N",
            p.beta as f64 * (1.0 + p.eps_f64() + p.delta0_f64()) * logn * logn,
            "<=",
            n_total,
            enforced,
        ));
        checks.push(Check::new(
            "sizeN upper: N <= (beta(1+eps+delta) - nu/log c) log^2 n",
            n_total,
            "<=",
            (p.beta as f64 * (1.0 + p.eps_f64() + p.delta_f64()) - p.nu / lc) * logn * logn,
            enforced,
        ));
        checks.push(Check::new(
            "|Q| = tau1 + tau2 + tau3",
            self.layout.q_slots().len() as f64,
            "==",
            (self.layout.tau1 + self.layout.tau2 + self.layout.tau3) as f64,
            true,
        ));
        if let Some(t) = p.target_n {
            checks.push(Check::new("N reaches target", n_total, ">=", t as f64, false));
        }
        checks
    }

    pub fn summary(&self) -> SystemSummary {
        SystemSummary {
            n_vars: self.n_vars(),
            tape_vars: self.layout.tape.len(),
            counter_vars: self.layout.counter.len(),
            delay_vars: self.layout.delay.len(),
            normalizer_hidden: self.layout.f3_hidden.len(),
            increment_hidden: self.layout.f1_hidden.len(),
            dummies: self.layout.dummies.len(),
            t0: self.layout.t0,
            t1: self.layout.t1,
            settle_time: self.settle_time(),
            counter_mode: self.params.mode,
            predicted_counter_success: self.bundle.counter.predicted_success,
            predicted_period: super::arith::predicted_period(
                self.params.n,
                self.layout.tape_len,
                self.layout.engaged,
            )
            .map(|p| p.to_string())
            .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub n_vars: usize,
    pub tape_vars: usize,
    pub counter_vars: usize,
    pub delay_vars: usize,
    pub normalizer_hidden: usize,
    pub increment_hidden: usize,
    pub dummies: usize,
    pub t0: u64,
    pub t1: u64,
    pub settle_time: u64,
    pub counter_mode: CounterMode,
    pub predicted_counter_success: f64,
    pub predicted_period: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmsys::{plan, PlanRequest};
    use crate::netcore::structure_report;

    fn toy() -> MMSystem {
        assemble(&plan(&PlanRequest::toy()).unwrap()).unwrap()
    }

    #[test]
    fn parts_partition_the_network() {
        let sys = toy();
        let mut parts = sys.layout.parts();
        parts.sort_by_key(|(_, r)| r.start);
        let mut next = 0;
        for (name, r) in parts {
            assert_eq!(r.start, next, "{name}");
            next = r.end;
        }
        assert_eq!(next, sys.n_vars());
        assert!(structure_report(&sys.net).bi_quadratic);
    }

    #[test]
    fn slot_positions() {
        let sys = toy();
        let l = &sys.layout;
        assert_eq!(l.t0 % l.tape_len as u64, (l.tau2 as u64 + l.tape_len as u64 - 1) % l.tape_len as u64);
        for s in 0..l.tape_len {
            assert_eq!(l.slot_pos(s, l.t0), s);
            assert_eq!(l.slot_pos(s, 0), (s + l.tau2 - 1) % l.tape_len);
            // slot s reaches the normalizer input at time s + tau2
            assert_eq!(l.slot_pos(s, (s + l.tau2) as u64), l.i0);
        }
    }

    #[test]
    fn canonical_run_lands_on_zeroes() {
        let sys = toy();
        let v = sys.slot_values(&sys.s_plus, sys.layout.t0).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v[0] < 8 && v[1] < 7);
    }

    #[test]
    fn dummies_fill_to_target() {
        let mut p = plan(&PlanRequest::toy()).unwrap();
        let base = assemble(&p).unwrap().n_vars();
        p.target_n = Some(base + 500);
        let sys = assemble(&p).unwrap();
        assert_eq!(sys.n_vars(), base + 500);
        assert!(sys.layout.dummy_depth >= 2);
        assert!(structure_report(&sys.net).bi_quadratic);
        let again = assemble(&p).unwrap();
        assert_eq!(again.s_plus, sys.s_plus);
    }
}
