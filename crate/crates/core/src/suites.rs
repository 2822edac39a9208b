//! Verification suites shared by the command line and the acceptance run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuitkit::Circuit;
use crate::coding::CodeBook;
use crate::error::Result;
use crate::gadgets::{
    counter_monte_carlo, entry_bits, oracle_increment, oracle_normalize, x_star, CounterSystem,
    ScheduleEntry,
};
use crate::mmsys::{run_experiments, ExperimentOptions, MMSystem};
use crate::netcore::{
    monotonicity_check_net, random_monotonicity_violations, structure_report, Network,
};

/// Exhaustive checking is used up to this many inputs.
pub const EXHAUSTIVE_MAX_INPUTS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub failures: u64,
    pub exhaustive: bool,
    pub detail: String,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {} ({} cases, {} failures, {}){}",
            self.suite,
            if self.pass() { "pass" } else { "FAIL" },
            self.cases,
            self.failures,
            if self.exhaustive { "exhaustive" } else { "sampled" },
            if self.detail.is_empty() { String::new() } else { format!("; {}", self.detail) }
        )
    }
}

/// Every schedule entry a counter word of `m` chunks can carry.
pub fn all_entries(cb: &CodeBook, m: usize) -> Vec<ScheduleEntry> {
    let span = cb.radix.pow(m as u32);
    let mut v = vec![ScheduleEntry::Code { i: 0, enable: false }, ScheduleEntry::CrudeMarker];
    v.extend((1..=span).map(|i| ScheduleEntry::Code { i, enable: true }));
    v
}

/// The increment circuit against its oracle on every coding input and
/// every schedule entry.
pub fn increment_suite(f1: &Circuit, cb: &CodeBook, m: usize) -> Result<SuiteReport> {
    let n = cb.capacity().unwrap_or(u64::MAX);
    let (mut cases, mut failures) = (0, 0);
    let mut first = String::new();
    for e in all_entries(cb, m) {
        let r = entry_bits(cb, m, &e)?;
        for v in 0..n {
            let x = cb.encode(v)?;
            let mut input = x.clone();
            input.extend(&r);
            cases += 1;
            if f1.eval(&input)? != oracle_increment(cb, &x, &e)? {
                failures += 1;
                if first.is_empty() {
                    first = format!("first mismatch at value {v}, entry {e:?}");
                }
            }
        }
    }
    Ok(SuiteReport {
        suite: "f1".into(),
        cases,
        failures,
        exhaustive: true,
        detail: first,
    })
}

/// The normalizer against its formula: exhaustive up to 16 inputs,
/// `samples` random inputs beyond.
pub fn normalizer_suite(f3: &Circuit, cb: &CodeBook, samples: u64, seed: u64) -> Result<SuiteReport> {
    let r = f3.n_inputs();
    let star = x_star(cb);
    let exhaustive = r <= 16;
    let total = if exhaustive { 1u64 << r } else { samples };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut cases, mut failures) = (0, 0);
    let mut first = String::new();
    let mut done = 0u64;
    while done < total {
        let take = (total - done).min(64);
        let words: Vec<u64> = if exhaustive {
            (0..r)
                .map(|i| (0..take).fold(0u64, |w, j| w | (((done + j) >> i) & 1) << j))
                .collect()
        } else {
            (0..r).map(|_| rng.gen()).collect()
        };
        let out = f3.eval_words(&words)?;
        for j in 0..take {
            let z: Vec<bool> = words.iter().map(|w| w >> j & 1 == 1).collect();
            let got: Vec<bool> = out.iter().map(|w| w >> j & 1 == 1).collect();
            cases += 1;
            if got != oracle_normalize(cb, &z, &star)? {
                failures += 1;
                if first.is_empty() {
                    first = format!("first mismatch at case {}", done + j);
                }
            }
        }
        done += take;
    }
    Ok(SuiteReport {
        suite: "f3".into(),
        cases,
        failures,
        exhaustive,
        detail: first,
    })
}

/// Bi-quadratic structure: every variable has in-degree and out-degree
/// at most 2.
pub fn structure_suite(net: &Network) -> SuiteReport {
    let rep = structure_report(net);
    SuiteReport {
        suite: "structure".into(),
        cases: net.len() as u64,
        failures: u64::from(!rep.bi_quadratic),
        exhaustive: true,
        detail: format!("max fan-out {}", rep.fan_out.iter().max().copied().unwrap_or(0)),
    }
}

/// Monotonicity of the global map: exhaustive on tiny networks, random
/// ordered pairs otherwise.
pub fn monotone_suite(net: &Network, pairs: u64, seed: u64) -> Result<SuiteReport> {
    if net.len() <= EXHAUSTIVE_MAX_INPUTS {
        let ok = monotonicity_check_net(net)?;
        return Ok(SuiteReport {
            suite: "monotone".into(),
            cases: (net.len() as u64) << net.len(),
            failures: u64::from(!ok),
            exhaustive: true,
            detail: String::new(),
        });
    }
    let bad = random_monotonicity_violations(net, pairs, seed) as u64;
    Ok(SuiteReport {
        suite: "monotone".into(),
        cases: pairs,
        failures: bad,
        exhaustive: false,
        detail: String::new(),
    })
}

/// Monotonicity of a combinational circuit: all covering pairs up to
/// `EXHAUSTIVE_MAX_INPUTS` inputs, random ordered pairs beyond.
pub fn circuit_monotone_suite(c: &Circuit, pairs: u64, seed: u64) -> Result<SuiteReport> {
    let r = c.n_inputs();
    let mut failures = 0u64;
    let exhaustive = r <= EXHAUSTIVE_MAX_INPUTS;
    let cases = if exhaustive {
        let total = 1u64 << r;
        let mut images: Vec<Vec<bool>> = Vec::with_capacity(total as usize);
        for base in (0..total).step_by(64) {
            let take = (total - base).min(64);
            let words: Vec<u64> = (0..r)
                .map(|i| (0..take).fold(0u64, |w, j| w | (((base + j) >> i) & 1) << j))
                .collect();
            let out = c.eval_words(&words)?;
            images.extend((0..take).map(|j| out.iter().map(|w| w >> j & 1 == 1).collect::<Vec<bool>>()));
        }
        let mut n = 0;
        for x in 0..total as usize {
            for i in 0..r {
                if x >> i & 1 == 0 {
                    n += 1;
                    let (lo, hi) = (&images[x], &images[x | 1 << i]);
                    if lo.iter().zip(hi).any(|(&a, &b)| a && !b) {
                        failures += 1;
                    }
                }
            }
        }
        n
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut done = 0u64;
        while done < pairs {
            let take = (pairs - done).min(64);
            let live = if take == 64 { !0 } else { (1u64 << take) - 1 };
            let lo: Vec<u64> = (0..r).map(|_| rng.gen()).collect();
            let hi: Vec<u64> = lo.iter().map(|&a| a | (rng.gen::<u64>() & rng.gen::<u64>())).collect();
            let (ol, oh) = (c.eval_words(&lo)?, c.eval_words(&hi)?);
            let bad = ol.iter().zip(&oh).fold(0u64, |acc, (a, b)| acc | (a & !b)) & live;
            failures += u64::from(bad.count_ones());
            done += take;
        }
        pairs
    };
    Ok(SuiteReport {
        suite: "monotone".into(),
        cases,
        failures,
        exhaustive,
        detail: String::new(),
    })
}

/// Counter trials from uniform hidden states; fails when the success
/// fraction falls more than three standard errors below the prediction.
pub fn counter_suite(c: &CounterSystem, trials: u64, seed: u64) -> SuiteReport {
    let r = counter_monte_carlo(c, trials, seed);
    let p = r.predicted;
    let se = (p * (1.0 - p) / trials.max(1) as f64).sqrt();
    let ok = r.fraction >= p - 3.0 * se;
    SuiteReport {
        suite: "counter".into(),
        cases: trials,
        failures: u64::from(!ok),
        exhaustive: false,
        detail: format!("success {:.4}, predicted {:.4}", r.fraction, p),
    }
}

/// Trials conditioned on event E: each one with counter success must hit
/// `s+` at `t0` and follow the arithmetic model for `macro_steps`.
pub fn mm_suite(sys: &MMSystem, trials: u64, seed: u64, macro_steps: u64) -> Result<SuiteReport> {
    let opts = ExperimentOptions {
        trials,
        seed,
        macro_steps,
        condition_e: true,
        pairs: false,
        ..Default::default()
    };
    let r = run_experiments(sys, &opts)?;
    let failures = r
        .records
        .iter()
        .filter(|t| t.event_e && t.event_f && !(t.hit_s_plus && t.window_pass))
        .count() as u64;
    Ok(SuiteReport {
        suite: "mm".into(),
        cases: r.event_ef,
        failures,
        exhaustive: false,
        detail: format!("{} of {} trials had E and F", r.event_ef, trials),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::build_tape_gadgets;
    use crate::mmsys::{assemble, plan, PlanRequest};

    #[test]
    fn toy_suites_pass() {
        let p = plan(&PlanRequest::toy()).unwrap();
        let cb = p.codebook().unwrap();
        let (f1, f3, _) = build_tape_gadgets(&cb, p.m).unwrap();
        assert!(increment_suite(&f1, &cb, p.m).unwrap().pass());
        let r = normalizer_suite(&f3, &cb, 1000, 1).unwrap();
        assert!(r.pass() && r.exhaustive && r.cases == 1 << 10, "{}", r.line());
        let sys = assemble(&p).unwrap();
        assert!(structure_suite(&sys.net).pass());
        assert!(monotone_suite(&sys.net, 2000, 3).unwrap().pass());
        assert!(circuit_monotone_suite(&f3, 0, 0).unwrap().pass());
        assert!(circuit_monotone_suite(&f1, 5000, 4).unwrap().pass());
        let mm = mm_suite(&sys, 64, 2, 3).unwrap();
        assert!(mm.pass() && mm.cases == 64, "{}", mm.line());
    }

    #[test]
    fn permuted_outputs_are_caught() {
        let cb = crate::coding::make_codebook(
            crate::coding::FriendlyPair::new(2, num_rational::Ratio::from_integer(1)).unwrap(),
            2,
        )
        .unwrap();
        let (_, f3, _) = build_tape_gadgets(&cb, 1).unwrap();
        let wrong = Circuit::layered(
            f3.n_inputs(),
            f3.gates().to_vec(),
            f3.outputs().iter().rev().copied().collect(),
        )
        .unwrap();
        assert!(!normalizer_suite(&wrong, &cb, 0, 0).unwrap().pass());
    }
}
