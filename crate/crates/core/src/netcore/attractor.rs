use std::collections::HashMap;

use serde::Serialize;

use super::network::Network;
use super::sim::step_into;
use super::state::State;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Above this many variables `Auto` switches from state hashing to Brent.
pub const HASH_MAX_VARS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleMethod {
    Auto,
    Hash,
    Brent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AttractorReport {
    pub transient: u64,
    pub period: u64,
    #[serde(serialize_with = "ser_state_hex")]
    pub entry_state: State,
    pub steps_used: u64,
    pub truncated: bool,
}

fn ser_state_hex<S: serde::Serializer>(s: &State, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&s.to_hex())
}

pub fn find_attractor(net: &Network, s0: &State, max_steps: u64) -> Result<AttractorReport> {
    find_attractor_with(net, s0, max_steps, CycleMethod::Auto)
}

pub fn find_attractor_with(
    net: &Network,
    s0: &State,
    max_steps: u64,
    method: CycleMethod,
) -> Result<AttractorReport> {
    if s0.len() != net.len() {
        return Err(Error::Dimension {
            expected: net.len(),
            got: s0.len(),
        });
    }
    if max_steps == 0 {
        return Err(Error::Invalid("max_steps must be positive".into()));
    }
    match method {
        CycleMethod::Hash => Ok(by_hashing(net, s0, max_steps)),
        CycleMethod::Brent => Ok(by_brent(net, s0, max_steps)),
        CycleMethod::Auto if net.len() <= HASH_MAX_VARS => Ok(by_hashing(net, s0, max_steps)),
        CycleMethod::Auto => Ok(by_brent(net, s0, max_steps)),
    }
}

fn truncated(last: State, steps: u64) -> AttractorReport {
    AttractorReport {
        transient: 0,
        period: 0,
        entry_state: last,
        steps_used: steps,
        truncated: true,
    }
}

fn by_hashing(net: &Network, s0: &State, max_steps: u64) -> AttractorReport {
    let mut seen: HashMap<u128, Vec<usize>> = HashMap::new();
    let mut trail: Vec<State> = vec![s0.clone()];
    seen.entry(s0.digest()).or_default().push(0);
    let mut next = State::zeros(net.len());
    for t in 1..=max_steps {
        step_into(net, trail.last().expect("nonempty"), &mut next);
        let h = next.digest();
        if let Some(hits) = seen.get(&h) {
            if let Some(&mu) = hits.iter().find(|&&i| trail[i] == next) {
                return AttractorReport {
                    transient: mu as u64,
                    period: t - mu as u64,
                    entry_state: trail.swap_remove(mu),
                    steps_used: t,
                    truncated: false,
                };
            }
        }
        seen.entry(h).or_default().push(trail.len());
        trail.push(next.clone());
    }
    truncated(trail.pop().expect("nonempty"), max_steps)
}

fn by_brent(net: &Network, s0: &State, max_steps: u64) -> AttractorReport {
    let n = net.len();
    let mut scratch = State::zeros(n);
    let mut advance = |s: &mut State| {
        step_into(net, s, &mut scratch);
        std::mem::swap(s, &mut scratch);
    };
    let mut used = 0u64;

    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = s0.clone();
    let mut hare = s0.clone();
    advance(&mut hare);
    used += 1;
    while tortoise != hare {
        if used >= max_steps {
            return truncated(hare, used);
        }
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        advance(&mut hare);
        used += 1;
        lam += 1;
    }

    let mut tortoise = s0.clone();
    let mut hare = s0.clone();
    for _ in 0..lam {
        advance(&mut hare);
    }
    used += lam;
    let mut mu = 0u64;
    while tortoise != hare {
        if used >= max_steps.saturating_mul(2) {
            return truncated(hare, used);
        }
        advance(&mut tortoise);
        advance(&mut hare);
        used += 2;
        mu += 1;
    }
    AttractorReport {
        transient: mu,
        period: lam,
        entry_state: tortoise,
        steps_used: used,
        truncated: false,
    }
}

/// Least `t <= horizon` with `f^t(a) = f^t(b)`.
pub fn coalescence_time(net: &Network, a: &State, b: &State, horizon: u64) -> Result<Option<u64>> {
    for s in [a, b] {
        if s.len() != net.len() {
            return Err(Error::Dimension {
                expected: net.len(),
                got: s.len(),
            });
        }
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    let mut scratch = State::zeros(net.len());
    for t in 0..=horizon {
        if x == y {
            return Ok(Some(t));
        }
        if t == horizon {
            break;
        }
        step_into(net, &x, &mut scratch);
        std::mem::swap(&mut x, &mut scratch);
        step_into(net, &y, &mut scratch);
        std::mem::swap(&mut y, &mut scratch);
    }
    Ok(None)
}

/// Share of variables that stay constant along the cycle of `report`.
pub fn frozen_fraction(net: &Network, report: &AttractorReport) -> Result<f64> {
    if report.truncated {
        return Err(Error::Truncated);
    }
    let entry = &report.entry_state;
    if entry.len() != net.len() {
        return Err(Error::Dimension {
            expected: net.len(),
            got: entry.len(),
        });
    }
    let mut moved = vec![0u64; entry.words().len()];
    let mut cur = entry.clone();
    let mut scratch = State::zeros(net.len());
    for _ in 0..report.period {
        step_into(net, &cur, &mut scratch);
        std::mem::swap(&mut cur, &mut scratch);
        for ((m, a), b) in moved.iter_mut().zip(cur.words()).zip(entry.words()) {
            *m |= a ^ b;
        }
    }
    let moving: usize = moved.iter().map(|w| w.count_ones() as usize).sum();
    Ok((net.len() - moving) as f64 / net.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{run, Gate};

    fn ring3() -> Network {
        Network::new(vec![Gate::copy(2), Gate::copy(0), Gate::copy(1)]).unwrap()
    }

    #[test]
    fn ring_and_fixed_point() {
        let net = ring3();
        let s0 = State::from_bits(&[true, false, false]);
        for m in [CycleMethod::Hash, CycleMethod::Brent] {
            let r = find_attractor_with(&net, &s0, 100, m).unwrap();
            assert_eq!((r.transient, r.period, r.truncated), (0, 3, false));
            assert_eq!(frozen_fraction(&net, &r).unwrap(), 0.0);
        }
        let r = find_attractor(&net, &State::from_bits(&[true, true, false]), 100).unwrap();
        assert_eq!(frozen_fraction(&net, &r).unwrap(), 0.0);

        let id = Network::new(vec![Gate::copy(0), Gate::copy(1)]).unwrap();
        let r = find_attractor(&id, &State::from_bits(&[true, false]), 10).unwrap();
        assert_eq!((r.transient, r.period), (0, 1));
        assert_eq!(frozen_fraction(&id, &r).unwrap(), 1.0);
    }

    #[test]
    fn transient_is_found() {
        // 0 <- 1 <- 2, with 2 held: two steps until everything equals s_2
        let net = Network::new(vec![Gate::copy(1), Gate::copy(2), Gate::copy(2)]).unwrap();
        let s0 = State::from_bits(&[false, false, true]);
        for m in [CycleMethod::Hash, CycleMethod::Brent] {
            let r = find_attractor_with(&net, &s0, 100, m).unwrap();
            assert_eq!((r.transient, r.period), (2, 1));
            assert_eq!(r.entry_state, State::from_bits(&[true, true, true]));
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let net = ring3();
        let s0 = State::from_bits(&[true, false, false]);
        for m in [CycleMethod::Hash, CycleMethod::Brent] {
            let r = find_attractor_with(&net, &s0, 2, m).unwrap();
            assert!(r.truncated);
            assert!(matches!(frozen_fraction(&net, &r), Err(Error::Truncated)));
        }
        assert!(find_attractor(&net, &s0, 0).is_err());
    }

    #[test]
    fn coalescence_examples() {
        let funnel = Network::new(vec![Gate::and(1, 1), Gate::copy(1)]).unwrap();
        let a = State::from_bits(&[true, false]);
        let b = State::from_bits(&[false, false]);
        assert_eq!(coalescence_time(&funnel, &a, &a, 10).unwrap(), Some(0));
        assert_eq!(coalescence_time(&funnel, &a, &b, 10).unwrap(), Some(1));
        let net = ring3();
        let x = State::from_bits(&[true, false, false]);
        let y = State::from_bits(&[false, true, false]);
        assert_eq!(coalescence_time(&net, &x, &y, 100).unwrap(), None);
    }

    #[test]
    fn entry_state_returns_after_period() {
        let net = Network::new(vec![
            Gate::copy(3),
            Gate::or(0, 2),
            Gate::copy(1),
            Gate::copy(0),
            Gate::and(4, 0),
        ])
        .unwrap();
        let s0 = State::from_bits(&[true, false, false, false, true]);
        let r = find_attractor(&net, &s0, 1000).unwrap();
        assert_eq!(run(&net, &r.entry_state, r.period, None).unwrap(), r.entry_state);
    }
}
