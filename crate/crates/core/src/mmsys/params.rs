use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coding::{eps_ladder, find_friendly_pair, make_codebook, CodeBook, FriendlyPair};
use crate::error::{Error, Result};
use crate::gadgets::{build_tape_gadgets, counter_plan, r_width, CounterMode};

/// How strictly the size inequalities are enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Every inequality must hold.
    Strict,
    /// Only tape coverage and positive moduli are enforced; the rest is
    /// reported.
    Desk,
    /// As `Desk`, with a fixed number of engaged slots.
    Toy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub p: f64,
    pub c: f64,
    pub n: Option<u64>,
    /// Target variable count; picks `n` when `n` is absent.
    pub big_n: Option<usize>,
    pub mode: CounterMode,
    pub profile: Profile,
    /// Engaged slots for the toy profile.
    pub engaged: Option<usize>,
}

impl PlanRequest {
    pub fn new(p: f64, c: f64, n: u64, mode: CounterMode, profile: Profile) -> PlanRequest {
        PlanRequest {
            p,
            c,
            n: Some(n),
            big_n: None,
            mode,
            profile,
            engaged: None,
        }
    }

    /// The small end-to-end instance: `n = 8`, two engaged slots, seeded
    /// counter.
    pub fn toy() -> PlanRequest {
        PlanRequest {
            engaged: Some(2),
            ..PlanRequest::new(0.9, 1.3, 8, CounterMode::Seeded, Profile::Toy)
        }
    }
}

/// One inequality with both sides evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: String,
    pub pass: bool,
    /// Whether a failure aborts planning under the chosen profile.
    pub enforced: bool,
}

impl Check {
    pub fn new(name: &str, lhs: f64, relation: &str, rhs: f64, enforced: bool) -> Check {
        let pass = match relation {
            "<" => lhs < rhs,
            "<=" => lhs <= rhs,
            ">" => lhs > rhs,
            ">=" => lhs >= rhs,
            "==" => (lhs - rhs).abs() < 1e-9,
            _ => unreachable!("relation {relation}"),
        };
        Check {
            name: name.into(),
            lhs,
            rhs,
            relation: relation.into(),
            pass,
            enforced,
        }
    }
}

fn ratio_str(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Every parameter of a planned tape system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MMParams {
    pub p: f64,
    pub c: f64,
    pub c_p: f64,
    pub mode: CounterMode,
    pub profile: Profile,
    pub k: usize,
    pub eps: String,
    pub delta: String,
    pub delta0: String,
    pub n: u64,
    pub log_n: u32,
    /// Chunks per tape block.
    pub ell: usize,
    /// Data chunks per counter word.
    pub m: usize,
    pub beta: usize,
    /// Tape length `|I|`.
    pub tape_len: usize,
    /// Slots that count; the remaining `tau1 + tau2 + tau3` form `Q`.
    pub engaged: usize,
    pub tau1: usize,
    pub tau2: usize,
    pub tau3: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma: f64,
    pub nu: f64,
    pub q1: f64,
    pub q2: f64,
    pub ones_generator_k: Option<usize>,
    pub zeros_generator_k: Option<usize>,
    pub target_n: Option<usize>,
    pub checks: Vec<Check>,
}

impl MMParams {
    pub fn pair(&self) -> Result<FriendlyPair> {
        let (p, q) = self
            .eps
            .split_once('/')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .ok_or_else(|| Error::Parse(format!("eps {:?}", self.eps)))?;
        FriendlyPair::new(self.k, Ratio::new(p, q))
    }

    pub fn codebook(&self) -> Result<CodeBook> {
        make_codebook(self.pair()?, self.ell)
    }

    pub fn q_len(&self) -> usize {
        self.tape_len - self.engaged
    }

    pub fn r_width(&self) -> usize {
        self.k * (self.m + 1)
    }

    pub fn block_width(&self) -> usize {
        self.k * self.ell
    }

    pub fn eps_f64(&self) -> f64 {
        parse_ratio(&self.eps)
    }

    pub fn delta_f64(&self) -> f64 {
        parse_ratio(&self.delta)
    }

    pub fn delta0_f64(&self) -> f64 {
        parse_ratio(&self.delta0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn from_json(s: &str) -> Result<MMParams> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn violated(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn parse_ratio(s: &str) -> f64 {
    s.split_once('/')
        .and_then(|(a, b)| Some(a.parse::<f64>().ok()? / b.parse::<f64>().ok()?))
        .unwrap_or(f64::NAN)
}

/// `log2(c) (1 + eps + delta) < 1`.
pub fn logest(c: f64, eps: f64, delta: f64) -> bool {
    c.log2() * (1.0 + eps + delta) < 1.0
}

/// First ladder value below 1 satisfying `logest`, and the first ladder
/// value below that.
pub fn pick_deltas(c: f64, eps: Ratio<u64>) -> Result<(Ratio<u64>, Ratio<u64>)> {
    let ladder: Vec<Ratio<u64>> = eps_ladder(64).into_iter().filter(|d| *d < Ratio::one()).collect();
    let e = eps.to_f64().unwrap_or(f64::NAN);
    let delta = *ladder
        .iter()
        .find(|d| logest(c, e, d.to_f64().unwrap_or(f64::NAN)))
        .ok_or_else(|| Error::Infeasible(format!("no delta on the ladder satisfies logest for c = {c}")))?;
    let delta0 = *ladder
        .iter()
        .find(|d| **d < delta && !d.is_zero())
        .ok_or_else(|| Error::Infeasible("no delta0 below delta".into()))?;
    Ok((delta, delta0))
}

/// Component targets with `q1 + q2 - 1 > sqrt(p)`: both halfway between
/// `(1 + sqrt p)/2` and 1.
pub fn component_targets(p: f64) -> (f64, f64) {
    let q = ((1.0 + p.sqrt()) / 2.0 + 1.0) / 2.0;
    (q, q)
}

const MAX_LOG_N: u32 = 40;

pub fn plan(req: &PlanRequest) -> Result<MMParams> {
    if !(req.p > 0.0 && req.p < 1.0) {
        return Err(Error::Invalid(format!("p = {} outside (0, 1)", req.p)));
    }
    let pair = find_friendly_pair(req.c)?;
    match (req.n, req.big_n) {
        (Some(n), _) => plan_n(req, pair, n),
        (None, Some(big_n)) => {
            // largest suitable n whose tape alone fits in N
            let mut best = None;
            let mut n = pair.radix();
            while n.ilog2() <= MAX_LOG_N {
                match plan_n(req, pair, n) {
                    Ok(p) if p.tape_len * p.block_width() <= big_n => best = Some(p),
                    Ok(_) => break,
                    Err(Error::Infeasible(_)) => {}
                    Err(e) => return Err(e),
                }
                n = n.checked_mul(pair.radix()).ok_or_else(|| Error::Infeasible("n overflows".into()))?;
            }
            let mut p = best.ok_or_else(|| Error::Infeasible(format!("no suitable n fits N = {big_n}")))?;
            p.target_n = Some(big_n);
            Ok(p)
        }
        (None, None) => Err(Error::Invalid("plan needs n or N".into())),
    }
}

fn plan_n(req: &PlanRequest, pair: FriendlyPair, n: u64) -> Result<MMParams> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Infeasible(format!("n = {n} is not a power of two")));
    }
    let log_n = n.ilog2();
    let eps = pair.eps;
    let bits = Ratio::from_integer(log_n as u64) * (Ratio::one() + eps);
    if !(bits / Ratio::from_integer(pair.k as u64)).is_integer() {
        return Err(Error::Infeasible(format!("n = {n} is not suitable for {pair}")));
    }
    let ell = (bits / Ratio::from_integer(pair.k as u64)).to_integer() as usize;
    let cb = make_codebook(pair, ell)?;
    if cb.capacity() != Some(n) {
        return Err(Error::Infeasible(format!("n = {n} is not K^l for {pair}")));
    }
    if ell < 2 {
        return Err(Error::Infeasible("blocks need two chunks to be crude".into()));
    }
    let (delta, delta0) = pick_deltas(req.c, eps)?;
    let (q1, q2) = component_targets(req.p);
    let lc = req.c.log2();
    let logn = log_n as f64;
    let strict = req.profile == Profile::Strict;

    let mut m = 1usize;
    let mut state = None;
    for _ in 0..32 {
        let (f1, f3, _) = build_tape_gadgets(&cb, m)?;
        let (tau1, tau3) = (f1.depth(), f3.depth());
        let mut tau2 = 1;
        let mut gens = (None, None);
        let mut tape_len;
        loop {
            let tau_sum = tau1 + tau2 + tau3;
            tape_len = match (req.profile, req.engaged) {
                (Profile::Toy, e) => tau_sum + e.unwrap_or(2),
                _ => {
                    let mut beta = tau_sum / log_n as usize + 1;
                    if strict {
                        let g = |t: usize| t as f64 / logn;
                        let gamma = g(tau1) + g(tau2) + g(tau3) + 1.0;
                        let nu = g(tau1) + g(tau2) + 2.0 * g(tau3);
                        let need = ((gamma + nu / lc) / delta0.to_f64().unwrap_or(1.0)).ceil() as usize;
                        beta = beta.max(need);
                    }
                    beta * log_n as usize
                }
            };
            if req.mode == CounterMode::Seeded {
                break;
            }
            let ring = tape_len * r_width(&cb, m);
            let (k1, k0, depth) = counter_plan(ring / 2, ring - ring / 2, q2)?;
            gens = (Some(k1), Some(k0));
            if depth <= tau2 {
                break;
            }
            tau2 = depth;
        }
        let engaged = tape_len - (tau1 + tau2 + tau3);
        let mut need_m = 1;
        // K^l = n, so more chunks only matter once the moduli are already
        // non-positive; the positivity check reports that case
        while need_m < ell && cb.radix.checked_pow(need_m as u32).is_some_and(|s| s + 1 < engaged as u64) {
            need_m += 1;
        }
        state = Some((tau1, tau2, tau3, tape_len, engaged, gens));
        if need_m <= m {
            break;
        }
        m = need_m;
    }
    let (tau1, tau2, tau3, tape_len, engaged, gens) =
        state.ok_or_else(|| Error::Infeasible("parameter search did not settle".into()))?;
    let beta = tape_len.div_ceil(log_n as usize);
    let g = |t: usize| t as f64 / logn;
    let (gamma1, gamma2, gamma3) = (g(tau1), g(tau2), g(tau3));
    let gamma = gamma1 + gamma2 + gamma3 + 1.0;
    let nu = gamma1 + gamma2 + 2.0 * gamma3;
    let (e, d, d0) = (
        eps.to_f64().unwrap_or(f64::NAN),
        delta.to_f64().unwrap_or(f64::NAN),
        delta0.to_f64().unwrap_or(f64::NAN),
    );
    let q_len = tape_len - engaged;
    let checks = vec![
        Check::new("logest: log2(c)(1+eps+delta) < 1", lc * (1.0 + e + d), "<", 1.0, true),
        Check::new("tape coverage: |I| > tau1+tau2+tau3", tape_len as f64, ">", (tau1 + tau2 + tau3) as f64, true),
        Check::new("engaged moduli positive: n - (engaged-1) >= 1", (n as f64) - (engaged as f64 - 1.0), ">=", 1.0, true),
        Check::new("moduli positivity: beta log n < n", (beta as f64) * logn, "<", n as f64, strict),
        Check::new("Yest1: gamma <= beta delta0 - nu/log c", gamma, "<=", beta as f64 * d0 - nu / lc, strict),
        Check::new("Qest: |Q| <= nu log n", q_len as f64, "<=", nu * logn, strict),
        Check::new("Rsize: |R| T <= delta0 log n", (r_width(&cb, m) * tape_len) as f64, "<=", d0 * logn, strict),
        Check::new("q1 + q2 - 1 > sqrt(p)", q1 + q2 - 1.0, ">", req.p.sqrt(), true),
        Check::new("|I| = beta log n", tape_len as f64, "==", (beta as f64) * logn, req.profile != Profile::Toy),
    ];
    let params = MMParams {
        p: req.p,
        c: req.c,
        c_p: 2f64.powf(req.p),
        mode: req.mode,
        profile: req.profile,
        k: pair.k,
        eps: ratio_str(&eps),
        delta: ratio_str(&delta),
        delta0: ratio_str(&delta0),
        n,
        log_n,
        ell,
        m,
        beta,
        tape_len,
        engaged,
        tau1,
        tau2,
        tau3,
        gamma1,
        gamma2,
        gamma3,
        gamma,
        nu,
        q1,
        q2,
        ones_generator_k: gens.0,
        zeros_generator_k: gens.1,
        target_n: req.big_n,
        checks,
    };
    let failed: Vec<String> = params
        .checks
        .iter()
        .filter(|c| c.enforced && !c.pass)
        .map(|c| format!("{} ({} {} {})", c.name, c.lhs, c.relation, c.rhs))
        .collect();
    if !failed.is_empty() {
        return Err(Error::Infeasible(failed.join("; ")));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deltas_and_targets() {
        let (d, d0) = pick_deltas(1.3, Ratio::one()).unwrap();
        assert_eq!((d, d0), (Ratio::new(1, 2), Ratio::new(1, 3)));
        assert!(logest(1.3, 1.0, 0.5));
        let (q1, q2) = component_targets(0.9);
        assert!(q1 + q2 - 1.0 > 0.9f64.sqrt());
        assert!(q1 < 1.0);
    }

    #[test]
    fn toy_plan() {
        let p = plan(&PlanRequest::toy()).unwrap();
        assert_eq!((p.k, p.eps.as_str(), p.ell, p.n), (2, "1/1", 3, 8));
        assert_eq!(p.engaged, 2);
        assert_eq!(p.tau2, 1);
        assert_eq!(p.tape_len, p.tau1 + p.tau2 + p.tau3 + 2);
        assert!((p.c_p - 2f64.powf(0.9)).abs() < 1e-12);
        let half = plan(&PlanRequest { p: 0.5, ..PlanRequest::toy() }).unwrap();
        assert!((half.c_p - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn desk_plan_covers_tape() {
        let p = plan(&PlanRequest::new(0.9, 1.3, 16, CounterMode::Seeded, Profile::Desk)).unwrap();
        assert!(p.tape_len > p.tau1 + p.tau2 + p.tau3);
        assert_eq!(p.tape_len % p.log_n as usize, 0);
        assert!(p.engaged >= 1);
        assert!(cb_span(&p) + 1 >= p.engaged as u64);
    }

    fn cb_span(p: &MMParams) -> u64 {
        (1u64 << (p.k / 2)).pow(p.m as u32)
    }

    #[test]
    fn strict_is_reported_infeasible_at_desk_scale() {
        let err = plan(&PlanRequest::new(0.9, 1.3, 16, CounterMode::Seeded, Profile::Strict)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err:?}");
    }

    #[test]
    fn unsuitable_n_is_rejected() {
        let r = PlanRequest::new(0.9, 1.5, 64, CounterMode::Seeded, Profile::Desk);
        assert!(plan(&r).is_err());
    }
}
