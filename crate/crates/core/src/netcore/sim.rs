use super::network::{Network, Op};
use super::state::State;
use crate::error::{Error, Result};

fn check_dim(net: &Network, s: &State) -> Result<()> {
    if s.len() != net.len() {
        return Err(Error::Dimension {
            expected: net.len(),
            got: s.len(),
        });
    }
    Ok(())
}

/// Synchronous update into `next`; reads only `cur`.
pub(crate) fn step_into(net: &Network, cur: &State, next: &mut State) {
    let w = cur.words();
    let out = next.words_mut();
    for (wi, chunk) in net.gates().chunks(64).enumerate() {
        let mut acc = 0u64;
        for (j, g) in chunk.iter().enumerate() {
            let (a, b) = (g.a(), g.b());
            let va = w[a >> 6] >> (a & 63);
            let vb = w[b >> 6] >> (b & 63);
            let v = match g.op {
                Op::Copy => va,
                Op::And => va & vb,
                Op::Or => va | vb,
            };
            acc |= (v & 1) << j;
        }
        out[wi] = acc;
    }
}

/// Observer called with `(t, s(t))`.
pub type Sink<'a> = &'a mut dyn FnMut(u64, &State);

pub fn step(net: &Network, s: &State) -> Result<State> {
    check_dim(net, s)?;
    let mut next = State::zeros(net.len());
    step_into(net, s, &mut next);
    Ok(next)
}

/// `f^t(s0)`. The sink, if given, sees `(τ, s(τ))` for every τ in `0..=t`.
pub fn run(
    net: &Network,
    s0: &State,
    t: u64,
    mut sink: Option<Sink<'_>>,
) -> Result<State> {
    check_dim(net, s0)?;
    let mut cur = s0.clone();
    let mut next = State::zeros(net.len());
    if let Some(f) = sink.as_mut() {
        f(0, &cur);
    }
    for tau in 1..=t {
        step_into(net, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if let Some(f) = sink.as_mut() {
            f(tau, &cur);
        }
    }
    Ok(cur)
}

/// 64 independent trajectories at once: `data[v]` holds variable `v`
/// with trial `j` in bit `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lanes {
    data: Vec<u64>,
    scratch: Vec<u64>,
}

impl Lanes {
    pub fn zeros(n: usize) -> Lanes {
        Lanes {
            data: vec![0; n],
            scratch: vec![0; n],
        }
    }

    pub fn from_states(states: &[State]) -> Result<Lanes> {
        if states.is_empty() || states.len() > 64 {
            return Err(Error::Invalid(format!(
                "lanes hold 1..=64 states, got {}",
                states.len()
            )));
        }
        let n = states[0].len();
        let mut l = Lanes::zeros(n);
        for (j, s) in states.iter().enumerate() {
            if s.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: s.len(),
                });
            }
            for v in 0..n {
                l.data[v] |= u64::from(s.get(v)) << j;
            }
        }
        Ok(l)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> u64 {
        self.data[v]
    }

    #[inline]
    pub fn set(&mut self, v: usize, w: u64) {
        self.data[v] = w;
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn lane(&self, j: usize) -> State {
        let mut s = State::zeros(self.data.len());
        for (v, w) in self.data.iter().enumerate() {
            s.set(v, (w >> j) & 1 == 1);
        }
        s
    }

    /// Lane `j` restricted to the listed variables.
    pub fn lane_bits(&self, j: usize, idx: &[usize]) -> Vec<bool> {
        idx.iter().map(|&v| (self.data[v] >> j) & 1 == 1).collect()
    }

    pub fn step(&mut self, net: &Network) -> Result<()> {
        if net.len() != self.data.len() {
            return Err(Error::Dimension {
                expected: net.len(),
                got: self.data.len(),
            });
        }
        for (out, g) in self.scratch.iter_mut().zip(net.gates()) {
            *out = g.op.apply_word(self.data[g.a()], self.data[g.b()]);
        }
        std::mem::swap(&mut self.data, &mut self.scratch);
        Ok(())
    }
}
