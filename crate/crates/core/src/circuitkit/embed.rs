use std::collections::BTreeMap;
use std::ops::Range;

use serde::Serialize;

use super::circuit::Circuit;
use crate::error::{Error, Result};
use crate::netcore::{Gate, Network};

/// Where an embedded circuit landed in the network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Placement {
    /// Network variables feeding the circuit's inputs, in order.
    pub inputs: Vec<usize>,
    /// Network variables holding the circuit's outputs, in order.
    pub outputs: Vec<usize>,
    /// Freshly allocated variables (hidden, plus outputs without targets).
    pub fresh: Range<usize>,
    pub depth: usize,
}

/// Grows a network one variable at a time. Every variable must receive a
/// gate before `finish`.
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    gates: Vec<Option<Gate>>,
    labels: BTreeMap<usize, String>,
    preset: BTreeMap<usize, bool>,
}

impl NetBuilder {
    pub fn new() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn alloc(&mut self, n: usize) -> Range<usize> {
        let start = self.gates.len();
        self.gates.resize(start + n, None);
        start..start + n
    }

    /// A variable that keeps its value forever.
    pub fn holder(&mut self) -> usize {
        let v = self.alloc(1).start;
        self.gates[v] = Some(Gate::copy(v));
        v
    }

    pub fn is_set(&self, v: usize) -> bool {
        self.gates[v].is_some()
    }

    pub fn set(&mut self, v: usize, g: Gate) -> Result<()> {
        match self.gates.get_mut(v) {
            None => Err(Error::InvalidGate {
                var: v,
                reason: "not allocated".into(),
            }),
            Some(Some(_)) => Err(Error::InvalidGate {
                var: v,
                reason: "gate already set".into(),
            }),
            Some(slot) => {
                *slot = Some(g);
                Ok(())
            }
        }
    }

    pub fn label(&mut self, v: usize, name: impl Into<String>) {
        self.labels.insert(v, name.into());
    }

    pub fn preset(&mut self, v: usize, value: bool) {
        self.preset.insert(v, value);
    }

    /// Place `c` reading `sources`. Outputs go to `targets` when given
    /// (they must be allocated and still unset), otherwise to fresh
    /// variables.
    pub fn embed(
        &mut self,
        c: &Circuit,
        sources: &[usize],
        targets: Option<&[usize]>,
    ) -> Result<Placement> {
        let p = self.reserve(c, targets)?;
        self.connect(c, &p, sources)
    }

    fn reserve(&mut self, c: &Circuit, targets: Option<&[usize]>) -> Result<Placement> {
        let n_out = c.outputs().len();
        if let Some(t) = targets {
            if t.len() != n_out {
                return Err(Error::Width {
                    expected: n_out,
                    got: t.len(),
                });
            }
            if let Some(&v) = t.iter().find(|&&v| v >= self.len() || self.is_set(v)) {
                return Err(Error::InvalidGate {
                    var: v,
                    reason: "output target unavailable".into(),
                });
            }
        }
        let fresh_count = c.size() - if targets.is_some() { n_out } else { 0 };
        let fresh = self.alloc(fresh_count);
        let mut next = fresh.start;
        let mut outputs = vec![usize::MAX; n_out];
        let mut out_pos = BTreeMap::new();
        for (k, &o) in c.outputs().iter().enumerate() {
            out_pos.insert(o, k);
        }
        for v in c.n_inputs()..c.n_vars() {
            if let Some(&k) = out_pos.get(&v) {
                if let Some(t) = targets {
                    outputs[k] = t[k];
                    continue;
                }
                outputs[k] = next;
            }
            next += 1;
        }
        Ok(Placement {
            inputs: Vec::new(),
            outputs,
            fresh,
            depth: c.depth(),
        })
    }

    fn connect(&mut self, c: &Circuit, p: &Placement, sources: &[usize]) -> Result<Placement> {
        if sources.len() != c.n_inputs() {
            return Err(Error::Width {
                expected: c.n_inputs(),
                got: sources.len(),
            });
        }
        if let Some(&v) = sources.iter().find(|&&v| v >= self.len()) {
            return Err(Error::Dangling { var: v });
        }
        let out_pos: BTreeMap<usize, usize> =
            c.outputs().iter().enumerate().map(|(k, &o)| (o, k)).collect();
        let mut map = sources.to_vec();
        let mut next = p.fresh.start;
        for v in c.n_inputs()..c.n_vars() {
            match out_pos.get(&v) {
                Some(&k) if p.outputs[k] < p.fresh.start || p.outputs[k] >= p.fresh.end => {
                    map.push(p.outputs[k])
                }
                _ => {
                    map.push(next);
                    next += 1;
                }
            }
        }
        for v in c.n_inputs()..c.n_vars() {
            let g = c.gate(v).remap(|x| map[x]);
            self.set(map[v], g)?;
        }
        Ok(Placement {
            inputs: sources.to_vec(),
            ..p.clone()
        })
    }

    pub fn finish(self) -> Result<Network> {
        let mut gates = Vec::with_capacity(self.gates.len());
        for (v, g) in self.gates.into_iter().enumerate() {
            gates.push(g.ok_or(Error::Dangling { var: v })?);
        }
        let mut reads = vec![0usize; gates.len()];
        for g in &gates {
            for &x in g.inputs() {
                reads[x as usize] += 1;
            }
        }
        if let Some((var, &count)) = reads.iter().enumerate().find(|(_, &r)| r > 2) {
            return Err(Error::FanOut { var, count });
        }
        let mut net = Network::new(gates)?;
        net.labels = self.labels;
        net.preset = self.preset;
        Ok(net)
    }
}

/// Source of one circuit input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wire {
    /// A fresh self-holding variable.
    Holder,
    /// Output `index` of part `part` (feedback between parts is allowed).
    Output { part: usize, index: usize },
}

/// One wire list per part, in the order of that part's inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WiringPlan {
    pub parts: Vec<Vec<Wire>>,
}

/// Place several circuits into one network.
pub fn embed(parts: &[Circuit], plan: &WiringPlan) -> Result<(Network, Vec<Placement>)> {
    if plan.parts.len() != parts.len() {
        return Err(Error::Width {
            expected: parts.len(),
            got: plan.parts.len(),
        });
    }
    let mut nb = NetBuilder::new();
    let mut reserved = Vec::with_capacity(parts.len());
    for c in parts {
        reserved.push(nb.reserve(c, None)?);
    }
    let mut placements = Vec::with_capacity(parts.len());
    for (c, (p, wires)) in parts.iter().zip(reserved.iter().zip(&plan.parts)) {
        let mut sources = Vec::with_capacity(wires.len());
        for w in wires {
            sources.push(match *w {
                Wire::Holder => nb.holder(),
                Wire::Output { part, index } => *reserved
                    .get(part)
                    .and_then(|q| q.outputs.get(index))
                    .ok_or_else(|| Error::Invalid(format!("no output {index} on part {part}")))?,
            });
        }
        placements.push(nb.connect(c, p, &sources)?);
    }
    Ok((nb.finish()?, placements))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuitkit::{identity, reduce_tree};
    use crate::netcore::{run, structure_report, Op, State};

    #[test]
    fn identity_fed_by_holders() {
        let id = identity(3).unwrap();
        let plan = WiringPlan {
            parts: vec![vec![Wire::Holder; 3]],
        };
        let (net, pl) = embed(&[id], &plan).unwrap();
        let mut s = State::zeros(net.len());
        s.set(pl[0].inputs[0], true);
        s.set(pl[0].inputs[2], true);
        let s1 = crate::netcore::step(&net, &s).unwrap();
        let out: Vec<bool> = pl[0].outputs.iter().map(|&v| s1.get(v)).collect();
        assert_eq!(out, vec![true, false, true]);
    }

    #[test]
    fn and_tree_writes_after_its_depth() {
        let c = reduce_tree(Op::And, 4).unwrap();
        let mut nb = NetBuilder::new();
        let src: Vec<usize> = (0..4).map(|_| nb.holder()).collect();
        let p = nb.embed(&c, &src, None).unwrap();
        let net = nb.finish().unwrap();
        assert_eq!(p.depth, 2);
        for x in 0..16u64 {
            let mut s = State::random(net.len(), &mut crate::rng::trial_rng(x, 0));
            for (j, &v) in src.iter().enumerate() {
                s.set(v, x >> j & 1 == 1);
            }
            let end = run(&net, &s, 2, None).unwrap();
            assert_eq!(end.get(p.outputs[0]), x == 15);
        }
    }

    #[test]
    fn shared_source_counts_twice() {
        let id = identity(1).unwrap();
        let plan = WiringPlan {
            parts: vec![vec![Wire::Holder], vec![Wire::Output { part: 0, index: 0 }], vec![
                Wire::Output { part: 0, index: 0 },
            ]],
        };
        let (net, pl) = embed(&[id.clone(), id.clone(), id], &plan).unwrap();
        let rep = structure_report(&net);
        assert_eq!(rep.fan_out[pl[0].outputs[0]], 2);
        assert!(rep.bi_quadratic);
    }

    #[test]
    fn over_budget_and_dangling_are_refused() {
        let id = identity(1).unwrap();
        let plan = WiringPlan {
            parts: vec![
                vec![Wire::Holder],
                vec![Wire::Output { part: 0, index: 0 }],
                vec![Wire::Output { part: 0, index: 0 }],
                vec![Wire::Output { part: 0, index: 0 }],
            ],
        };
        let parts = vec![id.clone(); 4];
        assert!(matches!(embed(&parts, &plan), Err(Error::FanOut { .. })));
        let mut nb = NetBuilder::new();
        nb.alloc(2);
        nb.set(0, Gate::copy(1)).unwrap();
        assert_eq!(nb.finish().unwrap_err(), Error::Dangling { var: 1 });
    }

    #[test]
    fn outputs_can_land_on_targets() {
        let c = reduce_tree(Op::Or, 2).unwrap();
        let mut nb = NetBuilder::new();
        let target = nb.alloc(1).start;
        let a = nb.holder();
        let b = nb.holder();
        let p = nb.embed(&c, &[a, b], Some(&[target])).unwrap();
        assert_eq!(p.outputs, vec![target]);
        assert!(nb.finish().is_ok());
    }
}
