use super::circuit::{Circuit, CircuitKind};
use crate::error::{Error, Result};
use crate::netcore::{Gate, Op};

/// A variable together with its level above the inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sig {
    pub var: usize,
    pub level: usize,
}

/// Incremental construction of a strictly layered circuit.
///
/// Binary gates whose inputs sit on different levels get COPY delay chains
/// on the shallower side. Every read of a variable consumes one of its two
/// fan-out slots; `finish` rejects circuits that overspend.
#[derive(Clone, Debug)]
pub struct Builder {
    n_inputs: usize,
    gates: Vec<Gate>,
    levels: Vec<usize>,
}

impl Builder {
    pub fn new(n_inputs: usize) -> Builder {
        Builder {
            n_inputs,
            gates: Vec::new(),
            levels: vec![0; n_inputs],
        }
    }

    pub fn inputs(&self) -> Vec<Sig> {
        (0..self.n_inputs).map(|v| Sig { var: v, level: 0 }).collect()
    }

    pub fn input(&self, i: usize) -> Sig {
        assert!(i < self.n_inputs, "input {i} out of range");
        Sig { var: i, level: 0 }
    }

    fn push(&mut self, g: Gate, level: usize) -> Sig {
        let var = self.levels.len();
        self.gates.push(g);
        self.levels.push(level);
        Sig { var, level }
    }

    pub fn copy(&mut self, s: Sig) -> Sig {
        self.push(Gate::copy(s.var), s.level + 1)
    }

    pub fn delay(&mut self, mut s: Sig, steps: usize) -> Sig {
        for _ in 0..steps {
            s = self.copy(s);
        }
        s
    }

    pub fn align_to(&mut self, s: Sig, level: usize) -> Sig {
        assert!(s.level <= level, "cannot move a signal down");
        self.delay(s, level - s.level)
    }

    pub fn align_all(&mut self, sigs: &[Sig]) -> Vec<Sig> {
        let top = sigs.iter().map(|s| s.level).max().unwrap_or(0);
        sigs.iter().map(|&s| self.align_to(s, top)).collect()
    }

    pub fn gate(&mut self, op: Op, a: Sig, b: Sig) -> Sig {
        if op == Op::Copy {
            return self.copy(a);
        }
        let top = a.level.max(b.level);
        let a = self.align_to(a, top);
        let b = if a.var == b.var { a } else { self.align_to(b, top) };
        self.push(Gate::binary(op, a.var, b.var), top + 1)
    }

    pub fn and(&mut self, a: Sig, b: Sig) -> Sig {
        self.gate(Op::And, a, b)
    }

    pub fn or(&mut self, a: Sig, b: Sig) -> Sig {
        self.gate(Op::Or, a, b)
    }

    /// `c` copies of `s` on one level via a binary COPY tree of depth
    /// `ceil(log2 c)`. For `c = 1` the signal itself is returned.
    pub fn fanout(&mut self, s: Sig, c: usize) -> Vec<Sig> {
        assert!(c >= 1, "fanout needs at least one copy");
        if c == 1 {
            return vec![s];
        }
        let depth = ceil_log2(c);
        let mut counts = vec![c; depth + 1];
        for l in (0..depth).rev() {
            counts[l] = counts[l + 1].div_ceil(2);
        }
        let mut cur = vec![s];
        for &count in counts.iter().skip(1) {
            cur = (0..count).map(|j| self.copy(cur[j / 2])).collect();
        }
        cur
    }

    /// Balanced AND/OR tree; an odd leftover is combined with itself.
    pub fn reduce(&mut self, op: Op, sigs: &[Sig]) -> Sig {
        assert!(!sigs.is_empty(), "reduce needs inputs");
        assert!(op != Op::Copy, "reduce needs a binary op");
        let mut cur = self.align_all(sigs);
        while cur.len() > 1 {
            cur = cur
                .chunks(2)
                .map(|p| match p {
                    [a, b] => self.gate(op, *a, *b),
                    [a] => self.gate(op, *a, *a),
                    _ => unreachable!(),
                })
                .collect();
        }
        cur[0]
    }

    /// Inline a layered circuit on top of `inputs`.
    pub fn instantiate(&mut self, c: &Circuit, inputs: &[Sig]) -> Result<Vec<Sig>> {
        if c.kind() != CircuitKind::Circuit {
            return Err(Error::NotCombinational);
        }
        if inputs.len() != c.n_inputs() {
            return Err(Error::Width {
                expected: c.n_inputs(),
                got: inputs.len(),
            });
        }
        let inputs = self.align_all(inputs);
        let base = inputs.first().map(|s| s.level).unwrap_or(0);
        let mut map: Vec<usize> = inputs.iter().map(|s| s.var).collect();
        for (j, g) in c.gates().iter().enumerate() {
            let v = c.n_inputs() + j;
            let s = self.push(g.remap(|x| map[x]), base + c.levels()[v]);
            map.push(s.var);
        }
        Ok(c.outputs()
            .iter()
            .map(|&o| Sig {
                var: map[o],
                level: base + c.depth(),
            })
            .collect())
    }

    /// Close the circuit: outputs are brought to one level (at least 1),
    /// made distinct and unread, unreachable gates are dropped, and the
    /// fan-out budget is checked.
    pub fn finish(mut self, outputs: &[Sig]) -> Result<Circuit> {
        if outputs.is_empty() {
            return Err(Error::Invalid("circuit needs outputs".into()));
        }
        let top = outputs.iter().map(|s| s.level).max().unwrap_or(0).max(1);
        let mut outs: Vec<Sig> = outputs.iter().map(|&s| self.align_to(s, top)).collect();

        let reads = self.reads();
        let mut seen = vec![false; self.levels.len()];
        let needs_copy = outs.iter().any(|s| {
            s.var < self.n_inputs || reads[s.var] > 0 || std::mem::replace(&mut seen[s.var], true)
        });
        if needs_copy {
            outs = outs.iter().map(|&s| self.copy(s)).collect();
        }

        // keep inputs and everything the outputs depend on
        let n = self.levels.len();
        let mut live = vec![false; n];
        live[..self.n_inputs].iter_mut().for_each(|x| *x = true);
        let mut stack: Vec<usize> = outs.iter().map(|s| s.var).collect();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut live[v], true) || v < self.n_inputs {
                continue;
            }
            for &x in self.gates[v - self.n_inputs].inputs() {
                stack.push(x as usize);
            }
        }
        let mut new_index = vec![usize::MAX; n];
        let mut gates = Vec::new();
        for v in 0..n {
            if !live[v] {
                continue;
            }
            new_index[v] = if v < self.n_inputs {
                v
            } else {
                let id = self.n_inputs + gates.len();
                gates.push(self.gates[v - self.n_inputs].remap(|x| new_index[x]));
                id
            };
        }
        let outputs: Vec<usize> = outs.iter().map(|s| new_index[s.var]).collect();
        let c = Circuit::layered(self.n_inputs, gates, outputs)?;
        if let Some((var, &count)) = c.fan_out().iter().enumerate().find(|(_, &f)| f > 2) {
            return Err(Error::FanOut {
                var,
                count: count as usize,
            });
        }
        Ok(c)
    }

    fn reads(&self) -> Vec<u32> {
        let mut r = vec![0u32; self.levels.len()];
        for g in &self.gates {
            for &x in g.inputs() {
                r[x as usize] += 1;
            }
        }
        r
    }
}

pub fn ceil_log2(c: usize) -> usize {
    assert!(c >= 1);
    (usize::BITS - (c - 1).leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        let got: Vec<usize> = [1, 2, 3, 4, 5, 8, 9, 1024, 1025].iter().map(|&c| ceil_log2(c)).collect();
        assert_eq!(got, vec![0, 1, 2, 2, 3, 3, 4, 10, 11]);
    }

    #[test]
    fn auto_alignment_inserts_delays() {
        let mut b = Builder::new(3);
        let [x, y, z] = [b.input(0), b.input(1), b.input(2)];
        let xy = b.and(x, y);
        let out = b.or(xy, z);
        assert_eq!(out.level, 2);
        let c = b.finish(&[out]).unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.size(), 3);
        assert_eq!(c.eval(&[true, true, false]).unwrap(), vec![true]);
        assert_eq!(c.eval(&[true, false, false]).unwrap(), vec![false]);
    }

    #[test]
    fn finish_rejects_overspent_fan_out() {
        let mut b = Builder::new(1);
        let x = b.input(0);
        let outs: Vec<Sig> = (0..3).map(|_| b.copy(x)).collect();
        assert!(matches!(b.finish(&outs), Err(Error::FanOut { var: 0, count: 3 })));
    }

    #[test]
    fn finish_copies_port_outputs_and_prunes() {
        let mut b = Builder::new(2);
        let x = b.input(0);
        let y = b.input(1);
        let _dead = b.and(x, y);
        let c = b.finish(&[x]).unwrap();
        assert_eq!(c.depth(), 1);
        assert_eq!(c.size(), 1);
    }
}
