use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Copy,
    And,
    Or,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Copy => 1,
            Op::And | Op::Or => 2,
        }
    }

    #[inline]
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Op::Copy => a,
            Op::And => a & b,
            Op::Or => a | b,
        }
    }

    #[inline]
    pub fn apply_word(self, a: u64, b: u64) -> u64 {
        match self {
            Op::Copy => a,
            Op::And => a & b,
            Op::Or => a | b,
        }
    }
}

/// One regulatory function. A COPY stores its source in both slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: Op,
    ins: [u32; 2],
}

impl Gate {
    pub fn copy(a: usize) -> Gate {
        Gate {
            op: Op::Copy,
            ins: [a as u32, a as u32],
        }
    }

    pub fn and(a: usize, b: usize) -> Gate {
        Gate {
            op: Op::And,
            ins: [a as u32, b as u32],
        }
    }

    pub fn or(a: usize, b: usize) -> Gate {
        Gate {
            op: Op::Or,
            ins: [a as u32, b as u32],
        }
    }

    pub fn binary(op: Op, a: usize, b: usize) -> Gate {
        match op {
            Op::Copy => Gate::copy(a),
            _ => Gate {
                op,
                ins: [a as u32, b as u32],
            },
        }
    }

    pub fn inputs(&self) -> &[u32] {
        &self.ins[..self.op.arity()]
    }

    #[inline]
    pub fn a(&self) -> usize {
        self.ins[0] as usize
    }

    #[inline]
    pub fn b(&self) -> usize {
        self.ins[1] as usize
    }

    /// Same gate with every input index passed through `f`.
    pub fn remap(&self, mut f: impl FnMut(usize) -> usize) -> Gate {
        Gate::binary(self.op, f(self.a()), f(self.b()))
    }
}

/// A synchronous Boolean network: variable `i` is updated by `gates[i]`.
///
/// `preset` lists variables whose initial value is fixed by construction
/// (the ring of a seeded counter); random initial states honor it.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    gates: Vec<Gate>,
    pub labels: BTreeMap<usize, String>,
    pub preset: BTreeMap<usize, bool>,
}

impl Network {
    pub fn new(gates: Vec<Gate>) -> Result<Network> {
        if gates.is_empty() {
            return Err(Error::Invalid("network needs at least one variable".into()));
        }
        let n = gates.len();
        for (i, g) in gates.iter().enumerate() {
            for &x in g.inputs() {
                if x as usize >= n {
                    return Err(Error::InvalidGate {
                        var: i,
                        reason: format!("input {x} out of range for {n} variables"),
                    });
                }
            }
        }
        Ok(Network {
            gates,
            labels: BTreeMap::new(),
            preset: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, i: usize) -> Gate {
        self.gates[i]
    }

    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            version: 1,
            n_vars: self.len(),
            gates: self.gates.iter().map(GateRepr::from).collect(),
            labels: self.labels.clone(),
            preset: self
                .preset
                .iter()
                .map(|(&k, &v)| (k, u8::from(v)))
                .collect(),
        }
    }

    pub fn from_file(f: NetworkFile) -> Result<Network> {
        if f.version != 1 {
            return Err(Error::Parse(format!("unsupported version {}", f.version)));
        }
        if f.gates.len() != f.n_vars {
            return Err(Error::Width {
                expected: f.n_vars,
                got: f.gates.len(),
            });
        }
        let gates = f
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| g.to_gate(i))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Network::new(gates)?;
        net.labels = f.labels;
        for (k, v) in f.preset {
            if k >= net.len() || v > 1 {
                return Err(Error::Parse(format!("bad preset entry {k}:{v}")));
            }
            net.preset.insert(k, v == 1);
        }
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Network> {
        Network::from_file(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateRepr {
    pub op: Op,
    #[serde(rename = "in")]
    pub ins: Vec<usize>,
}

impl From<&Gate> for GateRepr {
    fn from(g: &Gate) -> Self {
        GateRepr {
            op: g.op,
            ins: g.inputs().iter().map(|&x| x as usize).collect(),
        }
    }
}

impl GateRepr {
    pub fn to_gate(&self, var: usize) -> Result<Gate> {
        if self.ins.len() != self.op.arity() {
            return Err(Error::InvalidGate {
                var,
                reason: format!("{:?} takes {} inputs", self.op, self.op.arity()),
            });
        }
        Ok(match self.op {
            Op::Copy => Gate::copy(self.ins[0]),
            op => Gate::binary(op, self.ins[0], self.ins[1]),
        })
    }
}

/// On-disk form of a network, version 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub version: u32,
    pub n_vars: usize,
    pub gates: Vec<GateRepr>,
    #[serde(default)]
    pub labels: BTreeMap<usize, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub preset: BTreeMap<usize, u8>,
}
