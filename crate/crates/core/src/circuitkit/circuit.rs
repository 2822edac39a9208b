use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::{Gate, GateRepr, Network, NetworkFile, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    /// Strictly layered: each gate reads only the level right below it.
    Circuit,
    /// Feedback allowed; only meaningful when simulated as a network.
    IoSystem,
}

/// Variables `0..n_inputs` are the input set D; gate `j` defines variable
/// `n_inputs + j`. Outputs R are listed explicitly; every other gate
/// variable is hidden.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
    depth: usize,
    kind: CircuitKind,
    levels: Vec<usize>,
}

impl Circuit {
    /// A strictly layered circuit; levels and depth are derived.
    pub fn layered(n_inputs: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Circuit> {
        let n = n_inputs + gates.len();
        let mut levels = vec![0usize; n];
        for (j, g) in gates.iter().enumerate() {
            let v = n_inputs + j;
            let mut lv = None;
            for &x in g.inputs() {
                let x = x as usize;
                if x >= v {
                    return Err(Error::InvalidGate {
                        var: v,
                        reason: format!("reads {x}, not a lower variable"),
                    });
                }
                match lv {
                    None => lv = Some(levels[x]),
                    Some(l) if l != levels[x] => {
                        return Err(Error::InvalidGate {
                            var: v,
                            reason: "inputs on different levels".into(),
                        })
                    }
                    _ => {}
                }
            }
            levels[v] = lv.expect("gate has inputs") + 1;
        }
        let depth = check_outputs(n_inputs, n, &outputs)
            .and_then(|_| {
                let d = levels[outputs[0]];
                if outputs.iter().all(|&o| levels[o] == d) {
                    Ok(d)
                } else {
                    Err(Error::Invalid("outputs on different levels".into()))
                }
            })?;
        Ok(Circuit {
            n_inputs,
            gates,
            outputs,
            depth,
            kind: CircuitKind::Circuit,
            levels,
        })
    }

    /// An input-output system with feedback and a stated depth.
    pub fn io_system(
        n_inputs: usize,
        gates: Vec<Gate>,
        outputs: Vec<usize>,
        depth: usize,
    ) -> Result<Circuit> {
        let n = n_inputs + gates.len();
        for (j, g) in gates.iter().enumerate() {
            if let Some(&x) = g.inputs().iter().find(|&&x| x as usize >= n) {
                return Err(Error::InvalidGate {
                    var: n_inputs + j,
                    reason: format!("input {x} out of range"),
                });
            }
        }
        check_outputs(n_inputs, n, &outputs)?;
        if depth == 0 {
            return Err(Error::Invalid("depth must be positive".into()));
        }
        Ok(Circuit {
            n_inputs,
            gates,
            outputs,
            depth,
            kind: CircuitKind::IoSystem,
            levels: Vec::new(),
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_vars(&self) -> usize {
        self.n_inputs + self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, v: usize) -> Gate {
        self.gates[v - self.n_inputs]
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn kind(&self) -> CircuitKind {
        self.kind
    }

    /// Level of each variable (inputs at 0). Empty for io systems.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn hidden(&self) -> Vec<usize> {
        let mut is_out = vec![false; self.n_vars()];
        for &o in &self.outputs {
            is_out[o] = true;
        }
        (self.n_inputs..self.n_vars()).filter(|&v| !is_out[v]).collect()
    }

    /// Non-input variable count (hidden plus outputs).
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Reads of each variable by gates inside the circuit.
    pub fn fan_out(&self) -> Vec<u32> {
        let mut f = vec![0u32; self.n_vars()];
        for g in &self.gates {
            for &x in g.inputs() {
                f[x as usize] += 1;
            }
        }
        f
    }

    pub fn is_bi_quadratic(&self) -> bool {
        self.fan_out().iter().all(|&f| f <= 2)
    }

    /// Combinational value of the outputs.
    pub fn eval(&self, input: &[bool]) -> Result<Vec<bool>> {
        if input.len() != self.n_inputs {
            return Err(Error::Width {
                expected: self.n_inputs,
                got: input.len(),
            });
        }
        let words: Vec<u64> = input.iter().map(|&b| u64::from(b)).collect();
        Ok(self
            .eval_words(&words)?
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect())
    }

    /// Bit-sliced evaluation: bit `j` of every word is one independent input.
    pub fn eval_words(&self, input: &[u64]) -> Result<Vec<u64>> {
        if self.kind != CircuitKind::Circuit {
            return Err(Error::NotCombinational);
        }
        if input.len() != self.n_inputs {
            return Err(Error::Width {
                expected: self.n_inputs,
                got: input.len(),
            });
        }
        let mut val = Vec::with_capacity(self.n_vars());
        val.extend_from_slice(input);
        for g in &self.gates {
            let w = g.op.apply_word(val[g.a()], val[g.b()]);
            val.push(w);
        }
        Ok(self.outputs.iter().map(|&o| val[o]).collect())
    }

    /// The circuit as a network whose inputs are self-holding COPY variables.
    pub fn to_network(&self) -> Network {
        let mut gates: Vec<Gate> = (0..self.n_inputs).map(Gate::copy).collect();
        gates.extend_from_slice(&self.gates);
        Network::new(gates).expect("circuit indices are in range")
    }

    pub fn to_file(&self) -> CircuitFile {
        let net = self.to_network().to_file();
        CircuitFile {
            version: net.version,
            n_vars: net.n_vars,
            gates: net.gates,
            labels: net.labels,
            inputs: (0..self.n_inputs).collect(),
            outputs: self.outputs.clone(),
            depth: self.depth,
            kind: self.kind,
        }
    }

    pub fn from_file(f: CircuitFile) -> Result<Circuit> {
        let n_inputs = f.inputs.len();
        if f.inputs.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::Parse("inputs must be the leading variables".into()));
        }
        let net = Network::from_file(NetworkFile {
            version: f.version,
            n_vars: f.n_vars,
            gates: f.gates,
            labels: f.labels,
            preset: BTreeMap::new(),
        })?;
        let gates = net.gates()[n_inputs..].to_vec();
        let c = match f.kind {
            CircuitKind::Circuit => Circuit::layered(n_inputs, gates, f.outputs)?,
            CircuitKind::IoSystem => Circuit::io_system(n_inputs, gates, f.outputs, f.depth)?,
        };
        if c.depth != f.depth {
            return Err(Error::Parse(format!(
                "declared depth {} but levels give {}",
                f.depth, c.depth
            )));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Circuit> {
        Circuit::from_file(serde_json::from_str(s)?)
    }

    /// Counts of COPY, AND and OR gates.
    pub fn op_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            let k = match g.op {
                Op::Copy => "copy",
                Op::And => "and",
                Op::Or => "or",
            };
            *m.entry(k).or_insert(0) += 1;
        }
        m
    }
}

fn check_outputs(n_inputs: usize, n: usize, outputs: &[usize]) -> Result<()> {
    if outputs.is_empty() {
        return Err(Error::Invalid("circuit needs outputs".into()));
    }
    let mut seen = vec![false; n];
    for &o in outputs {
        if o < n_inputs || o >= n {
            return Err(Error::Invalid(format!("output {o} is not a gate variable")));
        }
        if std::mem::replace(&mut seen[o], true) {
            return Err(Error::Invalid(format!("output {o} listed twice")));
        }
    }
    Ok(())
}

/// Network file fields plus the circuit interface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitFile {
    pub version: u32,
    pub n_vars: usize,
    pub gates: Vec<GateRepr>,
    #[serde(default)]
    pub labels: BTreeMap<usize, String>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub depth: usize,
    pub kind: CircuitKind,
}
