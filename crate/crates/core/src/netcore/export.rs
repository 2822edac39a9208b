use std::fmt::Write as _;
use std::io::Write;

use super::network::{Network, Op};
use super::state::{bits_to_hex, State};
use crate::error::{Error, Result};

/// Graphviz rendering of the wiring graph; edges point from input to gate.
pub fn to_dot(net: &Network) -> String {
    let mut s = String::from("digraph coopnet {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n");
    for (i, g) in net.gates().iter().enumerate() {
        let op = match g.op {
            Op::Copy => "COPY",
            Op::And => "AND",
            Op::Or => "OR",
        };
        let name = net
            .labels
            .get(&i)
            .map(|l| format!("{l}\\n"))
            .unwrap_or_default();
        let _ = writeln!(s, "  v{i} [label=\"{name}v{i} {op}\"];");
    }
    for (i, g) in net.gates().iter().enumerate() {
        for &x in g.inputs() {
            let _ = writeln!(s, "  v{x} -> v{i};");
        }
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Debug)]
pub struct TraceGroup {
    pub name: String,
    pub vars: Vec<usize>,
}

/// CSV trace: one row per time step, either every variable as 0/1 or
/// named groups as hex blocks.
pub struct TraceWriter<W: Write> {
    out: csv::Writer<W>,
    groups: Option<Vec<TraceGroup>>,
    n: usize,
}

impl<W: Write> TraceWriter<W> {
    pub fn full(out: W, n: usize) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("v{i}")));
        out.write_record(&header).map_err(io_err)?;
        Ok(TraceWriter {
            out,
            groups: None,
            n,
        })
    }

    pub fn grouped(out: W, n: usize, groups: Vec<TraceGroup>) -> Result<Self> {
        if let Some(bad) = groups.iter().flat_map(|g| &g.vars).find(|&&v| v >= n) {
            return Err(Error::Invalid(format!("trace variable {bad} out of range")));
        }
        let mut out = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(groups.iter().map(|g| g.name.clone()));
        out.write_record(&header).map_err(io_err)?;
        Ok(TraceWriter {
            out,
            groups: Some(groups),
            n,
        })
    }

    pub fn write(&mut self, t: u64, s: &State) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: s.len(),
            });
        }
        let mut row = vec![t.to_string()];
        match &self.groups {
            None => row.extend((0..self.n).map(|i| if s.get(i) { "1" } else { "0" }.to_string())),
            Some(gs) => row.extend(gs.iter().map(|g| bits_to_hex(&s.project(&g.vars)))),
        }
        self.out.write_record(&row).map_err(io_err)
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush().map_err(|e| Error::Parse(e.to_string()))?;
        self.out
            .into_inner()
            .map_err(|e| Error::Parse(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{run, Gate};

    #[test]
    fn dot_lists_edges() {
        let net = Network::new(vec![Gate::copy(1), Gate::and(0, 1)]).unwrap();
        let d = to_dot(&net);
        assert!(d.contains("v1 -> v0;"));
        assert!(d.contains("v0 -> v1;"));
        assert!(d.contains("AND"));
    }

    #[test]
    fn trace_csv() {
        let net = Network::new(vec![Gate::copy(1), Gate::copy(0)]).unwrap();
        let mut w = TraceWriter::full(Vec::new(), 2).unwrap();
        let mut sink = |t: u64, s: &State| w.write(t, s).unwrap();
        run(&net, &State::from_bits(&[true, false]), 2, Some(&mut sink)).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "t,v0,v1\n0,1,0\n1,0,1\n2,1,0\n");

        let groups = vec![TraceGroup {
            name: "pair".into(),
            vars: vec![0, 1],
        }];
        let mut w = TraceWriter::grouped(Vec::new(), 2, groups).unwrap();
        w.write(0, &State::from_bits(&[true, true])).unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        assert_eq!(text, "t,pair\n0,3\n");
    }
}
