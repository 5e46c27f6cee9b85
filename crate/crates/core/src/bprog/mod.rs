//! Layered `D`-way branching programs and their time/space/cumulative-memory
//! costs.
//!
//! Layer `t` holds `L_t` nodes; every non-final node queries one input and
//! has one out-edge per domain value, all landing in layer `t + 1`. Edges may
//! carry output pairs `(j, o_j)`. Inputs, values and output positions are
//! 0-based.

mod blocks;
mod ram;
mod reductions;

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use blocks::{adaptive_blocks, exp_blocks, exp_interval, interval_layers, simple_blocks, Block, BlockDecomposition, OutputTargets};
pub use ram::{counting_sort_ram, RamTrace};
pub use reductions::{rank_to_sort, read_then_emit, sort_to_rank};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub to: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<(usize, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpNode {
    /// Queried input index; `None` on the final layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<usize>,
    /// `edges[a]` is followed when the queried input equals `a`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<Edge>,
}

impl BpNode {
    pub fn sink() -> Self {
        BpNode { query: None, edges: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingProgram {
    pub domain_size: u64,
    pub inputs: usize,
    pub layers: Vec<Vec<BpNode>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    /// Output pairs in the order they were emitted.
    pub outputs: Vec<(usize, u64)>,
    /// Node index visited in each layer.
    pub path: Vec<usize>,
}

impl RunOutput {
    /// Outputs as a vector indexed by position; `None` where nothing was
    /// emitted. A later pair overwrites an earlier one.
    pub fn output_vector(&self, len: usize) -> Vec<Option<u64>> {
        let mut v = vec![None; len];
        for &(j, o) in &self.outputs {
            if j < len {
                v[j] = Some(o);
            }
        }
        v
    }
}

impl BranchingProgram {
    pub fn length(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn widths(&self) -> Vec<u64> {
        self.layers.iter().map(|l| l.len() as u64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedProgram(msg));
        if self.domain_size == 0 {
            return bad("empty domain".into());
        }
        if self.layers.first().map(Vec::len) != Some(1) {
            return bad("first layer must hold exactly the root".into());
        }
        let last = self.layers.len() - 1;
        for (t, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                return bad(format!("layer {t} is empty"));
            }
            for (u, node) in layer.iter().enumerate() {
                if t == last {
                    if !node.edges.is_empty() {
                        return bad(format!("final-layer node {t}:{u} has out-edges"));
                    }
                    continue;
                }
                match node.query {
                    Some(i) if i < self.inputs => {}
                    Some(i) => return bad(format!("node {t}:{u} queries input {i} of {}", self.inputs)),
                    None => return bad(format!("node {t}:{u} has no query")),
                }
                if node.edges.len() as u64 != self.domain_size {
                    return bad(format!(
                        "node {t}:{u} has {} out-edges, expected {}",
                        node.edges.len(),
                        self.domain_size
                    ));
                }
                if let Some(e) = node.edges.iter().find(|e| e.to >= self.layers[t + 1].len()) {
                    return bad(format!("node {t}:{u} points to missing node {}:{}", t + 1, e.to));
                }
            }
        }
        Ok(())
    }

    pub fn run(&self, x: &[u64]) -> Result<RunOutput> {
        self.validate()?;
        if x.len() != self.inputs {
            return Err(Error::ShapeMismatch(format!("expected {} inputs, got {}", self.inputs, x.len())));
        }
        if let Some(&a) = x.iter().find(|&&a| a >= self.domain_size) {
            return Err(Error::OutOfRange(format!("input value {a} outside domain of {}", self.domain_size)));
        }
        let mut at = 0;
        let mut path = vec![0];
        let mut outputs = Vec::new();
        for layer in &self.layers[..self.layers.len() - 1] {
            let node = &layer[at];
            let edge = &node.edges[x[node.query.expect("validated")] as usize];
            outputs.extend_from_slice(&edge.outputs);
            at = edge.to;
            path.push(at);
        }
        Ok(RunOutput { outputs, path })
    }

    pub fn metrics(&self) -> CostProfile {
        CostProfile::from_widths(self.widths())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostProfile {
    pub widths: Vec<u64>,
    pub time: usize,
    pub space: f64,
    pub cm: f64,
}

impl CostProfile {
    pub fn from_widths(widths: Vec<u64>) -> Self {
        let logs = widths.iter().map(|&w| (w.max(1) as f64).log2());
        CostProfile {
            time: widths.len().saturating_sub(1),
            space: logs.clone().fold(0.0, f64::max),
            cm: logs.sum(),
            widths,
        }
    }

    pub fn log_widths(&self) -> Vec<f64> {
        self.widths.iter().map(|&w| (w.max(1) as f64).log2()).collect()
    }
}

/// Reads `layer,width` rows (a header row is skipped).
pub fn read_width_csv<R: Read>(input: R) -> Result<Vec<u64>> {
    let mut rows: Vec<(usize, u64)> = Vec::new();
    for rec in csv::Reader::from_reader(input).deserialize() {
        rows.push(rec?);
    }
    rows.sort_unstable();
    if rows.iter().enumerate().any(|(i, &(t, _))| t != i) {
        return Err(crate::error::invalid("width profile layers must be 0..T without gaps"));
    }
    Ok(rows.into_iter().map(|(_, w)| w).collect())
}

pub fn write_width_csv<W: Write>(widths: &[u64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["layer", "width"])?;
    for (t, width) in widths.iter().enumerate() {
        w.write_record([t.to_string(), width.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn echo_first() -> BranchingProgram {
        let edges = (0..3).map(|a| Edge { to: 0, outputs: vec![(0, a)] }).collect();
        BranchingProgram {
            domain_size: 3,
            inputs: 1,
            layers: vec![vec![BpNode { query: Some(0), edges }], vec![BpNode::sink()]],
        }
    }

    #[test]
    fn one_layer_echo() {
        let p = echo_first();
        for a in 0..3 {
            let r = p.run(&[a]).unwrap();
            assert_eq!(r.outputs, vec![(0, a)]);
            assert_eq!(r.path, vec![0, 0]);
        }
    }

    #[test]
    fn missing_edge_is_malformed() {
        let mut p = echo_first();
        p.layers[0][0].edges.pop();
        assert!(matches!(p.run(&[0]), Err(Error::MalformedProgram(_))));
    }

    #[test]
    fn profile_arithmetic() {
        let c = CostProfile::from_widths(vec![1, 2, 4]);
        assert_eq!((c.time, c.space, c.cm), (2, 2.0, 3.0));
        let c = CostProfile::from_widths(vec![1, 1, 1]);
        assert_eq!((c.space, c.cm), (0.0, 0.0));
        let c = CostProfile::from_widths(vec![1, 8, 2, 8]);
        assert_eq!((c.space, c.cm), (3.0, 7.0));
    }

    #[test]
    fn width_csv_round_trip() {
        let mut buf = Vec::new();
        write_width_csv(&[1, 4, 2], &mut buf).unwrap();
        assert_eq!(read_width_csv(buf.as_slice()).unwrap(), vec![1, 4, 2]);
    }

    #[test]
    fn json_round_trip() {
        let p = echo_first();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<BranchingProgram>(&text).unwrap(), p);
    }
}
