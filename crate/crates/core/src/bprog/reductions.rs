//! Decision-tree builders and the rank/sort program transformations.

use std::collections::HashMap;

use super::{BpNode, BranchingProgram, Edge};
use crate::{Error, Result};

/// Decision tree that reads `x_0..x_{n-1}` in order and then spends `n`
/// more layers emitting `(j, f(x)[j])`, one pair per layer. Layer `t <= n`
/// has `d^t` nodes; the emitting layers keep `d^n`.
pub fn read_then_emit(n: usize, d: u64, f: impl Fn(&[u64]) -> Vec<u64>) -> Result<BranchingProgram> {
    if n == 0 || d == 0 {
        return Err(crate::error::invalid("need n >= 1 and a nonempty domain"));
    }
    let leaves = d
        .checked_pow(n as u32)
        .filter(|&l| l <= 1 << 20)
        .ok_or_else(|| Error::GuardExceeded(format!("{d}^{n} leaves")))? as usize;
    let mut layers = Vec::with_capacity(2 * n + 1);
    for t in 0..n {
        let width = (d as usize).pow(t as u32);
        layers.push(
            (0..width)
                .map(|u| BpNode {
                    query: Some(t),
                    edges: (0..d as usize).map(|a| Edge { to: u * d as usize + a, outputs: vec![] }).collect(),
                })
                .collect(),
        );
    }
    let inputs: Vec<Vec<u64>> = (0..leaves)
        .map(|mut u| {
            let mut x = vec![0; n];
            for slot in x.iter_mut().rev() {
                *slot = (u % d as usize) as u64;
                u /= d as usize;
            }
            x
        })
        .collect();
    let values: Vec<Vec<u64>> = inputs.iter().map(|x| f(x)).collect();
    if values.iter().any(|v| v.len() != n) {
        return Err(Error::ShapeMismatch("f must return n outputs".into()));
    }
    for j in 0..n {
        layers.push(
            (0..leaves)
                .map(|u| BpNode {
                    query: Some(0),
                    edges: (0..d).map(|_| Edge { to: u, outputs: vec![(j, values[u][j])] }).collect(),
                })
                .collect(),
        );
    }
    layers.push(vec![BpNode::sink(); leaves]);
    Ok(BranchingProgram { domain_size: d, inputs: n, layers })
}

/// From a program sorting composite values `x_i = x'_i * n + i` over
/// `[nN]` to an `[N]`-way program ranking `x'`: the query of `x_i` follows
/// the edge for the composite value and each output `(j, y)` becomes
/// `(j, y mod n)`. Layer widths are unchanged.
pub fn sort_to_rank(p: &BranchingProgram) -> Result<BranchingProgram> {
    p.validate()?;
    let n = p.inputs as u64;
    if n == 0 || !p.domain_size.is_multiple_of(n) {
        return Err(Error::EncodingMismatch(format!(
            "domain {} is not n*N for n = {n}",
            p.domain_size
        )));
    }
    let big_n = p.domain_size / n;
    let layers = p
        .layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .map(|node| match node.query {
                    None => BpNode::sink(),
                    Some(i) => BpNode {
                        query: Some(i),
                        edges: (0..big_n)
                            .map(|a| {
                                let e = &node.edges[(a * n + i as u64) as usize];
                                Edge { to: e.to, outputs: e.outputs.iter().map(|&(j, y)| (j, y % n)).collect() }
                            })
                            .collect(),
                    },
                })
                .collect()
        })
        .collect();
    Ok(BranchingProgram { domain_size: big_n, inputs: p.inputs, layers })
}

/// From a ranking program to a sorting program: every layer is followed by
/// a new layer in which an edge that output `(i, pi)` queries `x_pi` and
/// outputs `(i, x_pi)`. Edges without output pass through a node that
/// queries `x_0` and ignores it. Supports at most one output per edge.
pub fn rank_to_sort(p: &BranchingProgram) -> Result<BranchingProgram> {
    p.validate()?;
    let mut layers = Vec::with_capacity(2 * p.layers.len() - 1);
    for t in 0..p.length() {
        let mut mid_index: HashMap<(usize, Option<(usize, usize)>), usize> = HashMap::new();
        let mut mid = Vec::new();
        let mut upper = Vec::with_capacity(p.layers[t].len());
        for node in &p.layers[t] {
            let mut edges = Vec::with_capacity(node.edges.len());
            for e in &node.edges {
                let pending = match e.outputs.as_slice() {
                    [] => None,
                    &[(i, pi)] if pi < p.inputs as u64 => Some((i, pi as usize)),
                    [(_, pi)] => {
                        return Err(Error::EncodingMismatch(format!("rank output {pi} is not an input index")))
                    }
                    many => {
                        return Err(Error::MalformedProgram(format!(
                            "edge carries {} outputs; one per edge is supported",
                            many.len()
                        )))
                    }
                };
                let idx = *mid_index.entry((e.to, pending)).or_insert_with(|| {
                    mid.push(BpNode {
                        query: Some(pending.map_or(0, |(_, pi)| pi)),
                        edges: (0..p.domain_size)
                            .map(|a| Edge { to: e.to, outputs: pending.map(|(i, _)| vec![(i, a)]).unwrap_or_default() })
                            .collect(),
                    });
                    mid.len() - 1
                });
                edges.push(Edge { to: idx, outputs: vec![] });
            }
            upper.push(BpNode { query: node.query, edges });
        }
        layers.push(upper);
        layers.push(mid);
    }
    layers.push(p.layers.last().expect("validated nonempty").clone());
    Ok(BranchingProgram { domain_size: p.domain_size, inputs: p.inputs, layers })
}
