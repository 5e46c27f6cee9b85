//! Directed graphs for pebbling and hash-graph labelling.
//!
//! A [`Dag`] stores edges plus cached parent/child lists.  Construction only
//! checks that edge endpoints are in range; acyclicity and the in-degree
//! bound are reported by [`validate`] so that malformed inputs can still be
//! inspected.  Node indexing of every generator is deterministic: row-major
//! for lattices, level-major (widest level first) for pyramids.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Builds a graph from an edge list. Parents and children of each node
    /// are kept in ascending index order.
    pub fn from_edges(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut parents = vec![Vec::new(); node_count];
        let mut children = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            if u >= node_count || v >= node_count {
                return Err(invalid(format!(
                    "edge ({u},{v}) out of range for {node_count} nodes"
                )));
            }
            parents[v].push(u);
            children[u].push(v);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Dag {
            node_count,
            edges,
            parents,
            children,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count && self.children[u].binary_search(&v).is_ok()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.parents[v].len()
    }

    /// Nodes with in-degree zero, ascending.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.node_count)
            .filter(|&v| self.parents[v].is_empty())
            .collect()
    }

    /// Nodes with out-degree zero, ascending.
    pub fn targets(&self) -> Vec<usize> {
        (0..self.node_count)
            .filter(|&v| self.children[v].is_empty())
            .collect()
    }

    /// Kahn order, or `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..self.node_count).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &c in &self.children[u] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == self.node_count).then_some(order)
    }

    pub fn to_json(&self) -> DagJson {
        DagJson {
            nodes: self.node_count,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_json(json: &DagJson) -> Result<Self> {
        Dag::from_edges(json.nodes, json.edges.iter().map(|e| (e[0], e[1])).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json: DagJson = serde_json::from_str(&text)?;
        Dag::from_json(&json)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_json())?)?;
        Ok(())
    }
}

/// On-disk graph format: `{"nodes": N, "edges": [[u,v], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagJson {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Path `0 -> 1 -> ... -> n-1`.
pub fn make_chain(n: usize) -> Result<Dag> {
    if n == 0 {
        return Err(invalid("chain needs at least one node"));
    }
    Dag::from_edges(n, (1..n).map(|i| (i - 1, i)).collect())
}

/// Pyramid of height `h`: the top level holds the `h` sources, each lower
/// level is one node narrower, and node `k` of a level has parents `k` and
/// `k+1` of the level above. The apex (last index) is the single target.
pub fn make_pyramid(h: usize) -> Result<Dag> {
    if h == 0 {
        return Err(invalid("pyramid height must be positive"));
    }
    let mut edges = Vec::new();
    let mut level_start = 0;
    for width in (2..=h).rev() {
        let next_start = level_start + width;
        for k in 0..width - 1 {
            edges.push((level_start + k, next_start + k));
            edges.push((level_start + k + 1, next_start + k));
        }
        level_start = next_start;
    }
    Dag::from_edges(h * (h + 1) / 2, edges)
}

/// Row-major index of lattice cell `(i, j)` in an `m x m` lattice.
pub fn lattice_index(m: usize, i: usize, j: usize) -> usize {
    i * m + j
}

/// `m x m` grid with edges `(i,j) -> (i+1,j)` and `(i,j) -> (i,j+1)`.
/// Source `(0,0)`, target `(m-1,m-1)`.
pub fn make_lattice(m: usize) -> Result<Dag> {
    if m == 0 {
        return Err(invalid("lattice side must be positive"));
    }
    let mut edges = Vec::with_capacity(2 * m * (m - 1));
    for i in 0..m {
        for j in 0..m {
            let v = lattice_index(m, i, j);
            if i + 1 < m {
                edges.push((v, lattice_index(m, i + 1, j)));
            }
            if j + 1 < m {
                edges.push((v, lattice_index(m, i, j + 1)));
            }
        }
    }
    Dag::from_edges(m * m, edges)
}

/// Integer cube root of `n` when `n` is a perfect cube.
pub fn exact_cube_root(n: usize) -> Option<usize> {
    let mut m = (n as f64).cbrt().round() as usize;
    while m > 0 && m.pow(3) > n {
        m -= 1;
    }
    while (m + 1).pow(3) <= n {
        m += 1;
    }
    (m.pow(3) == n && m > 0).then_some(m)
}

/// The separation graph for `n = m^3`: an `m x m` lattice (nodes
/// `0..m^2`) whose target feeds the head of an `n`-node chain (nodes
/// `m^2..m^2+n`).
pub fn make_separation_graph(n: usize) -> Result<Dag> {
    let m = exact_cube_root(n).ok_or_else(|| invalid(format!("{n} is not a positive perfect cube")))?;
    let lattice = make_lattice(m)?;
    let offset = m * m;
    let mut edges = lattice.edges().to_vec();
    edges.push((offset - 1, offset));
    edges.extend((1..n).map(|i| (offset + i - 1, offset + i)));
    Dag::from_edges(offset + n, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Chain,
    Pyramid,
    Lattice,
    Separation,
}

pub fn generate(family: Family, param: usize) -> Result<Dag> {
    match family {
        Family::Chain => make_chain(param),
        Family::Pyramid => make_pyramid(param),
        Family::Lattice => make_lattice(param),
        Family::Separation => make_separation_graph(param),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub acyclic: bool,
    pub max_in_degree: usize,
    /// Nodes with more than two parents. Such graphs can be pebbled but
    /// cannot be labelled.
    pub in_degree_violations: Vec<usize>,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    pub sources_consistent: bool,
    pub targets_consistent: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.acyclic
            && self.in_degree_violations.is_empty()
            && self.sources_consistent
            && self.targets_consistent
    }
}

pub fn validate(d: &Dag) -> ValidationReport {
    let in_deg: Vec<usize> = (0..d.node_count()).map(|v| d.in_degree(v)).collect();
    let mut out_deg = vec![0usize; d.node_count()];
    for &(u, _) in d.edges() {
        out_deg[u] += 1;
    }
    let sources = d.sources();
    let targets = d.targets();
    let sources_consistent = sources
        .iter()
        .copied()
        .eq((0..d.node_count()).filter(|&v| in_deg[v] == 0));
    let targets_consistent = targets
        .iter()
        .copied()
        .eq((0..d.node_count()).filter(|&v| out_deg[v] == 0));
    ValidationReport {
        acyclic: d.topological_order().is_some(),
        max_in_degree: in_deg.iter().copied().max().unwrap_or(0),
        in_degree_violations: (0..d.node_count()).filter(|&v| in_deg[v] > 2).collect(),
        sources,
        targets,
        sources_consistent,
        targets_consistent,
    }
}
