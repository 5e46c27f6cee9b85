//! Hash-graph labeling, strategy-driven evaluation and ex post facto
//! pebbling extraction.
//!
//! Every node `v_i` gets a label of `c * w` bits, `w = ceil(log2 |V|)`:
//! sources hash two all-zero labels with their index, a node with one
//! parent hashes that parent's label twice, and a node with parents
//! `j < k` hashes `L(v_j), L(v_k), i`. The index is encoded big-endian in
//! `w` bits.

use std::io::Write;

use sha2::{Digest, Sha256};

use crate::dag::Dag;
use crate::pebbling::{Move, Pebbles, PebblingTrace};
use crate::{Error, Result};

/// Fixed-width bit string, packed most significant bit first. Unused bits
/// of the last byte are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    bits: usize,
    bytes: Vec<u8>,
}

impl Label {
    pub fn zeros(bits: usize) -> Self {
        Label { bits, bytes: vec![0; bits.div_ceil(8)] }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << (7 - self.len % 8);
        }
        self.len += 1;
    }

    fn push_label(&mut self, l: &Label) {
        for i in 0..l.bits {
            self.push(l.bit(i));
        }
    }

    fn push_uint(&mut self, x: usize, width: usize) {
        for i in (0..width).rev() {
            self.push(x >> i & 1 == 1);
        }
    }
}

/// Seeded stand-in for the random oracle: SHA-256 in counter mode over
/// `seed || counter || input`, truncated to the requested width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub seed: u64,
}

impl Oracle {
    pub fn hash(&self, input: &[u8], input_bits: usize, out_bits: usize) -> Label {
        let mut out = Vec::with_capacity(out_bits.div_ceil(8));
        let mut counter = 0u32;
        while out.len() * 8 < out_bits {
            let mut h = Sha256::new();
            h.update(self.seed.to_be_bytes());
            h.update(counter.to_be_bytes());
            h.update((input_bits as u64).to_be_bytes());
            h.update(input);
            out.extend_from_slice(&h.finalize()[..]);
            counter += 1;
        }
        out.truncate(out_bits.div_ceil(8));
        if !out_bits.is_multiple_of(8) {
            *out.last_mut().unwrap() &= 0xffu8 << (8 - out_bits % 8);
        }
        Label { bits: out_bits, bytes: out }
    }
}

#[derive(Clone, Debug)]
pub struct HashGraphInstance {
    dag: Dag,
    c: usize,
    oracle: Oracle,
    w: usize,
    target: usize,
}

/// `ceil(log2 n)`, but at least 1 so a single-node graph still has labels.
pub fn index_width(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1) as usize
}

impl HashGraphInstance {
    pub fn new(dag: Dag, c: usize, seed: u64) -> Result<Self> {
        if c == 0 {
            return Err(crate::error::invalid("security multiplier c must be positive"));
        }
        if dag.topological_order().is_none() {
            return Err(Error::UnsupportedGraph("graph has a cycle".into()));
        }
        if let Some(v) = (0..dag.node_count()).find(|&v| dag.in_degree(v) > 2) {
            return Err(Error::UnsupportedGraph(format!(
                "node {v} has in-degree {}",
                dag.in_degree(v)
            )));
        }
        let targets = dag.targets();
        if targets.len() != 1 {
            return Err(Error::UnsupportedGraph(format!("expected one target, found {}", targets.len())));
        }
        let w = index_width(dag.node_count());
        Ok(HashGraphInstance { target: targets[0], dag, c, oracle: Oracle { seed }, w })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn seed(&self) -> u64 {
        self.oracle.seed
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn index_width(&self) -> usize {
        self.w
    }

    pub fn label_width(&self) -> usize {
        self.c * self.w
    }

    /// `H(left, right, i)`.
    pub fn call(&self, left: &Label, right: &Label, i: usize) -> Result<Label> {
        let lw = self.label_width();
        if left.bits != lw || right.bits != lw {
            return Err(Error::EncodingMismatch(format!(
                "argument widths {}/{} differ from label width {lw}",
                left.bits, right.bits
            )));
        }
        if i >> self.w != 0 {
            return Err(Error::EncodingMismatch(format!("index {i} does not fit in {} bits", self.w)));
        }
        let mut bw = BitWriter::default();
        bw.push_label(left);
        bw.push_label(right);
        bw.push_uint(i, self.w);
        Ok(self.oracle.hash(&bw.bytes, bw.len, lw))
    }

    /// Arguments of the call that produces `v` from its parents' labels.
    fn arguments<'a>(&self, v: usize, lookup: impl Fn(usize) -> Option<&'a Label>) -> Option<(Label, Label)> {
        match *self.dag.parents(v) {
            [] => Some((Label::zeros(self.label_width()), Label::zeros(self.label_width()))),
            [p] => {
                let l = lookup(p)?.clone();
                Some((l.clone(), l))
            }
            [j, k] => Some((lookup(j)?.clone(), lookup(k)?.clone())),
            _ => None,
        }
    }

    /// All labels, computed in topological order.
    pub fn labels(&self) -> Vec<Label> {
        let n = self.dag.node_count();
        let mut out: Vec<Option<Label>> = vec![None; n];
        for v in self.dag.topological_order().expect("validated acyclic") {
            let (l, r) = self
                .arguments(v, |p| out[p].as_ref())
                .expect("parents precede children");
            out[v] = Some(self.call(&l, &r, v).expect("widths fixed by construction"));
        }
        out.into_iter().map(|l| l.expect("every node labelled")).collect()
    }

    pub fn label(&self, v: usize) -> Result<Label> {
        if v >= self.dag.node_count() {
            return Err(Error::OutOfRange(format!("node {v}")));
        }
        Ok(self.labels().swap_remove(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub node: usize,
    pub left: Label,
    pub right: Label,
}

/// What an evaluator exposes to the auditor: its oracle calls, the number
/// of labels it claims to hold after each step, and the label it outputs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryTrace {
    pub queries: Vec<Query>,
    pub resident: Vec<usize>,
    pub declared_bits: u64,
    pub output: Option<Label>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub label: Label,
    /// Resident label bits after each step.
    pub memory_bits: Vec<u64>,
    pub queries: QueryTrace,
}

impl Evaluation {
    pub fn peak_bits(&self) -> u64 {
        self.memory_bits.iter().copied().max().unwrap_or(0)
    }

    pub fn oracle_calls(&self) -> usize {
        self.queries.queries.len()
    }

    /// `step,resident_bits` rows.
    pub fn write_memory_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "resident_bits"])?;
        for (i, b) in self.memory_bits.iter().enumerate() {
            w.write_record([(i + 1).to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs a pebbling as a computation: each Place or Slide onto `v` issues the
/// oracle call for `v` from stored labels, each Remove drops one.
pub fn evaluate_with_strategy(inst: &HashGraphInstance, t: &PebblingTrace) -> Result<Evaluation> {
    let d = inst.dag();
    let n = d.node_count();
    let width = inst.label_width() as u64;
    let mut state = Pebbles::empty(n);
    let mut store: Vec<Option<Label>> = vec![None; n];
    let mut q = QueryTrace::default();
    let mut memory_bits = Vec::with_capacity(t.len());
    let mut output = None;
    for (i, &mv) in t.moves.iter().enumerate() {
        state
            .apply(d, mv)
            .map_err(|reason| Error::IllegalMove { step: i + 1, reason })?;
        match mv {
            Move::Place(v) | Move::Slide { to: v, .. } => {
                let (l, r) = inst
                    .arguments(v, |p| store[p].as_ref())
                    .ok_or_else(|| Error::AssertionFailed(format!("missing parent label for {v}")))?;
                let out = inst.call(&l, &r, v)?;
                q.queries.push(Query { node: v, left: l, right: r });
                if let Move::Slide { from, .. } = mv {
                    store[from] = None;
                }
                store[v] = Some(out);
            }
            Move::Remove(v) => store[v] = None,
        }
        q.resident.push(state.count());
        memory_bits.push(state.count() as u64 * width);
        if output.is_none() {
            output = store[inst.target()].clone();
        }
    }
    let label = output.ok_or(Error::TargetNotReached)?;
    q.declared_bits = memory_bits.iter().copied().max().unwrap_or(0);
    q.output = Some(label.clone());
    Ok(Evaluation { label, memory_bits, queries: q })
}

/// Ex post facto pebbling of a query trace, with the indices of queries
/// that did not become placements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extraction {
    pub trace: PebblingTrace,
    /// Query index behind each Place or Slide in `trace`, in order.
    pub placements: Vec<usize>,
    pub malformed: Vec<usize>,
}

/// Turns every well-formed call `H(L(v_j), L(v_k), i)` into a pebble on
/// `v_i`. A pebble stays until the last placement of one of its children
/// before the node is queried again (or is dropped at once if no child
/// follows). When a parent's pebble expires at the very step its child is
/// placed, the placement is written as a slide from that parent. The final
/// pebble on the target is kept.
pub fn expost_facto(q: &QueryTrace, inst: &HashGraphInstance) -> Extraction {
    let d = inst.dag();
    let n = d.node_count();
    let labels = inst.labels();
    let mut placed: Vec<(usize, usize)> = Vec::new();
    let mut malformed = Vec::new();
    for (qi, query) in q.queries.iter().enumerate() {
        let ok = query.node < n
            && inst
                .arguments(query.node, |p| Some(&labels[p]))
                .is_some_and(|(l, r)| l == query.left && r == query.right);
        if ok {
            placed.push((qi, query.node));
        } else {
            malformed.push(qi);
        }
    }

    // Backward pass: expiry[a] is the placement index after which pebble a
    // is dropped.
    let m = placed.len();
    let mut expiry = vec![0usize; m];
    let mut next_same: Vec<Option<usize>> = vec![None; n];
    let mut last_child_before: Vec<Option<usize>> = vec![None; n];
    for a in (0..m).rev() {
        let v = placed[a].1;
        expiry[a] = last_child_before[v].unwrap_or(a);
        let keep_target = v == inst.target() && next_same[v].is_none();
        if keep_target {
            expiry[a] = usize::MAX;
        }
        next_same[v] = Some(a);
        last_child_before[v] = None;
        for &p in d.parents(v) {
            if last_child_before[p].is_none() {
                last_child_before[p] = Some(a);
            }
        }
    }

    let mut expiring: Vec<Vec<usize>> = vec![Vec::new(); m];
    for a in 0..m {
        if expiry[a] != usize::MAX {
            expiring[expiry[a]].push(placed[a].1);
        }
    }
    let mut moves = Vec::new();
    let mut placements = Vec::with_capacity(m);
    for (c, &(qi, v)) in placed.iter().enumerate() {
        let mut drops: Vec<usize> = expiring[c].iter().copied().filter(|&u| u != v).collect();
        drops.sort_unstable();
        drops.dedup();
        match drops.iter().position(|&u| d.has_edge(u, v)) {
            Some(pos) => {
                moves.push(Move::Slide { from: drops.remove(pos), to: v });
            }
            None => moves.push(Move::Place(v)),
        }
        placements.push(qi);
        moves.extend(drops.into_iter().map(Move::Remove));
        if expiring[c].contains(&v) {
            moves.push(Move::Remove(v));
        }
    }
    Extraction { trace: PebblingTrace::new(moves), placements, malformed }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    /// The evaluator output the target label without ever making the
    /// target's call.
    pub target_without_query: bool,
    /// The output label differs from the true target label.
    pub wrong_output: bool,
    /// Queries whose arguments are correct labels that were never produced
    /// by an earlier call still in play.
    pub guessed_labels: Vec<usize>,
    pub malformed_queries: Vec<usize>,
    pub extracted_max_pebbles: usize,
    /// Declared memory divided by the label width.
    pub declared_max_labels: usize,
    pub memory_inconsistent: bool,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        !self.target_without_query
            && !self.wrong_output
            && self.guessed_labels.is_empty()
            && self.malformed_queries.is_empty()
            && !self.memory_inconsistent
    }
}

pub fn audit(q: &QueryTrace, inst: &HashGraphInstance) -> AuditReport {
    let d = inst.dag();
    let ex = expost_facto(q, inst);
    // Lenient replay: record placements whose parents lack pebbles instead
    // of rejecting them.
    let mut on = vec![false; d.node_count()];
    let mut count = 0usize;
    let mut peak = 0usize;
    let mut guessed = Vec::new();
    let mut k = 0;
    for &mv in &ex.trace.moves {
        match mv {
            Move::Place(v) | Move::Slide { to: v, .. } => {
                let from = match mv {
                    Move::Slide { from, .. } => Some(from),
                    _ => None,
                };
                if d.parents(v).iter().any(|&p| Some(p) != from && !on[p])
                    || from.is_some_and(|u| !on[u])
                {
                    guessed.push(ex.placements[k]);
                }
                k += 1;
                if let Some(u) = from {
                    if on[u] {
                        on[u] = false;
                        count -= 1;
                    }
                }
                if !on[v] {
                    on[v] = true;
                    count += 1;
                }
            }
            Move::Remove(v) => {
                if on[v] {
                    on[v] = false;
                    count -= 1;
                }
            }
        }
        peak = peak.max(count);
    }
    let target_queried = ex
        .placements
        .iter()
        .any(|&qi| q.queries[qi].node == inst.target());
    let truth = inst.label(inst.target()).expect("target in range");
    let declared_max_labels = (q.declared_bits / inst.label_width() as u64) as usize;
    AuditReport {
        target_without_query: q.output.is_some() && !target_queried,
        wrong_output: q.output.as_ref().is_some_and(|o| *o != truth),
        guessed_labels: guessed,
        malformed_queries: ex.malformed,
        extracted_max_pebbles: peak,
        declared_max_labels,
        memory_inconsistent: peak > declared_max_labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{make_chain, make_pyramid};
    use crate::pebbling::{chain_walk, run};

    #[test]
    fn widths() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(4), 2);
        assert_eq!(index_width(5), 3);
        let inst = HashGraphInstance::new(make_chain(5).unwrap(), 4, 1).unwrap();
        assert_eq!(inst.label_width(), 12);
        assert!(inst.labels().iter().all(|l| l.bits() == 12 && l.as_bytes().len() == 2));
    }

    #[test]
    fn recursive_cases() {
        let inst = HashGraphInstance::new(make_chain(2).unwrap(), 3, 9).unwrap();
        let z = Label::zeros(3);
        let l0 = inst.call(&z, &z, 0).unwrap();
        assert_eq!(inst.label(0).unwrap(), l0);
        assert_eq!(inst.label(1).unwrap(), inst.call(&l0, &l0, 1).unwrap());

        let inst = HashGraphInstance::new(make_pyramid(2).unwrap(), 2, 9).unwrap();
        let ls = inst.labels();
        assert_eq!(ls[2], inst.call(&ls[0], &ls[1], 2).unwrap());
    }

    #[test]
    fn oracle_is_seeded() {
        let a = Oracle { seed: 1 }.hash(&[1, 2, 3], 24, 100);
        assert_eq!(a, Oracle { seed: 1 }.hash(&[1, 2, 3], 24, 100));
        assert_ne!(a, Oracle { seed: 2 }.hash(&[1, 2, 3], 24, 100));
        assert_eq!(a.as_bytes().len(), 13);
        assert_eq!(a.as_bytes()[12] & 0x0f, 0);
    }

    #[test]
    fn rejects_high_fan_in() {
        let d = Dag::from_edges(4, vec![(0, 3), (1, 3), (2, 3)]).unwrap();
        assert!(matches!(HashGraphInstance::new(d, 2, 0), Err(Error::UnsupportedGraph(_))));
    }

    #[test]
    fn chain_evaluation_and_extraction() {
        let inst = HashGraphInstance::new(make_chain(3).unwrap(), 2, 5).unwrap();
        let ev = evaluate_with_strategy(&inst, &chain_walk(3)).unwrap();
        assert_eq!(ev.label, inst.label(2).unwrap());
        assert_eq!(ev.oracle_calls(), 3);
        assert_eq!(ev.peak_bits(), inst.label_width() as u64);
        let ex = expost_facto(&ev.queries, &inst);
        let m = run(inst.dag(), &ex.trace).unwrap();
        assert!(m.reached());
        assert!(m.max_pebbles <= 2);
        assert!(audit(&ev.queries, &inst).clean());
    }

    #[test]
    fn requery_drops_old_pebble_first() {
        let inst = HashGraphInstance::new(make_chain(2).unwrap(), 2, 5).unwrap();
        let ls = inst.labels();
        let z = Label::zeros(inst.label_width());
        let src = Query { node: 0, left: z.clone(), right: z };
        let q = QueryTrace {
            queries: vec![
                src.clone(),
                src,
                Query { node: 1, left: ls[0].clone(), right: ls[0].clone() },
            ],
            ..Default::default()
        };
        let ex = expost_facto(&q, &inst);
        assert_eq!(
            ex.trace.moves,
            vec![Move::Place(0), Move::Remove(0), Move::Place(0), Move::Slide { from: 0, to: 1 }]
        );
    }

    #[test]
    fn empty_trace_fails() {
        let inst = HashGraphInstance::new(make_chain(3).unwrap(), 2, 5).unwrap();
        assert!(matches!(
            evaluate_with_strategy(&inst, &PebblingTrace::default()),
            Err(Error::TargetNotReached)
        ));
    }
}
