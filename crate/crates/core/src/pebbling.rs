//! The black pebble game.
//!
//! Rules: a pebble may be placed on a node whose parents all carry pebbles
//! (sources always qualify), slid from a node to a child whose other parents
//! carry pebbles, or removed at any time. A slide is one step. Cumulative
//! memory is the pebble count sampled after every step.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dag::{self, Dag};
use crate::error::invalid;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MoveRecord", into = "MoveRecord")]
pub enum Move {
    Place(usize),
    Remove(usize),
    Slide { from: usize, to: usize },
}

/// Wire form: `{"op":"place"|"remove"|"slide","v":int,"u":int?}`. For a
/// slide `u` is the origin and `v` the destination.
#[derive(Serialize, Deserialize)]
struct MoveRecord {
    op: String,
    v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<usize>,
}

impl From<Move> for MoveRecord {
    fn from(m: Move) -> Self {
        match m {
            Move::Place(v) => MoveRecord { op: "place".into(), v, u: None },
            Move::Remove(v) => MoveRecord { op: "remove".into(), v, u: None },
            Move::Slide { from, to } => MoveRecord { op: "slide".into(), v: to, u: Some(from) },
        }
    }
}

impl TryFrom<MoveRecord> for Move {
    type Error = String;

    fn try_from(r: MoveRecord) -> std::result::Result<Self, String> {
        match (r.op.as_str(), r.u) {
            ("place", None) => Ok(Move::Place(r.v)),
            ("remove", None) => Ok(Move::Remove(r.v)),
            ("slide", Some(u)) => Ok(Move::Slide { from: u, to: r.v }),
            ("slide", None) => Err("slide needs \"u\"".into()),
            (op, _) => Err(format!("unknown or malformed op {op:?}")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PebblingTrace {
    pub moves: Vec<Move>,
}

impl PebblingTrace {
    pub fn new(moves: Vec<Move>) -> Self {
        PebblingTrace { moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}

/// Set of pebbled nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pebbles {
    on: Vec<bool>,
    count: usize,
}

impl Pebbles {
    pub fn empty(node_count: usize) -> Self {
        Pebbles { on: vec![false; node_count], count: 0 }
    }

    pub fn from_nodes(node_count: usize, nodes: &[usize]) -> Self {
        let mut p = Pebbles::empty(node_count);
        for &v in nodes {
            p.insert(v);
        }
        p
    }

    pub fn contains(&self, v: usize) -> bool {
        self.on.get(v).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn nodes(&self) -> Vec<usize> {
        (0..self.on.len()).filter(|&v| self.on[v]).collect()
    }

    fn insert(&mut self, v: usize) {
        if !self.on[v] {
            self.on[v] = true;
            self.count += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        if self.on[v] {
            self.on[v] = false;
            self.count -= 1;
        }
    }

    /// Applies one move in place; on error the state is untouched.
    pub fn apply(&mut self, d: &Dag, mv: Move) -> std::result::Result<(), String> {
        let n = d.node_count();
        let check = |v: usize| {
            if v < n {
                Ok(())
            } else {
                Err(format!("node {v} out of range"))
            }
        };
        match mv {
            Move::Place(v) => {
                check(v)?;
                if let Some(&p) = d.parents(v).iter().find(|&&p| !self.on[p]) {
                    return Err(format!("place on {v}: parent {p} unpebbled"));
                }
                self.insert(v);
            }
            Move::Remove(v) => {
                check(v)?;
                self.remove(v);
            }
            Move::Slide { from, to } => {
                check(from)?;
                check(to)?;
                if !d.has_edge(from, to) {
                    return Err(format!("slide {from}->{to}: no such edge"));
                }
                if !self.on[from] {
                    return Err(format!("slide {from}->{to}: origin unpebbled"));
                }
                if let Some(&p) = d.parents(to).iter().find(|&&p| p != from && !self.on[p]) {
                    return Err(format!("slide {from}->{to}: parent {p} unpebbled"));
                }
                self.remove(from);
                self.insert(to);
            }
        }
        Ok(())
    }
}

/// Pure single step: returns the successor state.
pub fn step(state: &Pebbles, mv: Move, d: &Dag) -> Result<Pebbles> {
    let mut next = state.clone();
    next.apply(d, mv)
        .map_err(|reason| Error::IllegalMove { step: 0, reason })?;
    Ok(next)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PebblingMetrics {
    pub time: usize,
    pub max_pebbles: usize,
    pub cm: u64,
    /// 1-based step after which every target first carried a pebble.
    pub reached_at: Option<usize>,
    /// Pebble count after each step.
    pub profile: Vec<usize>,
}

impl PebblingMetrics {
    pub fn reached(&self) -> bool {
        self.reached_at.is_some()
    }

    pub fn ts_product(&self) -> u64 {
        (self.time * self.max_pebbles) as u64
    }

    /// `step,pebbles` rows for plotting.
    pub fn write_profile_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "pebbles"])?;
        for (i, c) in self.profile.iter().enumerate() {
            w.write_record([(i + 1).to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Replays a trace from the empty configuration.
pub fn run(d: &Dag, t: &PebblingTrace) -> Result<PebblingMetrics> {
    run_from(d, Pebbles::empty(d.node_count()), t).map(|(m, _)| m)
}

/// Replays a trace from a given configuration, returning metrics and the
/// final configuration. Pebbles carried in from `start` count toward the
/// profile.
pub fn run_from(d: &Dag, start: Pebbles, t: &PebblingTrace) -> Result<(PebblingMetrics, Pebbles)> {
    let targets = d.targets();
    let mut state = start;
    let mut profile = Vec::with_capacity(t.len());
    let mut reached_at = None;
    for (i, &mv) in t.moves.iter().enumerate() {
        state
            .apply(d, mv)
            .map_err(|reason| Error::IllegalMove { step: i + 1, reason })?;
        profile.push(state.count());
        if reached_at.is_none() && targets.iter().all(|&v| state.contains(v)) {
            reached_at = Some(i + 1);
        }
    }
    let metrics = PebblingMetrics {
        time: profile.len(),
        max_pebbles: profile.iter().copied().max().unwrap_or(0),
        cm: profile.iter().map(|&c| c as u64).sum(),
        reached_at,
        profile,
    };
    Ok((metrics, state))
}

/// Anti-diagonal sweep of an `m x m` lattice: pebbles advance one diagonal
/// at a time by sliding along their edges, so every node is pebbled exactly
/// once with at most `m` pebbles. Ends with a single pebble on `(m-1,m-1)`.
/// `index` maps lattice cells to node ids.
pub fn lattice_sweep(m: usize, index: impl Fn(usize, usize) -> usize) -> Vec<Move> {
    let mut moves = Vec::with_capacity(m * m + m);
    if m == 0 {
        return moves;
    }
    let slide = |a: (usize, usize), b: (usize, usize)| Move::Slide {
        from: index(a.0, a.1),
        to: index(b.0, b.1),
    };
    moves.push(Move::Place(index(0, 0)));
    // Widening diagonals: d holds (i, d-i) for i in 0..=d.
    for d in 0..m.saturating_sub(1) {
        moves.push(Move::Place(index(d + 1, 0)));
        for i in (1..=d).rev() {
            moves.push(slide((i, d - i), (i, d + 1 - i)));
        }
        moves.push(slide((0, d), (0, d + 1)));
    }
    // Narrowing diagonals: d holds (i, d-i) for i in d+1-m..m.
    for d in m - 1..2 * m - 2 {
        for i in (d + 2 - m..m).rev() {
            moves.push(slide((i, d - i), (i, d + 1 - i)));
        }
        moves.push(Move::Remove(index(d + 1 - m, m - 1)));
    }
    moves
}

/// Single pebble walked down `0..n`.
pub fn chain_walk(n: usize) -> PebblingTrace {
    let mut moves = Vec::with_capacity(n);
    if n > 0 {
        moves.push(Move::Place(0));
        moves.extend((1..n).map(|i| Move::Slide { from: i - 1, to: i }));
    }
    PebblingTrace::new(moves)
}

/// Places every node once in topological order and removes each pebble as
/// soon as its last child has been placed. Targets keep their pebbles.
pub fn topological_strategy(d: &Dag) -> Result<PebblingTrace> {
    let order = d
        .topological_order()
        .ok_or_else(|| Error::UnsupportedGraph("graph has a cycle".into()))?;
    let mut pos = vec![0; d.node_count()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut removed = vec![false; d.node_count()];
    let mut moves = Vec::with_capacity(2 * order.len());
    for (i, &v) in order.iter().enumerate() {
        moves.push(Move::Place(v));
        for &p in d.parents(v) {
            let last = d.children(p).iter().map(|&c| pos[c]).max();
            if last == Some(i) && !removed[p] {
                removed[p] = true;
                moves.push(Move::Remove(p));
            }
        }
    }
    Ok(PebblingTrace::new(moves))
}

/// Strategy for the separation graph of size `n = m^3`: sweep the lattice
/// with `m` pebbles, slide the surviving pebble onto the chain head and walk
/// it to the end of the chain.
pub fn strategy_separation(n: usize) -> Result<PebblingTrace> {
    let (lattice, chain) = separation_phases(n)?;
    let mut moves = lattice.moves;
    moves.extend(chain.moves);
    Ok(PebblingTrace::new(moves))
}

/// The two phases of [`strategy_separation`], in node ids of the full graph.
pub fn separation_phases(n: usize) -> Result<(PebblingTrace, PebblingTrace)> {
    let m = dag::exact_cube_root(n).ok_or_else(|| invalid(format!("{n} is not a positive perfect cube")))?;
    let lattice = lattice_sweep(m, |i, j| dag::lattice_index(m, i, j));
    let head = m * m;
    let mut chain = vec![Move::Slide { from: head - 1, to: head }];
    chain.extend((1..n).map(|i| Move::Slide { from: head + i - 1, to: head + i }));
    Ok((PebblingTrace::new(lattice), PebblingTrace::new(chain)))
}

pub const DEFAULT_PEBBLES_GUARD: usize = 20;
pub const DEFAULT_CM_GUARD: usize = 10;

/// Optimal search result with a witness trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub value: u64,
    pub witness: PebblingTrace,
}

struct BitGraph {
    n: usize,
    parent_mask: Vec<u32>,
    children: Vec<Vec<usize>>,
    target_mask: u32,
}

impl BitGraph {
    fn new(d: &Dag, guard: usize) -> Result<Self> {
        let n = d.node_count();
        if n > guard || n > 31 {
            return Err(Error::GuardExceeded(format!(
                "{n} nodes exceeds exhaustive-search guard of {guard}"
            )));
        }
        let parent_mask = (0..n)
            .map(|v| d.parents(v).iter().fold(0u32, |m, &p| m | (1 << p)))
            .collect();
        let target_mask = d.targets().iter().fold(0u32, |m, &t| m | (1 << t));
        Ok(BitGraph {
            n,
            parent_mask,
            children: (0..n).map(|v| d.children(v).to_vec()).collect(),
            target_mask,
        })
    }

    /// Moves that change the configuration, in a fixed order.
    fn successors(&self, s: u32, out: &mut Vec<(Move, u32)>) {
        out.clear();
        for v in 0..self.n {
            let bit = 1u32 << v;
            if s & bit != 0 {
                out.push((Move::Remove(v), s & !bit));
                for &c in &self.children[v] {
                    let cbit = 1u32 << c;
                    let others = self.parent_mask[c] & !bit;
                    if s & cbit == 0 && s & others == others {
                        out.push((Move::Slide { from: v, to: c }, (s & !bit) | cbit));
                    }
                }
            } else if s & self.parent_mask[v] == self.parent_mask[v] {
                out.push((Move::Place(v), s | bit));
            }
        }
    }
}

fn rebuild<K: std::hash::Hash + Eq + Copy>(prev: &HashMap<K, (K, Move)>, mut k: K, start: K) -> PebblingTrace {
    let mut moves = Vec::new();
    while k != start {
        let (p, mv) = prev[&k];
        moves.push(mv);
        k = p;
    }
    moves.reverse();
    PebblingTrace::new(moves)
}

/// Least number of pebbles with which all targets can be pebbled
/// simultaneously, by breadth-first search over configurations for each
/// budget `p = 1, 2, ...`. Returns `Ok(None)` once `p` exceeds `budget`.
pub fn min_pebbles_exhaustive(d: &Dag, budget: usize) -> Result<Option<SearchResult>> {
    min_pebbles_exhaustive_guarded(d, budget, DEFAULT_PEBBLES_GUARD)
}

pub fn min_pebbles_exhaustive_guarded(d: &Dag, budget: usize, guard: usize) -> Result<Option<SearchResult>> {
    let g = BitGraph::new(d, guard)?;
    let mut succ = Vec::new();
    for p in 1..=budget.min(g.n.max(1)) {
        let mut prev: HashMap<u32, (u32, Move)> = HashMap::new();
        let mut queue = VecDeque::from([0u32]);
        prev.insert(0, (0, Move::Remove(0)));
        while let Some(s) = queue.pop_front() {
            if s & g.target_mask == g.target_mask && s != 0 {
                return Ok(Some(SearchResult { value: p as u64, witness: rebuild(&prev, s, 0) }));
            }
            g.successors(s, &mut succ);
            for &(mv, t) in &succ {
                if t.count_ones() as usize <= p && !prev.contains_key(&t) {
                    prev.insert(t, (s, mv));
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(None)
}

/// Minimum cumulative memory over all pebblings of at most `move_budget`
/// steps, by Dijkstra search over `(configuration, steps)` with the
/// post-step pebble count as edge cost. `Ok(None)` when no pebbling fits.
pub fn min_cm_exhaustive(d: &Dag, move_budget: usize) -> Result<Option<SearchResult>> {
    min_cm_exhaustive_guarded(d, move_budget, DEFAULT_CM_GUARD)
}

pub fn min_cm_exhaustive_guarded(d: &Dag, move_budget: usize, guard: usize) -> Result<Option<SearchResult>> {
    let g = BitGraph::new(d, guard)?;
    let start = (0u32, 0usize);
    let mut dist: HashMap<(u32, usize), u64> = HashMap::from([(start, 0)]);
    let mut prev: HashMap<(u32, usize), ((u32, usize), Move)> = HashMap::new();
    let mut heap = BinaryHeap::from([Reverse((0u64, 0usize, 0u32))]);
    let mut succ = Vec::new();
    while let Some(Reverse((cost, steps, s))) = heap.pop() {
        if dist.get(&(s, steps)).is_some_and(|&c| c < cost) {
            continue;
        }
        if steps > 0 && s & g.target_mask == g.target_mask {
            return Ok(Some(SearchResult { value: cost, witness: rebuild(&prev, (s, steps), start) }));
        }
        if steps == move_budget {
            continue;
        }
        g.successors(s, &mut succ);
        for &(mv, t) in &succ {
            let key = (t, steps + 1);
            let c = cost + t.count_ones() as u64;
            if dist.get(&key).is_none_or(|&old| c < old) {
                dist.insert(key, c);
                prev.insert(key, ((s, steps), mv));
                heap.push(Reverse((c, steps + 1, t)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{make_chain, make_lattice, make_pyramid, make_separation_graph};

    #[test]
    fn step_rules() {
        let chain = make_chain(3).unwrap();
        let s = step(&Pebbles::empty(3), Move::Place(0), &chain).unwrap();
        assert_eq!(s.nodes(), vec![0]);
        let s = step(&s, Move::Slide { from: 0, to: 1 }, &chain).unwrap();
        assert_eq!(s.nodes(), vec![1]);

        let p2 = make_pyramid(2).unwrap();
        let s = Pebbles::from_nodes(3, &[0]);
        assert!(matches!(step(&s, Move::Place(2), &p2), Err(Error::IllegalMove { .. })));
        assert!(step(&s, Move::Slide { from: 0, to: 2 }, &p2).is_err());
        let s = Pebbles::from_nodes(3, &[0, 1]);
        assert_eq!(step(&s, Move::Slide { from: 0, to: 2 }, &p2).unwrap().nodes(), vec![1, 2]);
        assert!(step(&s, Move::Slide { from: 0, to: 1 }, &p2).is_err());
    }

    #[test]
    fn chain_walk_metrics() {
        for n in [1, 5, 27] {
            let m = run(&make_chain(n).unwrap(), &chain_walk(n)).unwrap();
            assert_eq!((m.time, m.max_pebbles, m.cm), (n, 1, n as u64));
            assert_eq!(m.reached_at, Some(n));
        }
    }

    #[test]
    fn empty_trace() {
        let m = run(&make_chain(1).unwrap(), &PebblingTrace::default()).unwrap();
        assert_eq!((m.time, m.cm), (0, 0));
        assert!(!m.reached());
    }

    #[test]
    fn illegal_move_reports_step() {
        let t = PebblingTrace::new(vec![Move::Place(0), Move::Place(2)]);
        match run(&make_chain(3).unwrap(), &t) {
            Err(Error::IllegalMove { step, .. }) => assert_eq!(step, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lattice_sweep_uses_m_pebbles() {
        for m in 1..=7 {
            let g = make_lattice(m).unwrap();
            let t = PebblingTrace::new(lattice_sweep(m, |i, j| dag::lattice_index(m, i, j)));
            let r = run(&g, &t).unwrap();
            assert!(r.reached());
            assert_eq!(r.max_pebbles, m);
            assert_eq!(r.time, m * m + m - 1);
            assert_eq!(*r.profile.last().unwrap(), 1);
        }
    }

    #[test]
    fn separation_small_cases() {
        let t1 = strategy_separation(1).unwrap();
        assert_eq!(t1.moves, vec![Move::Place(0), Move::Slide { from: 0, to: 1 }]);
        let r = run(&make_separation_graph(27).unwrap(), &strategy_separation(27).unwrap()).unwrap();
        assert!(r.reached());
        assert_eq!(r.max_pebbles, 3);
        assert!((36..=108).contains(&r.time));
    }

    #[test]
    fn exhaustive_pebbles() {
        let chain = make_chain(5).unwrap();
        assert_eq!(min_pebbles_exhaustive(&chain, 5).unwrap().unwrap().value, 1);
        for h in 1..=3 {
            let p = make_pyramid(h).unwrap();
            let res = min_pebbles_exhaustive(&p, 10).unwrap().unwrap();
            assert_eq!(res.value, h as u64);
            let replay = run(&p, &res.witness).unwrap();
            assert!(replay.reached());
            assert_eq!(replay.max_pebbles, h);
        }
        assert!(min_pebbles_exhaustive(&make_pyramid(3).unwrap(), 2).unwrap().is_none());
        assert!(matches!(
            min_pebbles_exhaustive(&make_chain(21).unwrap(), 3),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn exhaustive_cm() {
        let res = min_cm_exhaustive(&make_chain(3).unwrap(), 10).unwrap().unwrap();
        assert_eq!(res.value, 3);
        let single = make_chain(1).unwrap();
        assert_eq!(min_cm_exhaustive(&single, 1).unwrap().unwrap().value, 1);
        assert!(min_cm_exhaustive(&make_chain(3).unwrap(), 2).unwrap().is_none());

        let p2 = make_pyramid(2).unwrap();
        let res = min_cm_exhaustive(&p2, 10).unwrap().unwrap();
        let replay = run(&p2, &res.witness).unwrap();
        assert!(replay.reached());
        assert_eq!(replay.cm, res.value);
        assert!(matches!(
            min_cm_exhaustive(&make_chain(11).unwrap(), 20),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn trace_json_format() {
        let t = PebblingTrace::new(vec![Move::Place(0), Move::Slide { from: 0, to: 1 }, Move::Remove(1)]);
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(
            text,
            r#"[{"op":"place","v":0},{"op":"slide","v":1,"u":0},{"op":"remove","v":1}]"#
        );
        assert_eq!(serde_json::from_str::<PebblingTrace>(&text).unwrap(), t);
        assert!(serde_json::from_str::<PebblingTrace>(r#"[{"op":"slide","v":1}]"#).is_err());
    }

    #[test]
    fn profile_csv() {
        let m = run(&make_chain(2).unwrap(), &chain_walk(2)).unwrap();
        let mut buf = Vec::new();
        m.write_profile_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "step,pebbles\n1,1\n2,1\n");
    }
}
