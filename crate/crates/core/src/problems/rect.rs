//! Embedded rectangles `R = R_A x R_B x sigma` inside `f^-1(1)` and their
//! density `alpha(R) = min(|R_A|, |R_B|) / |D|^m`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Result};

/// Exact non-negative fraction; compares by value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedRectangle {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Fixed values on the coordinates outside `A` and `B`.
    pub sigma: Vec<(usize, u64)>,
    pub r_a: Vec<Vec<u64>>,
    pub r_b: Vec<Vec<u64>>,
}

impl EmbeddedRectangle {
    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self, n: usize, d: u64) -> Result<()> {
        let m = self.m();
        if m == 0 {
            return Err(invalid("rectangle needs m >= 1"));
        }
        if self.b.len() != m {
            return Err(invalid("|A| and |B| differ"));
        }
        let mut owner = vec![0u8; n];
        for (coords, tag) in [(&self.a, 1u8), (&self.b, 2)] {
            for &i in coords {
                if i >= n || owner[i] != 0 {
                    return Err(invalid(format!("coordinate {i} out of range or reused")));
                }
                owner[i] = tag;
            }
        }
        for &(i, v) in &self.sigma {
            if i >= n || owner[i] != 0 || v >= d {
                return Err(invalid(format!("bad fixed coordinate {i} = {v}")));
            }
            owner[i] = 3;
        }
        if owner.contains(&0) {
            return Err(invalid("sigma must fix every coordinate outside A and B"));
        }
        for side in [&self.r_a, &self.r_b] {
            if side.is_empty() {
                return Err(invalid("R_A and R_B must be nonempty"));
            }
            if side.iter().any(|u| u.len() != m || u.iter().any(|&x| x >= d)) {
                return Err(invalid("value vectors must have length m over D"));
            }
            let mut sorted = side.to_vec();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != side.len() {
                return Err(invalid("repeated value vector"));
            }
        }
        Ok(())
    }

    /// The full input for `u` on `A` and `v` on `B`.
    pub fn point(&self, u: &[u64], v: &[u64], n: usize) -> Vec<u64> {
        let mut x = vec![0; n];
        for (&i, &val) in self.a.iter().zip(u) {
            x[i] = val;
        }
        for (&i, &val) in self.b.iter().zip(v) {
            x[i] = val;
        }
        for &(i, val) in &self.sigma {
            x[i] = val;
        }
        x
    }
}

/// Checks `R` lies in `f^-1(1)` point by point and returns `alpha(R)`.
pub fn rect_alpha(r: &EmbeddedRectangle, f: &dyn Fn(&[u64]) -> bool, n: usize, d: u64) -> Result<Ratio> {
    r.validate(n, d)?;
    for u in &r.r_a {
        for v in &r.r_b {
            let x = r.point(u, v, n);
            if !f(&x) {
                return Err(Error::ContainmentFailure { point: x });
            }
        }
    }
    Ok(Ratio {
        num: r.r_a.len().min(r.r_b.len()) as u64,
        den: d.pow(r.m() as u32),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RectGuard {
    pub max_n: usize,
    pub max_d: u64,
}

impl Default for RectGuard {
    fn default() -> Self {
        RectGuard { max_n: 4, max_d: 6 }
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn digits(mut idx: usize, len: usize, d: u64) -> Vec<u64> {
    let mut v = vec![0; len];
    for slot in v.iter_mut().rev() {
        *slot = idx as u64 % d;
        idx /= d as usize;
    }
    v
}

struct Biclique {
    /// Left twin classes: shared neighbourhood and member count.
    classes: Vec<(u128, usize)>,
    suffix: Vec<usize>,
    best: usize,
    best_pick: Vec<usize>,
    best_common: u128,
}

impl Biclique {
    fn search(&mut self, i: usize, common: u128, size: usize, pick: &mut Vec<usize>) {
        let right = common.count_ones() as usize;
        let score = size.min(right);
        if score > self.best {
            self.best = score;
            self.best_pick = pick.clone();
            self.best_common = common;
        }
        if i == self.classes.len() || (size + self.suffix[i]).min(right) <= self.best {
            return;
        }
        let (mask, count) = self.classes[i];
        let joined = common & mask;
        pick.push(i);
        self.search(i + 1, joined, size + count, pick);
        pick.pop();
        if joined != common {
            self.search(i + 1, common, size, pick);
        }
    }
}

/// Largest `alpha(R)` over all embedded rectangles in `f^-1(1)` with
/// `m(R) = m`, by exhaustive search over `(A, B, sigma)` and a maximum
/// balanced biclique search on the compatibility graph between value
/// vectors on `A` and on `B`. Left vectors with equal neighbourhoods are
/// merged first. Since `alpha` is symmetric in `A` and `B`, only pairs with
/// `min A < min B` are visited.
pub fn max_alpha_search(f: &dyn Fn(&[u64]) -> bool, n: usize, d: u64, m: usize) -> Result<Option<(Ratio, EmbeddedRectangle)>> {
    max_alpha_search_guarded(f, n, d, m, RectGuard::default())
}

pub fn max_alpha_search_guarded(
    f: &dyn Fn(&[u64]) -> bool,
    n: usize,
    d: u64,
    m: usize,
    guard: RectGuard,
) -> Result<Option<(Ratio, EmbeddedRectangle)>> {
    if m == 0 || 2 * m > n || d == 0 {
        return Err(invalid(format!("need 1 <= m <= n/2 and nonempty D (n={n}, m={m})")));
    }
    if n > guard.max_n || d > guard.max_d {
        return Err(Error::GuardExceeded(format!(
            "n={n}, |D|={d} exceeds rectangle guard n<={}, |D|<={}",
            guard.max_n, guard.max_d
        )));
    }
    let side = d.pow(m as u32) as usize;
    if side > 128 {
        return Err(Error::GuardExceeded(format!("|D|^m = {side} exceeds 128")));
    }
    let vectors: Vec<Vec<u64>> = (0..side).map(|i| digits(i, m, d)).collect();
    let full = if side == 128 { u128::MAX } else { (1u128 << side) - 1 };

    let mut best: Option<(Ratio, EmbeddedRectangle)> = None;
    let subsets = combinations(n, m);
    for a in &subsets {
        for b in &subsets {
            if b[0] <= a[0] || b.iter().any(|i| a.contains(i)) {
                continue;
            }
            let rest: Vec<usize> = (0..n).filter(|i| !a.contains(i) && !b.contains(i)).collect();
            let sigmas = d.pow(rest.len() as u32) as usize;
            for s in 0..sigmas {
                let sigma: Vec<(usize, u64)> = rest.iter().copied().zip(digits(s, rest.len(), d)).collect();
                let mut rect = EmbeddedRectangle { a: a.clone(), b: b.clone(), sigma, r_a: vec![], r_b: vec![] };
                let mut nbhd: Vec<(u128, usize)> = Vec::new();
                let mut members: Vec<Vec<usize>> = Vec::new();
                for (ui, u) in vectors.iter().enumerate() {
                    let mask = vectors
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| f(&rect.point(u, v, n)))
                        .fold(0u128, |acc, (vi, _)| acc | 1 << vi);
                    if mask == 0 {
                        continue;
                    }
                    match nbhd.iter().position(|&(mk, _)| mk == mask) {
                        Some(c) => {
                            nbhd[c].1 += 1;
                            members[c].push(ui);
                        }
                        None => {
                            nbhd.push((mask, 1));
                            members.push(vec![ui]);
                        }
                    }
                }
                let mut order: Vec<usize> = (0..nbhd.len()).collect();
                order.sort_by_key(|&c| (std::cmp::Reverse(nbhd[c].0.count_ones()), c));
                let classes: Vec<(u128, usize)> = order.iter().map(|&c| nbhd[c]).collect();
                let mut suffix = vec![0; classes.len() + 1];
                for i in (0..classes.len()).rev() {
                    suffix[i] = suffix[i + 1] + classes[i].1;
                }
                let floor = best.as_ref().map_or(0, |(r, _)| r.num as usize);
                let mut bc = Biclique { classes, suffix, best: floor, best_pick: vec![], best_common: 0 };
                bc.search(0, full, 0, &mut Vec::new());
                if bc.best > floor {
                    rect.r_a = bc
                        .best_pick
                        .iter()
                        .flat_map(|&i| members[order[i]].iter().map(|&ui| vectors[ui].clone()))
                        .collect();
                    rect.r_b = (0..side)
                        .filter(|&vi| bc.best_common >> vi & 1 == 1)
                        .map(|vi| vectors[vi].clone())
                        .collect();
                    best = Some((Ratio { num: bc.best as u64, den: side as u64 }, rect));
                    if bc.best == side {
                        return Ok(best);
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::element_distinct;

    fn ed(x: &[u64]) -> bool {
        element_distinct(x)
    }

    fn rect(r_a: Vec<Vec<u64>>, r_b: Vec<Vec<u64>>) -> EmbeddedRectangle {
        EmbeddedRectangle { a: vec![0], b: vec![1], sigma: vec![], r_a, r_b }
    }

    #[test]
    fn alpha_of_small_rectangles() {
        let r = rect(vec![vec![0], vec![1]], vec![vec![2], vec![3]]);
        assert_eq!(rect_alpha(&r, &ed, 2, 4).unwrap(), Ratio { num: 1, den: 2 });
        let r = rect(vec![vec![0], vec![1]], vec![vec![1], vec![2]]);
        match rect_alpha(&r, &ed, 2, 4) {
            Err(Error::ContainmentFailure { point }) => assert_eq!(point, vec![1, 1]),
            other => panic!("{other:?}"),
        }
        let degenerate = EmbeddedRectangle { a: vec![], b: vec![], sigma: vec![(0, 0), (1, 1)], r_a: vec![], r_b: vec![] };
        assert!(rect_alpha(&degenerate, &ed, 2, 4).is_err());
    }

    #[test]
    fn search_small_cases() {
        let (best, w) = max_alpha_search(&ed, 2, 4, 1).unwrap().unwrap();
        assert_eq!(best, Ratio { num: 1, den: 2 });
        assert_eq!(rect_alpha(&w, &ed, 2, 4).unwrap(), best);
        let (best, _) = max_alpha_search(&|_| true, 2, 2, 1).unwrap().unwrap();
        assert_eq!(best.value(), 1.0);
        assert!(max_alpha_search(&|_| false, 2, 2, 1).unwrap().is_none());
        assert!(matches!(max_alpha_search(&ed, 5, 4, 1), Err(Error::GuardExceeded(_))));
    }
}
