use std::collections::{BTreeSet, HashMap};

use crate::{Error, Result};

/// Stable ranking: `pi` with `sort(x) = (x[pi[0]], ..., x[pi[n-1]])`,
/// equal values kept in index order. 0-based.
pub fn rank(x: &[u64]) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..x.len()).collect();
    pi.sort_by_key(|&i| x[i]);
    pi
}

pub fn sort(x: &[u64]) -> Vec<u64> {
    let mut v = x.to_vec();
    v.sort_unstable();
    v
}

/// Values that occur exactly once.
pub fn unique(x: &[u64]) -> BTreeSet<u64> {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for &v in x {
        *counts.entry(v).or_default() += 1;
    }
    counts.into_iter().filter(|&(_, c)| c == 1).map(|(v, _)| v).collect()
}

pub fn element_distinct(x: &[u64]) -> bool {
    let mut seen = BTreeSet::new();
    x.iter().all(|v| seen.insert(v))
}

/// `floor(log2(N) / 8)`.
pub fn hamming_threshold(big_n: u64) -> u32 {
    if big_n <= 1 {
        0
    } else {
        (big_n as f64).log2().floor() as u32 / 8
    }
}

/// Whether two coordinates lie within Hamming distance
/// `floor(log2(N) / 8)` of each other.
pub fn hamming_close(x: &[u64], big_n: u64) -> bool {
    let thr = hamming_threshold(big_n);
    x.iter()
        .enumerate()
        .any(|(i, a)| x[i + 1..].iter().any(|b| (a ^ b).count_ones() <= thr))
}

pub fn bool_matmul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Result<Vec<Vec<bool>>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != inner) || b.iter().any(|r| r.len() != cols) {
        return Err(Error::ShapeMismatch("boolean product needs a: m x k and b: k x n".into()));
    }
    Ok(a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).any(|k| row[k] && b[k][j])).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking() {
        assert_eq!(rank(&[5, 2, 9]), vec![1, 0, 2]);
        assert_eq!(rank(&[3, 3]), vec![0, 1]);
        assert_eq!(rank(&[1, 4, 7]), vec![0, 1, 2]);
    }

    #[test]
    fn unique_values() {
        assert_eq!(unique(&[1, 2, 1]), BTreeSet::from([2]));
        assert_eq!(unique(&[4, 5, 6]), BTreeSet::from([4, 5, 6]));
        assert!(unique(&[7, 7, 7]).is_empty());
    }

    #[test]
    fn predicates() {
        assert!(element_distinct(&[1, 2, 3]));
        assert!(!element_distinct(&[1, 2, 1]));
        assert_eq!(hamming_threshold(1 << 16), 2);
        assert!(hamming_close(&[9, 1000, 9], 1 << 16));
        assert!(!hamming_close(&[0, 0xff], 1 << 16));
        assert!(hamming_close(&[0, 0b11], 1 << 16));
    }

    #[test]
    fn boolean_product() {
        let id = vec![vec![true, false], vec![false, true]];
        let b = vec![vec![true, true], vec![false, true]];
        assert_eq!(bool_matmul(&id, &b).unwrap(), b);
        assert!(bool_matmul(&id, &[vec![true]]).is_err());
    }
}
