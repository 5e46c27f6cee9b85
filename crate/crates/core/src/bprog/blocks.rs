//! Time-block decompositions of a width or space profile.
//!
//! Segments of length `H` are laid out backward from `T`, so the leftmost
//! one may be short: segment `i` of `l = ceil(T/H)` covers
//! `[T - (l-i+1)H, T - (l-i)H)` clipped at 0. Each segment's candidate
//! boundary is its narrowest layer (earliest on ties); the first candidate
//! is layer 0.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    /// `log2` width (or space) at `start`.
    pub log_width: f64,
    /// Segments the block consumed.
    pub segments: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_star: Option<u32>,
    /// Output target for the block.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<u64>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockDecomposition {
    pub time: usize,
    /// Segment length `H`; zero for the exponential decomposition.
    pub unit: usize,
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    /// `t_1 < ... < t_{l+1}`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut b: Vec<usize> = self.blocks.iter().map(|b| b.start).collect();
        b.push(self.time);
        b
    }

    /// `sum_i S_i * H`, the cumulative memory certified by the boundaries.
    pub fn cm_lower_bound(&self) -> f64 {
        self.blocks.iter().map(|b| b.log_width).sum::<f64>() * self.unit as f64
    }
}

/// Constants of the per-block output target
/// `k_i = ceil((S_i + log2(2 C T^(c+1) / alpha)) / log2 K)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutputTargets {
    pub k_base: f64,
    pub c_const: f64,
    pub alpha: f64,
    pub t_pow: f64,
}

impl OutputTargets {
    pub fn target(&self, s: f64, time: usize) -> u64 {
        let t = (time.max(1)) as f64;
        let slack = (2.0 * self.c_const / self.alpha).log2() + (self.t_pow + 1.0) * t.log2();
        ((s + slack) / self.k_base.log2()).ceil().max(0.0) as u64
    }

    fn validate(&self) -> Result<()> {
        if !(self.k_base > 1.0 && self.c_const > 0.0 && self.alpha > 0.0) {
            return Err(crate::error::invalid("output targets need K > 1, C > 0, alpha > 0"));
        }
        Ok(())
    }
}

fn log_width(w: u64) -> f64 {
    (w.max(1) as f64).log2()
}

/// Candidate boundaries `tau_1 = 0, tau_2, ..., tau_l`.
fn candidates(widths: &[u64], h: usize) -> Vec<usize> {
    let time = widths.len() - 1;
    let segs = time.div_ceil(h);
    let mut out = Vec::with_capacity(segs);
    if segs > 0 {
        out.push(0);
    }
    for i in 2..=segs {
        let lo = time - (segs - i + 1) * h;
        let hi = time - (segs - i) * h;
        let best = (lo..hi).min_by_key(|&t| (widths[t], t)).expect("segment nonempty");
        out.push(best);
    }
    out
}

fn check_widths(widths: &[u64]) -> Result<()> {
    if widths.is_empty() {
        return Err(crate::error::invalid("width profile is empty"));
    }
    Ok(())
}

/// One block per segment, starting at the segment's narrowest layer.
pub fn simple_blocks(widths: &[u64], h: usize) -> Result<BlockDecomposition> {
    check_widths(widths)?;
    if h == 0 {
        return Err(crate::error::invalid("segment length must be positive"));
    }
    let time = widths.len() - 1;
    let tau = candidates(widths, h);
    let blocks = tau
        .iter()
        .enumerate()
        .map(|(i, &start)| Block {
            start,
            end: tau.get(i + 1).copied().unwrap_or(time),
            log_width: log_width(widths[start]),
            segments: 1,
            k_star: None,
            target: None,
        })
        .collect();
    Ok(BlockDecomposition { time, unit: h, blocks })
}

/// Blocks of varying length, formed right to left with `H = floor(h1/2)`:
/// with `e` segments left, take the smallest `k` such that
/// `h0(sigma_{e-k+1}) < k` and start the block at candidate `tau_{e-k+1}`.
/// If no `k <= e` qualifies the block runs from layer 0.
pub fn adaptive_blocks(
    widths: &[u64],
    h0: impl Fn(f64) -> f64,
    h1: usize,
    targets: Option<&OutputTargets>,
) -> Result<BlockDecomposition> {
    check_widths(widths)?;
    let h = h1 / 2;
    if h == 0 {
        return Err(crate::error::invalid("h1 must be at least 2"));
    }
    if let Some(t) = targets {
        t.validate()?;
    }
    let time = widths.len() - 1;
    let tau = candidates(widths, h);
    let sigma: Vec<f64> = tau.iter().map(|&t| log_width(widths[t])).collect();

    let top = sigma.iter().copied().fold(1.0, f64::max);
    let grid: Vec<f64> = (0..=64).map(|i| top * i as f64 / 64.0).collect();
    for pair in grid.windows(2) {
        let (a, b) = (h0(pair[0]), h0(pair[1]));
        if !(a.is_finite() && b.is_finite()) || b < a - 1e-12 * a.abs().max(1.0) {
            return Err(Error::InvalidFunction(format!(
                "h0 decreases between {} and {}",
                pair[0], pair[1]
            )));
        }
    }

    let mut blocks = Vec::new();
    let mut e = tau.len();
    let mut end = time;
    while e > 0 {
        let k = (1..=e).find(|&k| h0(sigma[e - k]) < k as f64).unwrap_or(e);
        let start = tau[e - k];
        let s = sigma[e - k];
        blocks.push(Block {
            start,
            end,
            log_width: s,
            segments: k,
            k_star: None,
            target: targets.map(|t| t.target(s, time)),
        });
        end = start;
        e -= k;
    }
    blocks.reverse();
    Ok(BlockDecomposition { time, unit: h, blocks })
}

/// `I(k, t) = [t - (beta/2)(2^(k+1) - 1) sqrt(n), t - (beta/2)(2^k - 1) sqrt(n)]`.
pub fn exp_interval(k: u32, t: usize, beta: f64, n: f64) -> (f64, f64) {
    let unit = beta / 2.0 * n.sqrt();
    let p = 2f64.powi(k as i32);
    (t as f64 - unit * (2.0 * p - 1.0), t as f64 - unit * (p - 1.0))
}

/// Integer layers of `I(k, t)` strictly before `t`.
pub fn interval_layers(k: u32, t: usize, beta: f64, n: f64) -> std::ops::Range<usize> {
    let (lo, hi) = exp_interval(k, t, beta, n);
    if hi < 0.0 {
        return 0..0;
    }
    let first = lo.max(0.0).ceil() as usize;
    let end = (hi.floor() as usize + 1).min(t);
    first..end.max(first)
}

/// Blocks on a space profile, right to left: for a block ending at `t`,
/// `k*` is the least `k` such that some layer `t' < t` in `I(k, t)` has
/// space at most `4^k - 1`; the block starts at the first such layer.
/// Layer 0 must have space 0, which bounds `k*`.
pub fn exp_blocks(space: &[f64], beta: f64, n: f64) -> Result<BlockDecomposition> {
    if space.is_empty() {
        return Err(crate::error::invalid("space profile is empty"));
    }
    if !(beta > 0.0 && n > 0.0) {
        return Err(crate::error::invalid("beta and n must be positive"));
    }
    if space[0] != 0.0 {
        return Err(crate::error::invalid("space at layer 0 must be 0"));
    }
    let time = space.len() - 1;
    let mut blocks = Vec::new();
    let mut t = time;
    while t > 0 {
        let mut k = 0u32;
        let start = loop {
            let cap = 4f64.powi(k as i32) - 1.0;
            if let Some(s) = interval_layers(k, t, beta, n).find(|&s| space[s] <= cap) {
                break s;
            }
            k += 1;
        };
        blocks.push(Block {
            start,
            end: t,
            log_width: space[start],
            segments: 1,
            k_star: Some(k),
            target: Some(4u64.saturating_pow(k)),
        });
        t = start;
    }
    blocks.reverse();
    Ok(BlockDecomposition { time, unit: 0, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_argmin_per_segment() {
        let d = simple_blocks(&[1, 4, 2, 4, 4, 8, 2], 3).unwrap();
        assert_eq!(d.boundaries(), vec![0, 3, 6]);
        let d = simple_blocks(&[4; 10], 3).unwrap();
        assert_eq!(d.boundaries(), vec![0, 3, 6, 9]);
        assert_eq!(simple_blocks(&[1, 2, 3], 5).unwrap().boundaries(), vec![0, 2]);
        assert_eq!(simple_blocks(&[1, 2, 3], 2).unwrap().boundaries(), vec![0, 2]);
    }

    #[test]
    fn adaptive_rule() {
        let mut widths = vec![512; 25];
        widths[0] = 1;
        let d = adaptive_blocks(&widths, f64::sqrt, 2, None).unwrap();
        assert_eq!(d.blocks.len(), 6);
        assert!(d.blocks.iter().all(|b| b.segments == 4));
        let d = adaptive_blocks(&[1; 9], f64::sqrt, 2, None).unwrap();
        assert!(d.blocks.iter().all(|b| b.segments == 1 && b.log_width == 0.0));
        assert_eq!(d.boundaries(), (0..=8).collect::<Vec<_>>());
        let d = adaptive_blocks(&[1; 9], |_| 1.0, 2, None).unwrap();
        assert!(d.blocks.iter().all(|b| b.segments == 2));
        assert!(matches!(
            adaptive_blocks(&[1, 2, 4, 8], |s| -s, 2, None),
            Err(Error::InvalidFunction(_))
        ));
    }

    #[test]
    fn target_formula() {
        let t = OutputTargets { k_base: 4.0, c_const: 1.0, alpha: 0.5, t_pow: 1.0 };
        // (3 + log2(4) + 2*log2(16)) / 2 = 6.5
        assert_eq!(t.target(3.0, 16), 7);
    }

    #[test]
    fn exp_worked_case() {
        let d = exp_blocks(&[0.0, 1.0, 1.0, 1.0], 2.0, 1.0).unwrap();
        assert_eq!(d.blocks.len(), 1);
        assert_eq!((d.blocks[0].k_star, d.blocks[0].start), (Some(1), 0));
        let d = exp_blocks(&[0.0; 8], 2.0, 4.0).unwrap();
        assert!(d.blocks.iter().all(|b| b.k_star == Some(0)));
    }
}
