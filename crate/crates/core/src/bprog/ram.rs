//! Memory accounting for a multi-pass selection sort on a random-access
//! machine, as an upper-bound reference for sorting.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RamTrace {
    /// Bits in use after each step.
    pub memory_bits: Vec<u64>,
    pub output: Vec<u64>,
    pub passes: usize,
}

impl RamTrace {
    pub fn time(&self) -> usize {
        self.memory_bits.len()
    }

    pub fn space(&self) -> u64 {
        self.memory_bits.iter().copied().max().unwrap_or(0)
    }

    pub fn cm(&self) -> u64 {
        self.memory_bits.iter().sum()
    }
}

fn bit_len(x: u64) -> u64 {
    (u64::BITS - x.saturating_sub(1).leading_zeros()) as u64
}

/// Sorts `x` over `[N]` holding at most `budget` (value, index) pairs at a
/// time. Each pass scans all inputs, keeping the `budget` smallest pairs
/// above the last one emitted, then writes them out one per step.
///
/// Memory per step is `budget * w + ceil(log2 n) + w` with
/// `w = ceil(log2(nN))`: the kept pairs, the scan position and the last
/// emitted pair. Every step after the first holds at least `ceil(log2 T)`
/// bits.
pub fn counting_sort_ram(x: &[u64], big_n: u64, budget: usize) -> Result<RamTrace> {
    let n = x.len();
    if n == 0 || budget == 0 || budget > n {
        return Err(crate::error::invalid(format!("budget {budget} must lie in 1..={n}")));
    }
    if let Some(&v) = x.iter().find(|&&v| v >= big_n) {
        return Err(Error::OutOfRange(format!("value {v} not below N = {big_n}")));
    }
    let w = bit_len(n as u64 * big_n).max(1);
    let per_step = budget as u64 * w + bit_len(n as u64) + w;

    let mut memory_bits = Vec::new();
    let mut output = Vec::with_capacity(n);
    let mut last: Option<(u64, usize)> = None;
    let mut passes = 0;
    while output.len() < n {
        passes += 1;
        let mut kept: Vec<(u64, usize)> = Vec::with_capacity(budget + 1);
        for (i, &v) in x.iter().enumerate() {
            let pair = (v, i);
            if last.is_none_or(|l| pair > l) {
                let at = kept.partition_point(|&p| p < pair);
                if at < budget {
                    kept.insert(at, pair);
                    kept.truncate(budget);
                }
            }
            memory_bits.push(per_step);
        }
        for &pair in &kept {
            output.push(pair.0);
            last = Some(pair);
            memory_bits.push(per_step);
        }
    }
    let floor = bit_len(memory_bits.len() as u64);
    for m in memory_bits.iter_mut().skip(1) {
        *m = (*m).max(floor);
    }
    Ok(RamTrace { memory_bits, output, passes })
}
