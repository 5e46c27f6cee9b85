//! Checked forms of the moment and concave-ratio inequalities, the `S*`
//! equation solver, and the cubic lower bound behind the `Omega(n^3/T)`
//! sorting bound.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::invalid;
use crate::loss::MonotoneFn;
use crate::{Error, Result};

/// Relative slack allowed before a conclusion counts as violated.
pub const REL_TOL: f64 = 1e-9;

/// Interval on which `q` is sampled and inverted.
pub const GUARD_LO: f64 = 1e-12;
pub const GUARD_HI: f64 = 1e15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    HypothesesNotMet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub verdict: Verdict,
    pub sum1: f64,
    pub sum2: f64,
    pub sum3: f64,
}

impl MomentCheck {
    /// `sum x^3 - sum x^2`.
    pub fn margin(&self) -> f64 {
        self.sum3 - self.sum2
    }
}

/// For non-negative `xs` with `sum x <= sum x^2`, checks
/// `sum x^3 >= sum x^2`.
pub fn check_moment(xs: &[f64]) -> MomentCheck {
    let (s1, s2, s3) = xs.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &x| (a + x, b + x * x, c + x * x * x));
    let verdict = if xs.iter().any(|&x| x < 0.0) || s1 > s2 {
        Verdict::HypothesesNotMet
    } else if s3 >= s2 * (1.0 - REL_TOL) {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    MomentCheck { verdict, sum1: s1, sum2: s2, sum3: s3 }
}

/// `p` such that `q(x) = x / p(x)` is increasing and concave, checked by
/// sampling at construction.
#[derive(Clone)]
pub struct ConcaveRatioFunction {
    name: String,
    p: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ConcaveRatioFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name)
    }
}

impl ConcaveRatioFunction {
    pub fn new(name: &str, p: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let f = ConcaveRatioFunction { name: name.into(), p: Arc::new(p) };
        f.validate()?;
        Ok(f)
    }

    /// `x^(1/c)`.
    pub fn power(c: f64) -> Result<Self> {
        Self::new(&format!("x^(1/{c})"), move |x: f64| x.powf(1.0 / c))
    }

    pub fn sqrt() -> Self {
        Self::power(2.0).expect("sqrt ratio is concave")
    }

    pub fn cbrt() -> Self {
        Self::power(3.0).expect("cbrt ratio is concave")
    }

    /// `x / (1 + ln(1 + x))`, whose ratio is `1 + ln(1 + x)`.
    pub fn log_ratio() -> Self {
        Self::new("x/(1+ln(1+x))", |x: f64| x / (1.0 + x.ln_1p())).expect("log ratio is concave")
    }

    pub fn constant() -> Self {
        Self::new("1", |_| 1.0).expect("identity ratio is concave")
    }

    pub fn from_monotone(h: &MonotoneFn) -> Result<Self> {
        let h = h.clone();
        Self::new(&h.name(), move |x| h.eval(x))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self, x: f64) -> f64 {
        (self.p)(x)
    }

    pub fn q(&self, x: f64) -> f64 {
        x / self.p(x)
    }

    fn validate(&self) -> Result<()> {
        let pts: Vec<f64> = (0..=200)
            .map(|i| GUARD_LO.ln() + (GUARD_HI.ln() - GUARD_LO.ln()) * i as f64 / 200.0)
            .map(f64::exp)
            .collect();
        let qs: Vec<f64> = pts.iter().map(|&x| self.q(x)).collect();
        for (i, w) in qs.windows(2).enumerate() {
            if !(w[0].is_finite() && w[1].is_finite()) || w[1] <= w[0] * (1.0 - 1e-12) {
                return Err(Error::InvalidFunction(format!("q not increasing near x = {}", pts[i])));
            }
        }
        for w in pts.windows(2) {
            let mid = (w[0] + w[1]) / 2.0;
            let chord = (self.q(w[0]) + self.q(w[1])) / 2.0;
            if self.q(mid) < chord * (1.0 - 1e-9) {
                return Err(Error::InvalidFunction(format!("q not concave near x = {mid}")));
            }
        }
        Ok(())
    }

    /// Inverse of `q` by bisection on the guard interval.
    pub fn q_inverse(&self, y: f64) -> Result<f64> {
        let (mut lo, mut hi) = (GUARD_LO, GUARD_HI);
        if !(self.q(lo) <= y && y <= self.q(hi)) {
            return Err(Error::OutOfRange(format!("{y} outside q's range on the guard interval")));
        }
        while hi - lo > 1e-12 * hi {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.q(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcaveCheck {
    pub verdict: Verdict,
    /// `sum x p(x)`.
    pub lhs: f64,
    /// `q^-1(K/L) L`; zero when the hypotheses fail.
    pub bound: f64,
}

/// If `sum x >= K` and `sum p(x) <= L` then `sum x p(x) >= q^-1(K/L) L`.
pub fn check_concave_bound(xs: &[f64], f: &ConcaveRatioFunction, k: f64, l: f64) -> Result<ConcaveCheck> {
    let sx: f64 = xs.iter().sum();
    let sp: f64 = xs.iter().map(|&x| f.p(x)).sum();
    let lhs: f64 = xs.iter().map(|&x| x * f.p(x)).sum();
    if xs.iter().any(|&x| x < 0.0) || !(l > 0.0) || sx < k || sp > l {
        return Ok(ConcaveCheck { verdict: Verdict::HypothesesNotMet, lhs, bound: 0.0 });
    }
    let bound = f.q_inverse(k / l)? * l;
    let verdict = if lhs >= bound * (1.0 - REL_TOL) { Verdict::Holds } else { Verdict::Violated };
    Ok(ConcaveCheck { verdict, lhs, bound })
}

/// Root of `s / h0(s) = rhs` by bisection on the guard interval, after a
/// sampled check that `s / h0(s)` increases.
pub fn solve_sstar(h0: &MonotoneFn, rhs: f64) -> Result<f64> {
    let g = |s: f64| s / h0.eval(s);
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=120 {
        let s = (GUARD_LO.ln() + (GUARD_HI.ln() - GUARD_LO.ln()) * i as f64 / 120.0).exp();
        let v = g(s);
        if !(v > prev) {
            return Err(Error::InvalidFunction(format!("s/h0(s) not increasing near s = {s}")));
        }
        prev = v;
    }
    let (mut lo, mut hi) = (GUARD_LO, GUARD_HI);
    if !(g(lo) <= rhs && rhs <= g(hi)) {
        return Err(Error::OutOfRange(format!("rhs {rhs} outside the range of s/h0(s)")));
    }
    while hi - lo > 1e-13 * hi {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= rhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicBound {
    /// `beta n^(5/2) / (16 T)`, the least feasible `sum w^3`.
    pub cube_sum: f64,
    /// `beta^2 n^3 / (256 T)`.
    pub cm: f64,
}

/// Lower bound on cumulative memory from the block constraints
/// `sum w^2 >= n/2` and `(beta/4) sqrt(n) sum w <= T` with
/// `CM >= (beta/16) sqrt(n) sum w^3`.
pub fn min_cubic_lb(t: f64, n: f64, beta: f64) -> Result<CubicBound> {
    if !(n > 0.0 && t >= n && beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("need T >= n > 0 and beta in (0, 1]; got T={t}, n={n}, beta={beta}")));
    }
    Ok(CubicBound {
        cube_sum: beta * n.powf(2.5) / (16.0 * t),
        cm: beta * beta * n.powi(3) / (256.0 * t),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub trials: u64,
    pub hypotheses_held: u64,
    pub violations: u64,
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_vector(rng: &mut impl Rng) -> Vec<f64> {
    let len = rng.gen_range(1..=32);
    (0..len).map(|_| log_uniform(rng, 1e-3, 1e3)).collect()
}

/// Samples random feasible `w` for the cubic constraints by scaling random
/// shapes into the feasible range, and counts points with `sum w^3` below
/// the bound.
pub fn sample_cubic(t: f64, n: f64, beta: f64, samples: u64, seed: u64) -> Result<FuzzReport> {
    let bound = min_cubic_lb(t, n, beta)?.cube_sum;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport::default();
    while report.hypotheses_held < samples {
        report.trials += 1;
        let w = random_vector(&mut rng);
        let (s1, s2): (f64, f64) = w.iter().fold((0.0, 0.0), |(a, b), &x| (a + x, b + x * x));
        let lo = (n / (2.0 * s2)).sqrt();
        let hi = 4.0 * t / (beta * n.sqrt() * s1);
        if lo > hi {
            continue;
        }
        let lambda = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        let s3: f64 = w.iter().map(|&x| (lambda * x).powi(3)).sum();
        report.hypotheses_held += 1;
        if s3 < bound * (1.0 - REL_TOL) {
            report.violations += 1;
        }
        if report.trials > samples * 1000 {
            break;
        }
    }
    Ok(report)
}

/// Random non-negative vectors, lengths 1 to 32, entries log-uniform in
/// `[1e-3, 1e3]`; counts violations of the moment inequality.
pub fn fuzz_moment(iters: u64, seed: u64) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport::default();
    for _ in 0..iters {
        let xs = random_vector(&mut rng);
        report.trials += 1;
        match check_moment(&xs).verdict {
            Verdict::Holds => report.hypotheses_held += 1,
            Verdict::Violated => {
                report.hypotheses_held += 1;
                report.violations += 1;
            }
            Verdict::HypothesesNotMet => {}
        }
    }
    report
}

/// Random instances of the concave-ratio inequality. `K` and `L` are drawn
/// around `sum x` and `sum p(x)` so that roughly half satisfy the
/// hypotheses.
pub fn fuzz_concave(f: &ConcaveRatioFunction, iters: u64, seed: u64) -> Result<FuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FuzzReport::default();
    for _ in 0..iters {
        let xs = random_vector(&mut rng);
        let sx: f64 = xs.iter().sum();
        let sp: f64 = xs.iter().map(|&x| f.p(x)).sum();
        let k = sx * rng.gen_range(0.01..1.3);
        let l = sp * rng.gen_range(0.8..10.0);
        report.trials += 1;
        let c = match check_concave_bound(&xs, f, k, l) {
            Ok(c) => c,
            Err(Error::OutOfRange(_)) => continue,
            Err(e) => return Err(e),
        };
        match c.verdict {
            Verdict::Holds => report.hypotheses_held += 1,
            Verdict::Violated => {
                report.hypotheses_held += 1;
                report.violations += 1;
            }
            Verdict::HypothesesNotMet => {}
        }
    }
    Ok(report)
}
