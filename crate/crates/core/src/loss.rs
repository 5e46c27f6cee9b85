//! Non-decreasing functions with `p(1) = 1`, their generalized inverse and
//! the loss
//! `L_p(n) = min_{1 <= k <= p(n)} sum_{j<=k} p^-1(j) / (k p^-1(k))`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::invalid;
use crate::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smallest argument the generic inverse will return.
pub const DOMAIN_FLOOR: f64 = 1e-12;
/// Largest argument the generic inverse will search.
pub const DOMAIN_CEILING: f64 = 1e150;
/// Most terms `loss` enumerates before falling back to the
/// `(p(s) - p(s/c)) / (c p(s))` lower bound.
pub const LOSS_TERM_CAP: u64 = 10_000_000;

#[derive(Clone)]
pub enum MonotoneFn {
    Identity,
    /// `s^(1/c)`.
    Power(f64),
    /// `1 + log2 s`.
    LogPlus,
    Constant,
    /// Piecewise linear through sorted `(x, y)` points, flat outside them.
    Table(Vec<(f64, f64)>),
    Custom {
        name: String,
        f: RealFn,
        derivative: Option<RealFn>,
    },
}

impl fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl MonotoneFn {
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        MonotoneFn::Custom { name: name.into(), f: Arc::new(f), derivative: None }
    }

    pub fn custom_with_derivative(
        name: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        MonotoneFn::Custom { name: name.into(), f: Arc::new(f), derivative: Some(Arc::new(df)) }
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidFunction("empty table".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1) {
            return Err(Error::InvalidFunction("table must have increasing x and non-decreasing y".into()));
        }
        Ok(MonotoneFn::Table(points))
    }

    /// Headerless `x,y` rows.
    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let mut pts = Vec::new();
        for rec in rdr.deserialize() {
            let row: (f64, f64) = rec?;
            pts.push(row);
        }
        MonotoneFn::table(pts)
    }

    /// `identity`, `logplus`, `constant`, `power:<c>` or `table:<csv path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.split_once(':') {
            None => match spec {
                "identity" => Ok(MonotoneFn::Identity),
                "logplus" => Ok(MonotoneFn::LogPlus),
                "constant" => Ok(MonotoneFn::Constant),
                _ => Err(invalid(format!("unknown function family {spec:?}"))),
            },
            Some(("power", c)) => {
                let c: f64 = c.parse().map_err(|_| invalid(format!("bad exponent {c:?}")))?;
                if !(c > 0.0) {
                    return Err(invalid("power family needs c > 0"));
                }
                Ok(MonotoneFn::Power(c))
            }
            Some(("table", path)) => MonotoneFn::load_table(path),
            _ => Err(invalid(format!("unknown function family {spec:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            MonotoneFn::Identity => "identity".into(),
            MonotoneFn::Power(c) => format!("power:{c}"),
            MonotoneFn::LogPlus => "logplus".into(),
            MonotoneFn::Constant => "constant".into(),
            MonotoneFn::Table(p) => format!("table({} points)", p.len()),
            MonotoneFn::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            MonotoneFn::Identity => s,
            MonotoneFn::Power(c) => s.max(0.0).powf(1.0 / c),
            MonotoneFn::LogPlus => 1.0 + s.log2(),
            MonotoneFn::Constant => 1.0,
            MonotoneFn::Table(pts) => {
                let i = pts.partition_point(|&(x, _)| x <= s);
                if i == 0 {
                    pts[0].1
                } else if i == pts.len() {
                    pts[i - 1].1
                } else {
                    let ((x0, y0), (x1, y1)) = (pts[i - 1], pts[i]);
                    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
                }
            }
            MonotoneFn::Custom { f, .. } => f(s),
        }
    }

    /// Analytic where known, else a central difference with step `s * 1e-6`.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            MonotoneFn::Identity => 1.0,
            MonotoneFn::Power(c) => s.powf(1.0 / c - 1.0) / c,
            MonotoneFn::LogPlus => 1.0 / (s * std::f64::consts::LN_2),
            MonotoneFn::Constant => 0.0,
            MonotoneFn::Custom { derivative: Some(df), .. } => df(s),
            _ => {
                let h = s.abs().max(DOMAIN_FLOOR) * 1e-6;
                (self.eval(s + h) - self.eval(s - h)) / (2.0 * h)
            }
        }
    }

    /// Least `s` with `p(s) >= j`: closed form for the named families,
    /// bisection to relative tolerance `1e-12` otherwise.
    pub fn inverse(&self, j: f64) -> Result<f64> {
        match self {
            MonotoneFn::Identity => return Ok(j.max(DOMAIN_FLOOR)),
            MonotoneFn::Power(c) => return Ok(j.max(0.0).powf(*c).max(DOMAIN_FLOOR)),
            MonotoneFn::LogPlus => return Ok(2f64.powf(j - 1.0).max(DOMAIN_FLOOR)),
            _ => {}
        }
        bisect_inverse(|s| self.eval(s), j)
    }

    /// Sampled monotonicity on a log grid and `p(1) = 1`.
    pub fn validate(&self) -> Result<()> {
        let at_one = self.eval(1.0);
        if (at_one - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidFunction(format!("p(1) = {at_one}, expected 1")));
        }
        let mut prev = f64::NEG_INFINITY;
        for i in -40..=200 {
            let s = 2f64.powf(i as f64 / 4.0);
            let v = self.eval(s);
            if v.is_nan() || v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::InvalidFunction(format!("{} decreases near s = {s}", self.name())));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Least `s` in `[DOMAIN_FLOOR, DOMAIN_CEILING]` with `f(s) >= j`, for
/// non-decreasing `f`.
pub fn bisect_inverse(f: impl Fn(f64) -> f64, j: f64) -> Result<f64> {
    let mut lo = DOMAIN_FLOOR;
    if f(lo) >= j {
        return Ok(lo);
    }
    let mut hi = 1.0f64.max(lo);
    while f(hi) < j {
        lo = hi;
        hi *= 2.0;
        if hi > DOMAIN_CEILING {
            return Err(Error::OutOfRange(format!("{j} exceeds p on the search domain")));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossValue {
    pub value: f64,
    /// Minimizing `k`; `None` when the fallback bound was used.
    pub argmin: Option<u64>,
    pub terms: u64,
    pub fallback: bool,
}

/// Number of `k` values in the minimum, `floor(p(n))` with a little slack
/// for values like `1 + log2 8` computed in floating point.
pub fn loss_terms(p: &MonotoneFn, n: f64) -> u64 {
    let pn = p.eval(n);
    (pn * (1.0 + 1e-12)).floor().max(0.0) as u64
}

pub fn loss(p: &MonotoneFn, n: f64) -> Result<LossValue> {
    loss_with_cap(p, n, LOSS_TERM_CAP)
}

pub fn loss_with_cap(p: &MonotoneFn, n: f64, cap: u64) -> Result<LossValue> {
    let terms = loss_terms(p, n);
    if terms < 1 {
        return Err(invalid(format!("p(n) = {} is below 1", p.eval(n))));
    }
    if terms > cap {
        let value = part_c_bound(p, n, 2.0);
        return Ok(LossValue { value, argmin: None, terms, fallback: true });
    }
    let mut prefix = 0.0;
    let mut best = (f64::INFINITY, 1);
    for k in 1..=terms {
        let inv = p.inverse(k as f64)?;
        prefix += inv;
        let ratio = if k == 1 { 1.0 } else { prefix / (k as f64 * inv) };
        if ratio < best.0 {
            best = (ratio, k);
        }
    }
    Ok(LossValue { value: best.0, argmin: Some(best.1), terms, fallback: false })
}

/// `min_{1 <= s <= n} (p(s) - p(s/c)) / (c p(s))` on a log grid, refined
/// by golden-section search around the best grid point.
pub fn part_c_bound(p: &MonotoneFn, n: f64, c: f64) -> f64 {
    let g = |s: f64| (p.eval(s) - p.eval(s / c)) / (c * p.eval(s));
    if n <= 1.0 {
        return g(1.0);
    }
    let steps = 4000;
    let ln = n.ln();
    let grid: Vec<f64> = (0..=steps).map(|i| (ln * i as f64 / steps as f64).exp()).collect();
    let (bi, mut best) = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| (i, g(s)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let (mut a, mut b) = (grid[bi.saturating_sub(1)], grid[(bi + 1).min(steps)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if g(x1) < g(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    best = best.min(g((a + b) / 2.0)).min(g(n)).min(g(1.0));
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub part: String,
    pub applicable: bool,
    pub holds: bool,
    pub value: f64,
    pub bound: f64,
    /// Signed slack; non-negative when the bound holds.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossReport {
    pub family: String,
    pub n: f64,
    pub loss: LossValue,
    pub checks: Vec<BoundCheck>,
}

impl LossReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| !c.applicable || c.holds)
    }
}

fn check(part: &str, applicable: bool, value: f64, bound: f64, lower: bool) -> BoundCheck {
    let margin = if lower { value - bound } else { bound - value };
    let tol = 1e-12 * bound.abs().max(value.abs());
    BoundCheck { part: part.into(), applicable, holds: margin >= -tol, value, bound, margin }
}

/// Evaluates the loss bounds that apply to `p`: `1/p(n) <= L <= 1`;
/// `L > 2^-(c+1)` for `s^(1/c)`; `L >= min_s (p(s)-p(s/c))/(c p(s))` with
/// the given `c`; and for `1 + log2 s`, `L < 2/floor(p(n)) < 2/log2 n`.
/// (`L < 2/p(n)` itself fails when `n` is not a power of two.)
pub fn loss_bounds_check(p: &MonotoneFn, n: f64, c: f64) -> Result<LossReport> {
    let l = loss(p, n)?;
    let pn = p.eval(n);
    let mut checks = vec![
        check("a-lower", true, l.value, 1.0 / pn, true),
        check("a-upper", true, l.value, 1.0, false),
    ];
    let power = match p {
        MonotoneFn::Power(e) => Some(*e),
        MonotoneFn::Identity => Some(1.0),
        _ => None,
    };
    let b = 2f64.powf(-(power.unwrap_or(1.0) + 1.0));
    let mut cb = check("b", power.is_some(), l.value, b, true);
    cb.holds = cb.holds && l.value > b;
    checks.push(cb);
    if !l.fallback {
        checks.push(check("c", c > 1.0, l.value, part_c_bound(p, n, c), true));
    }
    let logplus = matches!(p, MonotoneFn::LogPlus);
    let bound = 2.0 / l.terms as f64;
    let mut cd = check("d-tight", logplus && pn > 2.0, l.value, bound, false);
    cd.holds = cd.holds && l.value < bound && bound < 2.0 / n.log2();
    checks.push(cd);
    Ok(LossReport { family: p.name(), n, loss: l, checks })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NiceReport {
    pub passed: bool,
    pub first_violation: Option<f64>,
}

/// Checks `p'(c x) >= p'(x) / c` on every grid point, counting a relative
/// shortfall of at most `1e-9` as a pass.
pub fn nice_check(p: &MonotoneFn, c: u32, grid: &[f64]) -> Result<NiceReport> {
    if c < 2 {
        return Err(invalid("niceness needs an integer c > 1"));
    }
    let c = c as f64;
    for &x in grid {
        let lhs = p.derivative(c * x);
        let rhs = p.derivative(x) / c;
        if lhs - rhs < -1e-9 * rhs.abs().max(lhs.abs()) {
            return Ok(NiceReport { passed: false, first_violation: Some(x) });
        }
    }
    Ok(NiceReport { passed: true, first_violation: None })
}

/// `2^(i/4)` for `i` in `0..=4 * log2(top)`.
pub fn log_grid(top: f64) -> Vec<f64> {
    let steps = (4.0 * top.log2()).ceil().max(0.0) as i32;
    (0..=steps).map(|i| 2f64.powf(i as f64 / 4.0)).collect()
}
