//! Closed-form cumulative-memory lower bounds.
//!
//! Every asymptotic statement is evaluated with its hidden constant exposed
//! as a parameter (default 1), so values are meaningful only up to that
//! constant.  Results that come from an "either T is large or CM is large"
//! dichotomy report which side the supplied `T` falls on.

use std::collections::BTreeMap;
use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::loss::{loss, MonotoneFn};
use crate::opt::solve_sstar;
use crate::{Error, Result};

pub const CM_BRANCH: &str = "CM branch";
pub const T_BRANCH: &str = "T-large branch";

const UP_TO_CONSTANT: &str = "up to the hidden constant";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub tag: String,
    /// Bits times steps.
    pub value: f64,
    /// `log2(value)`; kept separately because some bounds underflow.
    /// `None` when the bound is vacuous (zero).
    pub log2_value: Option<f64>,
    pub branch: String,
    pub provenance: String,
    pub flags: Vec<String>,
    pub details: BTreeMap<String, f64>,
}

impl BoundResult {
    fn new(tag: &str, log2_value: Option<f64>, provenance: String) -> Self {
        let value = log2_value.map_or(0.0, f64::exp2);
        BoundResult {
            tag: tag.to_string(),
            value,
            log2_value,
            branch: CM_BRANCH.to_string(),
            provenance,
            flags: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    fn from_value(tag: &str, value: f64, provenance: String) -> Self {
        let mut r = BoundResult::new(tag, None, provenance);
        r.value = value.max(0.0);
        r.log2_value = (value > 0.0).then(|| value.log2());
        r
    }

    fn branch_if(mut self, t_large: bool, alternative: &str) -> Self {
        if t_large {
            self.branch = T_BRANCH.to_string();
            self.flags.push(format!("T is in the time-bound regime: {alternative}"));
        }
        self
    }

    fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn log2_k(k: f64) -> Result<f64> {
    if k > 1.0 && k.is_finite() {
        Ok(k.log2())
    } else {
        Err(invalid(format!("K must exceed 1, got {k}")))
    }
}

/// `(m h1)^(1/(1-D)) log2 K / T^(D/(1-D))`, the bound for functions whose
/// `k` outputs need `h1 (S/k)^D`-style query budgets.  The `T`-branch is
/// taken when `T log2 T >= m h1 log2 K`.
pub fn cm_generic_poly(m: f64, h1: f64, delta: f64, k: f64, t: f64) -> Result<BoundResult> {
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid(format!("need 0 <= Delta < 1, got {delta}")));
    }
    let (m, h1, t) = (positive("m", m)?, positive("h1", h1)?, positive("T", t)?);
    let lk = log2_k(k)?;
    let inv = 1.0 / (1.0 - delta);
    let value = (m * h1).powf(inv) * lk / t.powf(delta * inv);
    let guard = t * t.log2() < m * h1 * lk;
    Ok(BoundResult::from_value(
        "generic-poly",
        value,
        format!("(m h1)^(1/(1-Delta)) log2 K / T^(Delta/(1-Delta)), {UP_TO_CONSTANT}"),
    )
    .branch_if(!guard, "T log2 T >= m h1 log2 K")
    .detail("guard_lhs", t * t.log2())
    .detail("guard_rhs", m * h1 * lk))
}

/// Inputs to the general multi-output bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralParams {
    pub n: f64,
    /// Domain size `|D|`.
    pub domain: f64,
    pub m: f64,
    pub m_prime: f64,
    pub h1: f64,
    pub k_base: f64,
    pub c_const: f64,
    pub alpha: f64,
    /// Error exponent `c` in `eps <= alpha (1 - 1/(2 T^c))`.
    pub c_exp: f64,
    pub t: f64,
}

/// The general bound
/// `(1/6) L_h0(n log2|D|) min(m h0(S*) h1, 3 m' h0((m'/2) log2 K) h1) log2 K`
/// where `S*/h0(S*) = m h1 log2 K / (6T)`.  The `T`-branch is taken when
/// `T log2(2 C T^(c+1) / alpha) > (1/6) m h1 log2 K`.
pub fn cm_general(h0: &MonotoneFn, p: &GeneralParams) -> Result<BoundResult> {
    for (name, v) in [
        ("n", p.n),
        ("|D|", p.domain),
        ("m", p.m),
        ("m'", p.m_prime),
        ("h1", p.h1),
        ("C", p.c_const),
        ("alpha", p.alpha),
        ("c", p.c_exp),
        ("T", p.t),
    ] {
        positive(name, v)?;
    }
    if p.domain < 2.0 {
        return Err(invalid("|D| must be at least 2"));
    }
    let lk = log2_k(p.k_base)?;
    let rhs = p.m * p.h1 * lk / (6.0 * p.t);
    let s_star = match h0 {
        MonotoneFn::Constant => rhs,
        _ => solve_sstar(h0, rhs)?,
    };
    let l = loss(h0, p.n * p.domain.log2())?;
    let branch_a = p.m * h0.eval(s_star) * p.h1;
    let branch_b = 3.0 * p.m_prime * h0.eval(p.m_prime / 2.0 * lk) * p.h1;
    let value = l.value * branch_a.min(branch_b) * lk / 6.0;

    let t_lhs = p.t * (2.0 * p.c_const * p.t.powf(p.c_exp + 1.0) / p.alpha).log2();
    let t_rhs = p.m * p.h1 * lk / 6.0;
    let mut r = BoundResult::from_value(
        "general",
        value,
        format!(
            "(1/6) L_h0(n log2|D|) min(m h(S*), 3m' h'(m'/2)) log2 K with h0 = {}",
            h0.name()
        ),
    )
    .branch_if(t_lhs > t_rhs, "T log2(2C T^(c+1)/alpha) > (1/6) m h1 log2 K")
    .detail("s_star", s_star)
    .detail("loss", l.value)
    .detail("branch_a", branch_a)
    .detail("branch_b", branch_b)
    .detail("t_branch_lhs", t_lhs)
    .detail("t_branch_rhs", t_rhs);
    if p.m_prime <= p.n.log2() {
        r.flags.push("m' <= log2 n: the bound assumes m' grows faster than log n".into());
    }
    if l.fallback {
        r.flags.push("loss evaluated by its closed-form lower bound".into());
    }
    Ok(r)
}

/// `K = e^(1/2)`: the output-count bound for unique elements decays like
/// `e^(-k/2)`.
pub fn unique_k_base() -> f64 {
    E.sqrt()
}

/// The unique-elements parameters: `h' = n/4`, `m' = n/4`, `m = n/(2e)`,
/// `C = 1`, `alpha = 1/(2e - 1)`, `h0 = 1`, `h1 = n/4`.
pub fn unique_params(n: f64, domain: f64, t: f64) -> GeneralParams {
    GeneralParams {
        n,
        domain,
        m: n / (2.0 * E),
        m_prime: n / 4.0,
        h1: n / 4.0,
        k_base: unique_k_base(),
        c_const: 1.0,
        alpha: 1.0 / (2.0 * E - 1.0),
        c_exp: 1.0,
        t,
    }
}

/// Parameters for [`cm_applications`]; which ones are needed depends on
/// the tag.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub k: Option<f64>,
    pub d: Option<f64>,
    /// Domain size `N` (ham, unique).
    pub domain: Option<f64>,
    pub g: Option<f64>,
    pub h: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    /// Multiplier standing in for the hidden constant; default 1.
    pub constant: Option<f64>,
    /// Constant inside `2^(O(T/n))` (ham) or `(T/n)^(O(T^2/n^2))` (ed).
    pub exponent: Option<f64>,
    /// Evaluate ham/ed from their explicit exponents.
    #[serde(default)]
    pub explicit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub tag: String,
    #[serde(flatten)]
    pub params: BoundParams,
}

pub const APPLICATION_TAGS: [&str; 10] = [
    "sort-classical",
    "unique",
    "matvec",
    "matmul",
    "qsort",
    "qsort-delta",
    "kcollision",
    "qboolmm",
    "ham",
    "ed",
];

impl BoundParams {
    fn get(&self, v: Option<f64>, name: &str, tag: &str) -> Result<f64> {
        let v = v.ok_or_else(|| invalid(format!("{tag} needs parameter {name}")))?;
        positive(name, v)
    }

    fn constant(&self) -> Result<f64> {
        positive("constant", self.constant.unwrap_or(1.0))
    }

    fn exponent(&self) -> Result<f64> {
        positive("exponent", self.exponent.unwrap_or(1.0))
    }
}

pub fn compute(q: &BoundQuery) -> Result<BoundResult> {
    cm_applications(&q.tag, &q.params)
}

/// One lower bound per application, with constants substituted.
pub fn cm_applications(tag: &str, p: &BoundParams) -> Result<BoundResult> {
    let c = p.constant()?;
    let n = || p.get(p.n, "n", tag);
    let t = || p.get(p.t, "T", tag);
    let r = match tag {
        "sort-classical" => {
            let n = n()?;
            if n < 2.0 {
                return Err(invalid("sort-classical needs n >= 2"));
            }
            let mut r = BoundResult::from_value(
                tag,
                c * n * n / n.log2(),
                format!("c n^2 / log2 n for sorting or ranking, {UP_TO_CONSTANT}"),
            );
            if let Some(t) = p.t {
                r = r.branch_if(t >= n * n / n.log2().powi(2), "T >= n^2 / log2^2 n");
            }
            r
        }
        "unique" => {
            let n = n()?;
            // Closed form of the general bound at the unique-elements
            // parameters: (1/6) (n/(2e)) (n/4) log2 e^(1/2).
            let value = c * n * n / (96.0 * E * std::f64::consts::LN_2);
            let mut r = BoundResult::from_value(
                tag,
                value,
                format!("c n^2 / (96 e ln 2) for unique elements, {UP_TO_CONSTANT}"),
            );
            if let Some(t) = p.t {
                let g = unique_params(n, p.domain.unwrap_or(n.max(2.0)), positive("T", t)?);
                let t_lhs = g.t * (2.0 * g.c_const * g.t.powf(g.c_exp + 1.0) / g.alpha).log2();
                r = r.branch_if(t_lhs > g.m * g.h1 * g.k_base.log2() / 6.0, "T log2(2 T^2 (2e-1)) > (1/6) m h1 log2 K");
            }
            r
        }
        "matvec" => {
            let (g, h, d) = (p.get(p.g, "g", tag)?, p.get(p.h, "h", tag)?, p.get(p.d, "d", tag)?);
            let ld = log2_k(d)?;
            let mut r = BoundResult::from_value(
                tag,
                c * g * h * ld,
                format!("c g h log2 d for a (g,h,c)-rigid matrix, {UP_TO_CONSTANT}"),
            );
            r.flags.push("rigidity of the matrix is taken on trust".into());
            if let (Some(t), Some(n)) = (p.t, p.n) {
                if n > 1.0 {
                    r = r.branch_if(t >= g * h * ld / n.log2(), "T >= g h log_n d");
                }
            }
            r
        }
        "matmul" => {
            let (n, t, d) = (n()?, t()?, p.get(p.d, "d", tag)?);
            let ld = log2_k(d)?;
            let r = BoundResult::from_value(
                tag,
                c * n.powi(6) * ld / t,
                format!("c n^6 log2 d / T for matrix multiplication, {UP_TO_CONSTANT}"),
            );
            if n > 1.0 {
                r.branch_if(t >= n.powi(3) * ld.sqrt() / n.log2(), "T >= n^3 sqrt(log2 d) / log2 n")
            } else {
                r
            }
        }
        "qsort" => {
            let (n, t) = (n()?, t()?);
            let beta = p.get(p.beta, "beta", tag)?;
            BoundResult::from_value(
                tag,
                c * beta * beta * n.powi(3) / (256.0 * t),
                "c beta^2 n^3 / (256 T) for quantum sorting".into(),
            )
        }
        "qsort-delta" => {
            let (n, t) = (n()?, t()?);
            let delta = p.delta.ok_or_else(|| invalid("qsort-delta needs parameter delta"))?;
            if !(0.0..1.0).contains(&delta) {
                return Err(invalid(format!("need 0 <= delta < 1, got {delta}")));
            }
            BoundResult::from_value(
                tag,
                c * (1.0 - delta) * n.powi(3) / t,
                format!("c (1 - delta) n^3 / T for quantum sorting with failure delta, {UP_TO_CONSTANT}"),
            )
        }
        "kcollision" => {
            let (n, t, k) = (n()?, t()?, p.get(p.k, "k", tag)?);
            let mut r = BoundResult::from_value(
                tag,
                c * k.powi(3) * n / (t * t),
                format!("c k^3 n / T^2 for k disjoint collisions, {UP_TO_CONSTANT}"),
            );
            if k <= n.log2() {
                r.flags.push("k <= log2 n: the bound assumes k grows faster than log n".into());
            }
            if k > n / 8.0 {
                r.flags.push("k > n/8: outside the stated range".into());
            }
            if n > 1.0 {
                r = r.branch_if(t >= k * n.cbrt() / n.log2(), "T >= k n^(1/3) / log2 n");
            }
            r
        }
        "qboolmm" => {
            let (n, t) = (n()?, t()?);
            let mut r = BoundResult::from_value(
                tag,
                c * n.powi(5) / t,
                format!("c n^5 / T for quantum Boolean matrix multiplication, {UP_TO_CONSTANT}"),
            );
            r.flags.push("alternative: Omega(n) ancilla qubits".into());
            r
        }
        "ham" if p.explicit => ham_explicit(p)?,
        "ham" => {
            let (n, t, e) = (n()?, t()?, p.exponent()?);
            if n < 2.0 {
                return Err(invalid("ham needs n >= 2"));
            }
            let log2v = c.log2() + 2.0 * n.log2() + n.log2().log2() - e * t / n;
            BoundResult::new(
                tag,
                Some(log2v),
                format!("c n^2 log2 n / 2^(e T/n) for Hamming closeness with e = {e}, {UP_TO_CONSTANT}"),
            )
        }
        "ed" if p.explicit => ed_explicit(p)?,
        "ed" => {
            let (n, t, e) = (n()?, t()?, p.exponent()?);
            let x = (t / n).max(1.0);
            let mut r = BoundResult::new(
                tag,
                Some(c.log2() + 2.0 * n.log2() - e * x * x * x.log2()),
                format!("c n^2 / (T/n)^(e T^2/n^2) for element distinctness with e = {e}, {UP_TO_CONSTANT}"),
            );
            if t < n {
                r.flags.push("T < n: evaluated at T = n".into());
            }
            r
        }
        _ => return Err(invalid(format!("unknown bound tag {tag:?}"))),
    };
    Ok(r)
}

/// `k 2^(k+9) CM >= beta n m log2 N - 12 (k+2) m n - 3n` with `k = T/n`
/// (at least 4) and `m = n / 2^(k+1)`.
fn ham_explicit(p: &BoundParams) -> Result<BoundResult> {
    let tag = "ham";
    let (n, t) = (p.get(p.n, "n", tag)?, p.get(p.t, "T", tag)?);
    let beta = p.get(p.beta, "beta", tag)?;
    let big_n = p.get(p.domain.or(Some(n.powf(4.39))), "domain", tag)?;
    let c = p.constant()?;
    let mut flags = Vec::new();
    let mut k = (t / n).ceil();
    if k < 4.0 {
        flags.push(format!("k = T/n = {k} raised to 4"));
        k = 4.0;
    }
    if n < k * k * 2f64.powf(k + 8.0) {
        flags.push("n < k^2 2^(k+8): rectangle extraction precondition not met".into());
    }
    let m = n / 2f64.powf(k + 1.0);
    let num = beta * n * m * big_n.log2() - 12.0 * (k + 2.0) * m * n - 3.0 * n;
    let value = c * num / (k * 2f64.powf(k + 9.0));
    let mut r = BoundResult::from_value(
        tag,
        value,
        "k 2^(k+9) CM >= beta n m log2 N - 12(k+2) m n - 3n, k = T/n, m = n/2^(k+1)".into(),
    )
    .detail("k", k)
    .detail("m", m);
    if value <= 0.0 {
        flags.push("vacuous at these parameters".into());
    }
    r.flags.extend(flags);
    Ok(r)
}

/// `q^(5k^2) CM >= n m (1 - q^(-1/2)) - 2n` with `k = T/n + 2` (at least
/// 8), `q = 2^40 k^8` and `m = q^(-2k^2) n / 2`, in log space.
fn ed_explicit(p: &BoundParams) -> Result<BoundResult> {
    let tag = "ed";
    let (n, t) = (p.get(p.n, "n", tag)?, p.get(p.t, "T", tag)?);
    let c = p.constant()?;
    let mut flags = Vec::new();
    let mut k = t / n + 2.0;
    if k < 8.0 {
        flags.push(format!("k = T/n + 2 = {k} raised to 8"));
        k = 8.0;
    }
    let log2q = 40.0 + 8.0 * k.log2();
    let log2_m = -2.0 * k * k * log2q + n.log2() - 1.0;
    if n.log2() < 1.0 + 5.0 * k * k * log2q {
        flags.push("n < 2 q^(5k^2): rectangle extraction precondition not met".into());
    }
    // log2 of n m (1 - q^(-1/2)) against log2(2n).
    let log2_gain = n.log2() + log2_m + (1.0 - (-log2q / 2.0).exp2()).log2();
    let log2_loss = 1.0 + n.log2();
    let log2v = (log2_gain > log2_loss).then(|| {
        c.log2() + log2_gain + (1.0 - (log2_loss - log2_gain).exp2()).log2() - 5.0 * k * k * log2q
    });
    let mut r = BoundResult::new(
        tag,
        log2v,
        "q^(5k^2) CM >= n m (1 - q^(-1/2)) - 2n, k = T/n + 2, q = 2^40 k^8, m = q^(-2k^2) n/2".into(),
    )
    .detail("k", k)
    .detail("log2_q", log2q)
    .detail("log2_m", log2_m);
    if log2v.is_none() {
        flags.push("vacuous at these parameters".into());
    }
    r.flags.extend(flags);
    Ok(r)
}

/// The largest `alpha` for which the completeness bound reaches
/// `a e^(-gamma k)`: `min(1/(16 sqrt(e^(gamma+1) + 1)), sqrt(1/(8b)))`.
pub fn alpha_threshold(gamma: f64, b: f64) -> f64 {
    (1.0 / (16.0 * ((gamma + 1.0).exp() + 1.0).sqrt())).min((1.0 / (8.0 * b)).sqrt())
}

/// The open interval `(sqrt(k/n), threshold)` of admissible `alpha`, if
/// nonempty.
pub fn alpha_window(gamma: f64, k: f64, n: f64, b: f64) -> Option<(f64, f64)> {
    let lo = (k / n).sqrt();
    let hi = alpha_threshold(gamma, b);
    (lo < hi).then_some((lo, hi))
}

fn sigma_side_condition(gamma: f64, k: f64, n: f64) -> Result<f64> {
    if !(k > 0.0 && n > k && gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("need n > k > 0 and gamma >= 0 (gamma={gamma}, k={k}, n={n})")));
    }
    if k * (gamma + 1.0).exp() > n - k {
        return Err(Error::SideCondition(format!("k e^(gamma+1) = {} exceeds n - k = {}", k * (gamma + 1.0).exp(), n - k)));
    }
    let den = n - k * ((gamma + 1.0).exp() + 1.0);
    if den <= 0.0 {
        return Err(Error::SideCondition(format!("denominator n - k(e^(gamma+1)+1) = {den} is not positive")));
    }
    Ok(den)
}

/// Natural log of `sigma / a` in the threshold-polynomial completeness
/// bound.
pub fn sigma_log_bound(alpha: f64, gamma: f64, k: f64, n: f64, b: f64) -> Result<f64> {
    let den = sigma_side_condition(gamma, k, n)?;
    let first = b * (2.0 * alpha * (k * n).sqrt() - k).powi(2);
    let second = 4.0 * (gamma / 2.0 + 0.5).exp() * k * (n - k).sqrt() * (2.0 * alpha * n.sqrt() - k.sqrt());
    Ok((first + second) / den - k - gamma * k)
}

/// `a exp(...)`, the completeness bound for a degree `2 alpha sqrt(kn)`
/// polynomial vanishing on `0..k` and bounded on `k+1..=n`.
pub fn sigma_bound(alpha: f64, gamma: f64, k: f64, n: f64, a: f64, b: f64) -> Result<f64> {
    Ok(a * sigma_log_bound(alpha, gamma, k, n, b)?.exp())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SigmaSweep {
    pub trials: u64,
    pub violations: u64,
    /// Largest `log(sigma/a) + gamma k` seen; negative when all hold.
    pub worst_margin: f64,
}

/// Random `(gamma, k, b, n, alpha)` with `gamma in [0,3]`, `k in 1..=20`,
/// `n >= k / threshold^2` and `alpha` strictly inside its window; counts
/// instances where the bound exceeds `a e^(-gamma k)`.
pub fn sigma_consistency_sweep(trials: u64, seed: u64) -> SigmaSweep {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SigmaSweep { trials, violations: 0, worst_margin: f64::NEG_INFINITY };
    let mut done = 0;
    while done < trials {
        let gamma = rng.gen_range(0.0..=3.0);
        let k = rng.gen_range(1..=20) as f64;
        let b = 10f64.powf(rng.gen_range(-1.0..=1.0));
        let thr = alpha_threshold(gamma, b);
        let n = (k / (thr * thr) * rng.gen_range(1.01..10.0)).ceil();
        let Some((lo, hi)) = alpha_window(gamma, k, n, b) else { continue };
        let alpha = rng.gen_range(lo..hi);
        if alpha <= lo {
            continue;
        }
        let Ok(ls) = sigma_log_bound(alpha, gamma, k, n, b) else { continue };
        done += 1;
        let margin = ls + gamma * k;
        out.worst_margin = out.worst_margin.max(margin);
        if margin > 1e-9 * (gamma * k).max(1.0) {
            out.violations += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(tag: &str, params: BoundParams) -> BoundResult {
        cm_applications(tag, &params).unwrap()
    }

    #[test]
    fn worked_values() {
        let r = q("qsort", BoundParams { n: Some(256.0), t: Some(4096.0), beta: Some(1.0), ..Default::default() });
        assert_eq!(r.value, 16.0);
        let r = q("matmul", BoundParams { n: Some(4.0), t: Some(64.0), d: Some(2.0), ..Default::default() });
        assert_eq!(r.value, 64.0);
        let r = cm_generic_poly(16.0, 16.0, 0.5, 2.0, 256.0).unwrap();
        assert_eq!(r.value, 256.0);
        let flat = cm_generic_poly(10.0, 3.0, 0.0, 4.0, 1e9).unwrap();
        assert_eq!(flat.value, 60.0);
        assert_eq!(flat.branch, T_BRANCH);
        assert!(cm_generic_poly(1.0, 1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn general_reduces_to_single_branch() {
        let p = GeneralParams {
            n: 100.0,
            domain: 100.0,
            m: 50.0,
            m_prime: 50.0,
            h1: 10.0,
            k_base: 4.0,
            c_const: 1.0,
            alpha: 1.0,
            c_exp: 1.0,
            t: 1000.0,
        };
        let r = cm_general(&MonotoneFn::Constant, &p).unwrap();
        assert!((r.value - 50.0 * 10.0 * 2.0 / 6.0).abs() < 1e-9);
        let small = cm_general(&MonotoneFn::Constant, &GeneralParams { m_prime: 5.0, ..p }).unwrap();
        assert!(small.flags.iter().any(|f| f.contains("m'")));
    }

    #[test]
    fn unique_paths_agree() {
        for n in [16.0, 1000.0, 1e6] {
            let g = cm_general(&MonotoneFn::Constant, &unique_params(n, n, n)).unwrap();
            let s = q("unique", BoundParams { n: Some(n), ..Default::default() });
            assert!(g.value >= s.value * (1.0 - 1e-12), "{n}: {} < {}", g.value, s.value);
        }
    }

    #[test]
    fn flags_and_errors() {
        let r = q("kcollision", BoundParams { n: Some(1024.0), t: Some(100.0), k: Some(5.0), ..Default::default() });
        assert!(r.flags.iter().any(|f| f.contains("log2 n")));
        assert!(cm_applications("nope", &BoundParams::default()).is_err());
        assert!(cm_applications("qsort", &BoundParams { n: Some(4.0), ..Default::default() }).is_err());
        let e = q("ed", BoundParams { n: Some(1e6), t: Some(1e6), explicit: true, ..Default::default() });
        assert_eq!(e.value, 0.0);
        assert!(e.flags.iter().any(|f| f.contains("vacuous")));
    }

    #[test]
    fn sigma_pieces() {
        let thr = alpha_threshold(0.0, 1.0);
        assert_eq!(thr, (1.0 / (16.0 * (E + 1.0).sqrt())).min((1.0f64 / 8.0).sqrt()));
        assert!(matches!(sigma_bound(0.01, 1.0, 10.0, 50.0, 1.0, 1.0), Err(Error::SideCondition(_))));
        let s = sigma_consistency_sweep(200, 7);
        assert_eq!(s.violations, 0);
        assert!(s.worst_margin < 0.0);
    }
}
