//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use cmlab::bounds::{cm_applications, sigma_consistency_sweep, BoundParams};
use cmlab::bprog::{
    adaptive_blocks, counting_sort_ram, exp_blocks, exp_interval, rank_to_sort, read_then_emit, simple_blocks,
    sort_to_rank, BranchingProgram,
};
use cmlab::dag::{make_pyramid, make_separation_graph};
use cmlab::experiment::{audit_graphs, drop_one_query};
use cmlab::hashgraph::{audit, evaluate_with_strategy, expost_facto, HashGraphInstance};
use cmlab::loss::{loss, loss_bounds_check, MonotoneFn};
use cmlab::opt::{fuzz_concave, fuzz_moment, ConcaveRatioFunction};
use cmlab::pebbling::{min_pebbles_exhaustive, run, strategy_separation};
use cmlab::problems::{element_distinct, max_alpha_search, rank, sort};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Constant in `cm <= C n`, fixed from the first run (largest observed
/// `cm / n` was 1.93, at n = 27).
const SEPARATION_C: u64 = 2;

fn pebbling_separation() -> Outcome {
    let mut ratios = Vec::new();
    for n in [27, 216, 729, 1728] {
        let d = make_separation_graph(n).map_err(|e| e.to_string())?;
        let m = run(&d, &strategy_separation(n).map_err(|e| e.to_string())?).map_err(|e| format!("n={n}: {e}"))?;
        let root = (n as f64).cbrt();
        ensure(m.reached(), || format!("n={n}: target not reached"))?;
        ensure(m.time >= n, || format!("n={n}: time {} < n", m.time))?;
        ensure(m.cm <= SEPARATION_C * n as u64, || format!("n={n}: cm {} > {SEPARATION_C} n", m.cm))?;
        ensure(m.max_pebbles as f64 >= root - 1e-9, || format!("n={n}: max pebbles {}", m.max_pebbles))?;
        ratios.push(m.ts_product() as f64 / m.cm as f64);
    }
    let growth = ratios[3] / ratios[0];
    ensure(growth >= 2.5, || format!("ratio growth {growth:.3} < 2.5"))?;
    Ok(format!("C = {SEPARATION_C}, TS/CM ratio {:.3} -> {:.3} (x{growth:.2})", ratios[0], ratios[3]))
}

fn cook_bound() -> Outcome {
    for h in 1..=4 {
        let d = make_pyramid(h).map_err(|e| e.to_string())?;
        let r = min_pebbles_exhaustive(&d, 64).map_err(|e| e.to_string())?;
        let v = r.as_ref().map(|r| r.value);
        ensure(v == Some(h as u64), || format!("pyramid({h}): got {v:?}"))?;
        let w = run(&d, &r.unwrap().witness).map_err(|e| e.to_string())?;
        ensure(w.reached() && w.max_pebbles == h, || format!("pyramid({h}): witness invalid"))?;
    }
    Ok("pyramid(h) needs exactly h pebbles for h = 1..4".into())
}

fn hashgraph_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut flagged = 0;
    let mut total = 0;
    for (name, d, strategy) in audit_graphs().map_err(|e| e.to_string())? {
        let strategy_max = run(&d, &strategy).map_err(|e| e.to_string())?.max_pebbles;
        for seed in 0..100 {
            let inst = HashGraphInstance::new(d.clone(), 4, seed).map_err(|e| e.to_string())?;
            let ev = evaluate_with_strategy(&inst, &strategy).map_err(|e| e.to_string())?;
            let truth = inst.label(inst.target()).map_err(|e| e.to_string())?;
            ensure(ev.label == truth, || format!("{name} seed {seed}: label mismatch"))?;
            let ex = expost_facto(&ev.queries, &inst);
            let m = run(&d, &ex.trace).map_err(|e| format!("{name} seed {seed}: extraction illegal: {e}"))?;
            ensure(m.reached(), || format!("{name} seed {seed}: extraction misses the target"))?;
            ensure(m.max_pebbles <= strategy_max, || {
                format!("{name} seed {seed}: extracted {} > strategy {strategy_max}", m.max_pebbles)
            })?;
            let cheat = drop_one_query(&ev.queries, &inst, &mut rng);
            total += 1;
            if !audit(&cheat, &inst).guessed_labels.is_empty() {
                flagged += 1;
            }
        }
    }
    ensure(flagged == total, || format!("{flagged}/{total} guessed-label traces flagged"))?;
    Ok(format!("300 evaluations exact, extractions legal, {flagged}/{total} guesses flagged"))
}

fn optimization_lemmas() -> Outcome {
    let iters = 100_000;
    let m = fuzz_moment(iters, 1);
    ensure(m.violations == 0 && m.hypotheses_held > 0, || format!("moment: {m:?}"))?;
    let mut parts = vec![format!("moment {}/{}", m.hypotheses_held, m.trials)];
    for (i, f) in [ConcaveRatioFunction::sqrt(), ConcaveRatioFunction::cbrt(), ConcaveRatioFunction::log_ratio()]
        .iter()
        .enumerate()
    {
        let r = fuzz_concave(f, iters, 10 + i as u64).map_err(|e| e.to_string())?;
        ensure(r.violations == 0 && r.hypotheses_held > 0, || format!("{}: {r:?}", f.name()))?;
        parts.push(format!("{} {}/{}", f.name(), r.hypotheses_held, r.trials));
    }
    Ok(format!("0 violations; hypotheses held: {}", parts.join(", ")))
}

fn loss_function() -> Outcome {
    let l = loss(&MonotoneFn::Identity, 4.0).map_err(|e| e.to_string())?.value;
    ensure(l == 5.0 / 8.0, || format!("identity n=4: {l}"))?;
    let l = loss(&MonotoneFn::LogPlus, 8.0).map_err(|e| e.to_string())?.value;
    ensure(l == 15.0 / 32.0, || format!("logplus n=8: {l}"))?;
    let families = [
        MonotoneFn::Identity,
        MonotoneFn::LogPlus,
        MonotoneFn::Constant,
        MonotoneFn::Power(2.0),
        MonotoneFn::Power(3.0),
    ];
    for e in 4..=20 {
        let n = f64::from(1u32 << e);
        for p in &families {
            let r = loss_bounds_check(p, n, 2.0).map_err(|e| e.to_string())?;
            let pn = p.eval(n);
            ensure(r.loss.value >= 1.0 / pn && r.loss.value <= 1.0, || {
                format!("(a) fails for {} at n=2^{e}: {}", p.name(), r.loss.value)
            })?;
        }
        for c in [1.0, 2.0, 3.0] {
            let l = loss(&MonotoneFn::Power(c), n).map_err(|e| e.to_string())?.value;
            ensure(l > 2f64.powf(-(c + 1.0)), || format!("(b) fails for c={c} at n=2^{e}: {l}"))?;
        }
    }
    let n = f64::from(1u32 << 20);
    let l = loss(&MonotoneFn::LogPlus, n).map_err(|e| e.to_string())?.value;
    ensure(l <= 2.0 / n.log2(), || format!("log family at 2^20: {l} > 2/log2 n"))?;
    Ok(format!("5/8 and 15/32 exact; (a), (b) hold on 2^4..2^20; log family {l:.6} <= {:.6}", 2.0 / n.log2()))
}

fn candidates_oracle(widths: &[u64], h: usize) -> Vec<usize> {
    let time = widths.len() - 1;
    let segs = time.div_ceil(h);
    let mut out = vec![0];
    for i in 2..=segs {
        let (lo, hi) = (time - (segs - i + 1) * h, time - (segs - i) * h);
        let mut best = lo;
        for t in lo..hi {
            if widths[t] < widths[best] {
                best = t;
            }
        }
        out.push(best);
    }
    out
}

fn lg(w: u64) -> f64 {
    (w.max(1) as f64).log2()
}

fn block_decompositions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h0s: [(&str, fn(f64) -> f64); 4] = [
        ("sqrt", f64::sqrt),
        ("identity", |s| s),
        ("one", |_| 1.0),
        ("logplus", |s: f64| 1.0 + s.max(1.0).log2()),
    ];
    let mut blocks_seen = 0usize;
    for trial in 0..1000 {
        let time = rng.gen_range(1..=10_000usize);
        let spread = rng.gen_range(0..=24);
        let mut widths: Vec<u64> = (0..=time).map(|_| 1u64 << rng.gen_range(0..=spread)).collect();
        widths[0] = 1;
        let cm: f64 = widths.iter().map(|&w| lg(w)).sum();

        let h = rng.gen_range(1..=200usize);
        let s = simple_blocks(&widths, h).map_err(|e| e.to_string())?;
        let expect = candidates_oracle(&widths, h);
        let starts: Vec<usize> = s.blocks.iter().map(|b| b.start).collect();
        ensure(starts == expect, || format!("trial {trial}: simple boundaries differ from argmins"))?;
        let certified: f64 = starts.iter().map(|&t| lg(widths[t])).sum::<f64>() * h as f64;
        ensure(certified <= cm + 1e-9 * cm.max(1.0), || format!("trial {trial}: {certified} > CM {cm}"))?;

        let h1 = rng.gen_range(2..=400usize);
        let (name, h0) = h0s[trial % h0s.len()];
        let a = adaptive_blocks(&widths, h0, h1, None).map_err(|e| e.to_string())?;
        let tau = candidates_oracle(&widths, h1 / 2);
        let sigma: Vec<f64> = tau.iter().map(|&t| lg(widths[t])).collect();
        let mut e = tau.len();
        for b in a.blocks.iter().rev() {
            let k = b.segments;
            ensure(k >= 1 && k <= e && b.start == tau[e - k], || format!("trial {trial} ({name}): block misplaced"))?;
            for j in 1..k {
                ensure(h0(sigma[e - j]) >= j as f64, || format!("trial {trial} ({name}): k not smallest"))?;
            }
            ensure(h0(sigma[e - k]) < k as f64 || k == e, || format!("trial {trial} ({name}): k does not qualify"))?;
            e -= k;
            blocks_seen += 1;
        }
        ensure(e == 0, || format!("trial {trial}: adaptive blocks do not reach layer 0"))?;

        let space: Vec<f64> = widths.iter().map(|&w| lg(w)).collect();
        let beta = rng.gen_range(0.1..2.0);
        let n = rng.gen_range(1.0..10_000.0f64);
        let x = exp_blocks(&space, beta, n).map_err(|e| e.to_string())?;
        let mut end = time;
        for b in x.blocks.iter().rev() {
            let k = b.k_star.ok_or("missing k*")?;
            ensure(b.end == end && b.start < end, || format!("trial {trial}: exponential blocks not contiguous"))?;
            let inside = |k: u32, s: usize| {
                let (lo, hi) = exp_interval(k, end, beta, n);
                s < end && lo <= s as f64 && s as f64 <= hi
            };
            let cap = |k: u32| 4f64.powi(k as i32) - 1.0;
            ensure(inside(k, b.start) && space[b.start] <= cap(k), || format!("trial {trial}: start violates I(k*, t)"))?;
            ensure(!(0..b.start).any(|s| inside(k, s) && space[s] <= cap(k)), || format!("trial {trial}: start not first"))?;
            for j in 0..k {
                ensure(!(0..end).any(|s| inside(j, s) && space[s] <= cap(j)), || format!("trial {trial}: k* not least"))?;
            }
            end = b.start;
        }
        ensure(end == 0, || format!("trial {trial}: exponential blocks do not reach 0"))?;
    }
    Ok(format!("1000 profiles, {blocks_seen} adaptive blocks checked"))
}

fn embedded_rectangles() -> Outcome {
    let ed = |x: &[u64]| element_distinct(x);
    let mut tight = Vec::new();
    for n in 2..=4usize {
        for big_n in 4..=6u64 {
            for m in 1..=n / 2 {
                let r = max_alpha_search(&ed, n, big_n, m).map_err(|e| e.to_string())?;
                let Some((alpha, _)) = r else { continue };
                ensure((alpha.num as u128) << m <= alpha.den as u128, || {
                    format!("n={n} N={big_n} m={m}: alpha {}/{} > 2^-{m}", alpha.num, alpha.den)
                })?;
                if (alpha.num as u128) << m == alpha.den as u128 {
                    tight.push(format!("({n},{big_n},{m})"));
                }
            }
        }
    }
    ensure(!tight.is_empty(), || "2^-m never attained".into())?;
    Ok(format!("alpha <= 2^-m everywhere, equality at {}", tight.join(" ")))
}

fn sorting_harness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in [64usize, 256, 1024] {
        let big_n = (n * n) as u64;
        let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..big_n)).collect();
        let mut sorted = x.clone();
        sorted.sort_unstable();
        let reference = (n * n) as f64 * ((n as f64) * big_n as f64).log2().ceil();
        for budget in [1, (n as f64).sqrt() as usize, n] {
            let r = counting_sort_ram(&x, big_n, budget).map_err(|e| e.to_string())?;
            ensure(r.output == sorted, || format!("n={n} budget={budget}: output not sorted"))?;
            let ratio = r.cm() as f64 / reference;
            ensure((0.1..=10.0).contains(&ratio), || format!("n={n} budget={budget}: CM ratio {ratio}"))?;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok(format!("all sorted; CM / (n^2 ceil(log2(nN))) in [{lo:.3}, {hi:.3}]"))
}

fn bound_calculators() -> Outcome {
    let q = BoundParams { n: Some(256.0), t: Some(4096.0), beta: Some(1.0), ..Default::default() };
    let v = cm_applications("qsort", &q).map_err(|e| e.to_string())?.value;
    ensure(v == 16.0, || format!("qsort: {v}"))?;
    let q = BoundParams { n: Some(4.0), t: Some(64.0), d: Some(2.0), ..Default::default() };
    let v = cm_applications("matmul", &q).map_err(|e| e.to_string())?.value;
    ensure(v == 64.0, || format!("matmul: {v}"))?;
    let s = sigma_consistency_sweep(1000, 9);
    ensure(s.violations == 0 && s.trials == 1000, || format!("sweep: {s:?}"))?;
    Ok(format!("qsort 16, matmul 64, sweep 0/1000 violations (worst margin {:.3})", s.worst_margin))
}

fn all_inputs(n: usize, d: u64) -> Vec<Vec<u64>> {
    (0..d.pow(n as u32))
        .map(|mut u| {
            let mut x = vec![0; n];
            for slot in x.iter_mut().rev() {
                *slot = u % d;
                u /= d;
            }
            x
        })
        .collect()
}

fn outputs(p: &BranchingProgram, x: &[u64]) -> Result<Vec<Option<u64>>, String> {
    Ok(p.run(x).map_err(|e| e.to_string())?.output_vector(x.len()))
}

fn reductions() -> Outcome {
    let mut checked = 0;
    for n in 1..=3usize {
        for big_n in 1..=3u64 {
            let sorter = read_then_emit(n, n as u64 * big_n, sort).map_err(|e| e.to_string())?;
            let ranker = sort_to_rank(&sorter).map_err(|e| e.to_string())?;
            let (p, q) = (sorter.metrics(), ranker.metrics());
            ensure(q.time <= p.time && q.space <= p.space && q.cm <= p.cm, || format!("(a) metrics n={n} N={big_n}"))?;

            let ranks = |x: &[u64]| rank(x).into_iter().map(|i| i as u64).collect();
            let rank_prog = read_then_emit(n, big_n, ranks).map_err(|e| e.to_string())?;
            let resort = rank_to_sort(&rank_prog).map_err(|e| e.to_string())?;
            let (p2, q2) = (rank_prog.metrics(), resort.metrics());
            let lgn = (big_n as f64).log2();
            ensure(
                q2.time <= 2 * p2.time
                    && q2.space <= p2.space + lgn + 1e-9
                    && q2.cm <= 2.0 * p2.cm + q2.time as f64 * lgn + 1e-9,
                || format!("(b) metrics n={n} N={big_n}"),
            )?;
            for x in all_inputs(n, big_n) {
                let want: Vec<Option<u64>> = rank(&x).into_iter().map(|i| Some(i as u64)).collect();
                ensure(outputs(&ranker, &x)? == want, || format!("rank differs at {x:?}"))?;
                let want: Vec<Option<u64>> = sort(&x).into_iter().map(Some).collect();
                ensure(outputs(&resort, &x)? == want, || format!("sort differs at {x:?}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} inputs agree in both directions; T/S/CM inequalities hold"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 10] = [
        ("1 pebbling separation", pebbling_separation, Some(60)),
        ("2 pyramid pebble number", cook_bound, Some(120)),
        ("3 hash-graph soundness", hashgraph_soundness, None),
        ("4 optimization lemmas", optimization_lemmas, None),
        ("5 loss function", loss_function, None),
        ("6 block decompositions", block_decompositions, None),
        ("7 embedded rectangles", embedded_rectangles, Some(300)),
        ("8 sorting CM harness", sorting_harness, None),
        ("9 bound calculators", bound_calculators, None),
        ("10 rank/sort reductions", reductions, None),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let mut outcome = f();
        let took = start.elapsed();
        if let (Ok(_), Some(s)) = (&outcome, limit) {
            if took > Duration::from_secs(s) {
                outcome = Err(format!("took {took:.1?}, limit {s}s"));
            }
        }
        match outcome {
            Ok(msg) => println!("PASS  {name}: {msg} [{took:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
