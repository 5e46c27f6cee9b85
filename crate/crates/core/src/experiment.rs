//! Batch experiments. Each writes one CSV or JSON artifact whose first row
//! names the schema version, and checks the module invariants it exercises.
//! Outputs depend only on the configuration, so equal configs give
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{cm_applications, BoundParams, APPLICATION_TAGS};
use crate::bprog::counting_sort_ram;
use crate::dag::{make_chain, make_pyramid, make_separation_graph, Dag};
use crate::error::invalid;
use crate::hashgraph::{audit, evaluate_with_strategy, expost_facto, HashGraphInstance};
use crate::loss::{loss_bounds_check, MonotoneFn};
use crate::opt::{fuzz_concave, fuzz_moment, sample_cubic, ConcaveRatioFunction};
use crate::pebbling::{run, strategy_separation, topological_strategy, PebblingTrace};
use crate::problems::{element_distinct, max_alpha_search};
use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXPERIMENT_TAGS: [&str; 7] = [
    "pebble-separation",
    "loss-sweep",
    "opt-fuzz",
    "rect-ed",
    "sort-cm-harness",
    "hashgraph-audit",
    "bounds-table",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub tag: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// Problem sizes; each experiment has its own default.
    #[serde(default)]
    pub ns: Option<Vec<usize>>,
    #[serde(default)]
    pub trials: Option<u64>,
    /// Function family for loss-sweep, as accepted by [`MonotoneFn::parse`].
    #[serde(default)]
    pub family: Option<String>,
}

impl ExperimentConfig {
    pub fn new(tag: &str, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            tag: tag.to_string(),
            seed,
            out_dir: out_dir.into(),
            format: OutputFormat::Csv,
            ns: None,
            trials: None,
            family: None,
        }
    }

    fn ns_or(&self, default: &[usize]) -> Vec<usize> {
        self.ns.clone().unwrap_or_else(|| default.to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write_csv<W: Write>(&self, schema: &str, mut out: W) -> Result<()> {
        writeln!(out, "# {schema}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| match v {
                Value::Null => String::new(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            }))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, schema: &str, seed: u64, out: W) -> Result<()> {
        let doc = json!({ "schema": schema, "seed": seed, "columns": self.columns, "rows": self.rows });
        serde_json::to_writer_pretty(out, &doc)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tag: String,
    pub path: PathBuf,
    pub rows: usize,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn schema(tag: &str) -> String {
    format!("cmlab {tag} schema v{SCHEMA_VERSION}")
}

/// Runs one experiment and writes `<out_dir>/<tag>.<csv|json>`. Check
/// failures are reported, not returned as errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (table, checks) = build(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join(format!("{}.{}", cfg.tag, cfg.format.extension()));
    write_table(&table, cfg, &path)?;
    Ok(ExperimentReport { tag: cfg.tag.clone(), path, rows: table.rows.len(), checks })
}

fn write_table(table: &Table, cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    match cfg.format {
        OutputFormat::Csv => table.write_csv(&schema(&cfg.tag), file),
        OutputFormat::Json => table.write_json(&schema(&cfg.tag), cfg.seed, file),
    }
}

/// Computes an experiment's table and checks without writing anything.
pub fn build(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    match cfg.tag.as_str() {
        "pebble-separation" => pebble_separation(cfg),
        "loss-sweep" => loss_sweep(cfg),
        "opt-fuzz" => opt_fuzz(cfg),
        "rect-ed" => rect_ed(cfg),
        "sort-cm-harness" => sort_harness(cfg),
        "hashgraph-audit" => hashgraph_audit(cfg),
        "bounds-table" => bounds_table(cfg),
        other => Err(invalid(format!("unknown experiment {other:?}; expected one of {EXPERIMENT_TAGS:?}"))),
    }
}

fn pebble_separation(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    let mut t = Table::new(&["n", "time", "max_pebbles", "cm", "ts_product"]);
    let mut checks = Vec::new();
    for n in cfg.ns_or(&[27, 216, 729]) {
        let d = make_separation_graph(n)?;
        let m = run(&d, &strategy_separation(n)?)?;
        let root = (n as f64).cbrt().round() as usize;
        checks.push(Check::new(
            format!("separation n={n}"),
            m.reached() && m.time >= n && m.max_pebbles >= root && m.cm <= 6 * n as u64,
            format!("time {} max {} cm {}", m.time, m.max_pebbles, m.cm),
        ));
        t.rows.push(vec![json!(n), json!(m.time), json!(m.max_pebbles), json!(m.cm), json!(m.ts_product())]);
    }
    Ok((t, checks))
}

fn loss_sweep(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    let spec = cfg.family.clone().unwrap_or_else(|| "power:2".into());
    let p = MonotoneFn::parse(&spec)?;
    let mut t = Table::new(&["n", "loss", "bound_b", "bound_c", "all_hold"]);
    let mut checks = Vec::new();
    let ns = cfg.ns.clone().unwrap_or_else(|| (4..=20).map(|e| 1usize << e).collect());
    for n in ns {
        let r = loss_bounds_check(&p, n as f64, 2.0)?;
        let get = |part: &str| {
            r.checks
                .iter()
                .find(|c| c.part == part && c.applicable)
                .map_or(Value::Null, |c| json!(c.bound))
        };
        let ok = r.all_hold();
        checks.push(Check::new(format!("{spec} n={n}"), ok, format!("loss {}", r.loss.value)));
        t.rows.push(vec![json!(n), json!(r.loss.value), get("b"), get("c"), json!(ok)]);
    }
    Ok((t, checks))
}

fn opt_fuzz(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    let iters = cfg.trials.unwrap_or(10_000);
    let mut t = Table::new(&["lemma", "family", "trials", "hypotheses_held", "violations"]);
    let mut reports = vec![("moment", "-".to_string(), fuzz_moment(iters, cfg.seed))];
    for (i, f) in [ConcaveRatioFunction::sqrt(), ConcaveRatioFunction::cbrt(), ConcaveRatioFunction::log_ratio()]
        .iter()
        .enumerate()
    {
        reports.push(("concave-ratio", f.name().to_string(), fuzz_concave(f, iters, cfg.seed + 1 + i as u64)?));
    }
    reports.push(("cubic", "-".to_string(), sample_cubic(4096.0, 256.0, 1.0, iters, cfg.seed + 10)?));
    let mut checks = Vec::new();
    for (lemma, family, r) in reports {
        checks.push(Check::new(
            format!("{lemma} {family}"),
            r.violations == 0 && r.hypotheses_held > 0,
            format!("{} of {} held, {} violations", r.hypotheses_held, r.trials, r.violations),
        ));
        t.rows.push(vec![json!(lemma), json!(family), json!(r.trials), json!(r.hypotheses_held), json!(r.violations)]);
    }
    Ok((t, checks))
}

fn rect_ed(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    let mut t = Table::new(&["n", "N", "m", "alpha_num", "alpha_den", "alpha", "bound"]);
    let mut checks = Vec::new();
    let ed = |x: &[u64]| element_distinct(x);
    for n in cfg.ns_or(&[2, 3]) {
        for big_n in 4..=6u64 {
            for m in 1..=n / 2 {
                let best = max_alpha_search(&ed, n, big_n, m)?;
                let bound = 0.5f64.powi(m as i32);
                let (num, den, alpha) = best.map_or((0, 1, 0.0), |(r, _)| (r.num, r.den, r.value()));
                checks.push(Check::new(
                    format!("ED n={n} N={big_n} m={m}"),
                    (num as u128) << m <= den as u128,
                    format!("alpha {num}/{den}"),
                ));
                t.rows.push(vec![json!(n), json!(big_n), json!(m), json!(num), json!(den), json!(alpha), json!(bound)]);
            }
        }
    }
    Ok((t, checks))
}

/// `n^2 ceil(log2(n N))`, the time-space reference for sorting `n` values
/// from `[N]`.
pub fn sort_reference(n: usize, big_n: u64) -> f64 {
    let n = n as f64;
    n * n * (n * big_n as f64).log2().ceil()
}

fn sort_harness(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    let mut t = Table::new(&["n", "budget", "time", "space", "cm", "ts_product", "reference", "ratio"]);
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for n in cfg.ns_or(&[64, 256]) {
        let big_n = (n * n) as u64;
        let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..big_n)).collect();
        let mut sorted = x.clone();
        sorted.sort_unstable();
        let root = (n as f64).sqrt().round() as usize;
        for budget in [1, root.max(1), n] {
            let r = counting_sort_ram(&x, big_n, budget)?;
            let reference = sort_reference(n, big_n);
            let ratio = r.cm() as f64 / reference;
            checks.push(Check::new(
                format!("sort n={n} budget={budget}"),
                r.output == sorted && (0.1..=10.0).contains(&ratio),
                format!("cm/reference {ratio:.3}"),
            ));
            t.rows.push(vec![
                json!(n),
                json!(budget),
                json!(r.time()),
                json!(r.space()),
                json!(r.cm()),
                json!(r.time() as u64 * r.space()),
                json!(reference),
                json!(ratio),
            ]);
        }
    }
    Ok((t, checks))
}

/// The graphs used by the hash-graph audit, with a strategy for each.
pub fn audit_graphs() -> Result<Vec<(String, Dag, PebblingTrace)>> {
    let chain = make_chain(8)?;
    let pyramid = make_pyramid(3)?;
    let sep = make_separation_graph(27)?;
    Ok(vec![
        ("chain(8)".into(), chain.clone(), topological_strategy(&chain)?),
        ("pyramid(3)".into(), pyramid.clone(), topological_strategy(&pyramid)?),
        ("sep(27)".into(), sep, strategy_separation(27)?),
    ])
}

fn hashgraph_audit(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    let seeds = cfg.trials.unwrap_or(20);
    let mut t = Table::new(&[
        "graph",
        "seed",
        "label_ok",
        "extraction_legal",
        "extracted_max_pebbles",
        "strategy_max_pebbles",
        "honest_clean",
        "guess_flagged",
    ]);
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for (name, d, strategy) in audit_graphs()? {
        let strategy_max = run(&d, &strategy)?.max_pebbles;
        let mut failures = 0;
        for s in 0..seeds {
            let seed = cfg.seed.wrapping_add(s);
            let inst = HashGraphInstance::new(d.clone(), 8, seed)?;
            let ev = evaluate_with_strategy(&inst, &strategy)?;
            let label_ok = ev.label == inst.label(inst.target())?;
            let ex = expost_facto(&ev.queries, &inst);
            let extracted = run(&d, &ex.trace).ok().filter(|m| m.reached());
            let honest = audit(&ev.queries, &inst);
            let guessed = drop_one_query(&ev.queries, &inst, &mut rng);
            let flagged = !audit(&guessed, &inst).guessed_labels.is_empty();
            let ext_max = extracted.as_ref().map(|m| m.max_pebbles);
            let ok = label_ok && ext_max.is_some_and(|p| p <= strategy_max) && honest.clean() && flagged;
            failures += usize::from(!ok);
            t.rows.push(vec![
                json!(name),
                json!(seed),
                json!(label_ok),
                json!(extracted.is_some()),
                json!(ext_max),
                json!(strategy_max),
                json!(honest.clean()),
                json!(flagged),
            ]);
        }
        checks.push(Check::new(format!("audit {name}"), failures == 0, format!("{failures} of {seeds} seeds failed")));
    }
    Ok((t, checks))
}

/// An evaluator that skips the call for one non-target node with a child
/// and later uses that node's label as if it had computed it.
pub fn drop_one_query(
    q: &crate::hashgraph::QueryTrace,
    inst: &HashGraphInstance,
    rng: &mut impl Rng,
) -> crate::hashgraph::QueryTrace {
    let d = inst.dag();
    let candidates: Vec<usize> = (0..q.queries.len())
        .filter(|&i| {
            let v = q.queries[i].node;
            v != inst.target() && !d.children(v).is_empty()
        })
        .collect();
    let mut out = q.clone();
    if candidates.is_empty() {
        return out;
    }
    let i = candidates[rng.gen_range(0..candidates.len())];
    out.queries.remove(i);
    if i < out.resident.len() {
        out.resident.remove(i);
    }
    out
}

/// Problem names and the time-space bound each CM bound matches.
pub const TABLE_ROWS: [(&str, &str, &str); 10] = [
    ("sort-classical", "ranking, sorting", "n^2 / log n"),
    ("unique", "unique elements", "n^2"),
    ("matvec", "matrix-vector product", "n^2 log d"),
    ("matmul", "matrix multiplication", "n^6 log d / T"),
    ("qsort", "quantum sorting", "n^3 / T"),
    ("qsort-delta", "quantum sorting, failure delta", "(1 - delta) n^3 / T"),
    ("kcollision", "quantum k disjoint collisions", "k^3 n / T^2"),
    ("qboolmm", "quantum Boolean matrix product", "n^5 / T"),
    ("ham", "Hamming closeness", "n^(2 - o(1))"),
    ("ed", "element distinctness", "n^(2 - o(1))"),
];

/// Parameters for a table row at size `n` and time `t`.
pub fn table_params(n: f64, t: f64) -> BoundParams {
    BoundParams {
        n: Some(n),
        t: Some(t),
        k: Some(n.log2().powi(2)),
        d: Some(2.0),
        g: Some(n / 2.0),
        h: Some(n / 2.0),
        beta: Some(1.0),
        delta: Some(0.5),
        ..Default::default()
    }
}

fn bounds_table(cfg: &ExperimentConfig) -> Result<(Table, Vec<Check>)> {
    debug_assert!(TABLE_ROWS.iter().zip(APPLICATION_TAGS).all(|(r, t)| r.0 == t));
    let mut t = Table::new(&["tag", "problem", "ts_bound", "n", "T", "value", "log2_value", "branch", "flags"]);
    let mut checks = Vec::new();
    for n in cfg.ns_or(&[1024]) {
        let n = n as f64;
        let time = 2.0 * n;
        for (tag, problem, ts) in TABLE_ROWS {
            let r = cm_applications(tag, &table_params(n, time))?;
            let later = cm_applications(tag, &table_params(n, 2.0 * time))?;
            let bigger = cm_applications(tag, &table_params(2.0 * n, time))?;
            let le = |a: Option<f64>, b: Option<f64>| a.unwrap_or(f64::NEG_INFINITY) <= b.unwrap_or(f64::NEG_INFINITY) + 1e-9;
            checks.push(Check::new(
                format!("{tag} monotone at n={n}"),
                le(later.log2_value, r.log2_value) && le(r.log2_value, bigger.log2_value),
                format!("log2 {:?}, doubled T {:?}, doubled n {:?}", r.log2_value, later.log2_value, bigger.log2_value),
            ));
            t.rows.push(vec![
                json!(tag),
                json!(problem),
                json!(ts),
                json!(n),
                json!(time),
                json!(r.value),
                json!(r.log2_value),
                json!(r.branch),
                json!(r.flags.join("; ")),
            ]);
        }
    }
    Ok((t, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_tag() {
        let cfg = ExperimentConfig::new("nope", 0, "unused");
        assert!(build(&cfg).is_err());
    }

    #[test]
    fn csv_has_schema_row() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec![json!(1), json!("x")]);
        let mut out = Vec::new();
        t.write_csv("s v1", &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "# s v1\na,b\n1,x\n");
    }

    #[test]
    fn small_experiments_pass() {
        for tag in ["pebble-separation", "bounds-table", "hashgraph-audit"] {
            let mut cfg = ExperimentConfig::new(tag, 3, "unused");
            cfg.trials = Some(3);
            if tag == "pebble-separation" {
                cfg.ns = Some(vec![27]);
            }
            let (_, checks) = build(&cfg).unwrap();
            assert!(checks.iter().all(|c| c.passed), "{tag}: {checks:?}");
        }
    }
}
