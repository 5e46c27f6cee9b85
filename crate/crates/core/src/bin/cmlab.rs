use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cmlab::bounds::{self, BoundParams, GeneralParams};
use cmlab::bprog::{self, BranchingProgram, OutputTargets};
use cmlab::dag::{self, Dag, Family};
use cmlab::experiment::{run_experiment, ExperimentConfig, OutputFormat};
use cmlab::hashgraph::{evaluate_with_strategy, HashGraphInstance};
use cmlab::loss::{loss_bounds_check, MonotoneFn};
use cmlab::opt::{self, ConcaveRatioFunction};
use cmlab::pebbling::{self, PebblingTrace};
use cmlab::problems;

#[derive(Parser)]
#[command(name = "cmlab", version, about = "Cumulative-memory complexity laboratory")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (or directory for `experiment`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Graph generation and validation.
    #[command(subcommand)]
    Dag(DagCmd),
    /// Replay, search and canned strategies for the black pebble game.
    #[command(subcommand)]
    Pebble(PebbleCmd),
    /// Hash-graph evaluation driven by a pebbling.
    #[command(subcommand)]
    Hashgraph(HashCmd),
    /// Branching programs: run, cost profile, block decompositions.
    #[command(subcommand)]
    Bp(BpCmd),
    /// Embedded-rectangle search.
    #[command(subcommand)]
    Rect(RectCmd),
    /// Loss function values and bound checks.
    #[command(subcommand)]
    Loss(LossCmd),
    /// Optimization-lemma fuzzing.
    #[command(subcommand)]
    Opt(OptCmd),
    /// Lower-bound calculators.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Batch experiments writing CSV/JSON artifacts.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum DagCmd {
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        param: usize,
    },
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Subcommand)]
enum PebbleCmd {
    /// Replay a trace; `--out` receives the (step, pebbles) profile.
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Exhaustive optimum for tiny graphs.
    Search {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Objective::Pebbles)]
        objective: Objective,
        /// Move budget.
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Emit a strategy trace: `separation` (needs --n) or `topological`
    /// (needs --graph).
    Strategy {
        #[arg(long, default_value = "separation")]
        kind: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Pebbles,
    Cm,
}

#[derive(Subcommand)]
enum HashCmd {
    /// Evaluate the target label; `--out` receives the (step, resident_bits) trace.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 4)]
        c: usize,
    },
}

#[derive(Subcommand)]
enum BpCmd {
    Run {
        #[arg(long)]
        program: PathBuf,
        /// Comma-separated input values.
        #[arg(long, value_delimiter = ',')]
        input: Vec<u64>,
    },
    /// Width profile and cost of a program; CSV gives (layer, width).
    Metrics {
        #[arg(long)]
        program: PathBuf,
    },
    Blocks(BlockArgs),
}

#[derive(Args)]
struct BlockArgs {
    #[arg(long, value_enum)]
    mode: BlockMode,
    #[arg(long, conflicts_with = "widths")]
    program: Option<PathBuf>,
    /// Width profile CSV (layer, width).
    #[arg(long)]
    widths: Option<PathBuf>,
    /// Segment length for simple blocks.
    #[arg(long, default_value_t = 1)]
    h: usize,
    /// h0 family for adaptive blocks.
    #[arg(long, default_value = "identity")]
    h0: String,
    #[arg(long, default_value_t = 2)]
    h1: usize,
    /// Output-target constants for adaptive blocks: K, C, alpha, c.
    #[arg(long, num_args = 4, value_names = ["K", "C", "ALPHA", "C_EXP"])]
    targets: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Input length for exponential blocks.
    #[arg(long)]
    n: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockMode {
    Simple,
    Adaptive,
    Exp,
}

#[derive(Subcommand)]
enum RectCmd {
    Search {
        /// `ed` (element distinctness) or `ham` (Hamming closeness, complemented).
        #[arg(long = "fn", default_value = "ed")]
        function: String,
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        big_n: u64,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum LossCmd {
    Compute {
        /// identity | logplus | constant | power:c | table:path
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: f64,
        /// Ratio used in the part (c) bound.
        #[arg(long, default_value_t = 2.0)]
        c: f64,
    },
}

#[derive(Subcommand)]
enum OptCmd {
    Fuzz {
        /// c1: the moment inequality; c2: the concave-ratio inequality.
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 10_000)]
        iters: u64,
        /// sqrt | cbrt | log for c2.
        #[arg(long, default_value = "sqrt")]
        family: String,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    Compute(BoundArgs),
    /// Largest alpha for the threshold-polynomial completeness bound.
    Alpha {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// An application tag, `generic-poly` or `general`.
    #[arg(long)]
    tag: String,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long = "N")]
    domain: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    constant: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    #[arg(long)]
    explicit: bool,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long = "m-prime")]
    m_prime: Option<f64>,
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long = "K")]
    k_base: Option<f64>,
    #[arg(long = "C")]
    c_const: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "c-exp")]
    c_exp: Option<f64>,
    #[arg(long, default_value = "constant")]
    h0: String,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    tag: String,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    family: Option<String>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "chain" => Ok(Family::Chain),
        "pyramid" => Ok(Family::Pyramid),
        "lattice" => Ok(Family::Lattice),
        "sep" | "separation" => Ok(Family::Separation),
        _ => Err(format!("unknown family {s:?}")),
    }
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(out: &Option<PathBuf>, v: &impl Serialize) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    Ok(())
}

fn print_json(v: &impl Serialize) -> anyhow::Result<()> {
    emit_json(&None, v)
}

fn load_graph(p: &Path) -> anyhow::Result<Dag> {
    Dag::load(p).with_context(|| format!("loading graph {}", p.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let out = &cli.out;
    match cli.cmd {
        Cmd::Dag(DagCmd::Gen { family, param }) => {
            let d = dag::generate(family, param)?;
            emit_json(out, &d.to_json())?;
        }
        Cmd::Dag(DagCmd::Validate { graph }) => {
            let r = dag::validate(&load_graph(&graph)?);
            print_json(&r)?;
            return Ok(r.passed());
        }
        Cmd::Pebble(PebbleCmd::Run { graph, trace }) => {
            let d = load_graph(&graph)?;
            let m = pebbling::run(&d, &PebblingTrace::load(&trace)?)?;
            match cli.format {
                Format::Csv => m.write_profile_csv(sink(out)?)?,
                Format::Json => emit_json(out, &m)?,
            }
            if out.is_some() {
                print_json(&serde_json::json!({
                    "time": m.time, "max_pebbles": m.max_pebbles, "cm": m.cm, "reached_at": m.reached_at,
                }))?;
            }
            return Ok(m.reached());
        }
        Cmd::Pebble(PebbleCmd::Search { graph, objective, budget }) => {
            let d = load_graph(&graph)?;
            let r = match objective {
                Objective::Pebbles => pebbling::min_pebbles_exhaustive(&d, budget)?,
                Objective::Cm => pebbling::min_cm_exhaustive(&d, budget)?,
            };
            match r {
                Some(r) => emit_json(out, &serde_json::json!({ "value": r.value, "witness": r.witness }))?,
                None => {
                    eprintln!("no pebbling within {budget} moves");
                    return Ok(false);
                }
            }
        }
        Cmd::Pebble(PebbleCmd::Strategy { kind, n, graph }) => {
            let t = match (kind.as_str(), n, graph) {
                ("separation", Some(n), _) => pebbling::strategy_separation(n)?,
                ("chain", Some(n), _) => pebbling::chain_walk(n),
                ("topological", _, Some(g)) => pebbling::topological_strategy(&load_graph(&g)?)?,
                _ => bail!("use --kind separation|chain with --n, or --kind topological with --graph"),
            };
            emit_json(out, &t)?;
        }
        Cmd::Hashgraph(HashCmd::Eval { graph, trace, c }) => {
            let inst = HashGraphInstance::new(load_graph(&graph)?, c, cli.seed)?;
            let ev = evaluate_with_strategy(&inst, &PebblingTrace::load(&trace)?)?;
            if let Some(p) = out {
                ev.write_memory_csv(File::create(p)?)?;
            }
            print_json(&serde_json::json!({
                "label": ev.label.to_hex(),
                "label_bits": ev.label.bits(),
                "matches_direct": ev.label == inst.label(inst.target())?,
                "oracle_calls": ev.oracle_calls(),
                "peak_bits": ev.peak_bits(),
                "cumulative_bits": ev.memory_bits.iter().sum::<u64>(),
            }))?;
        }
        Cmd::Bp(BpCmd::Run { program, input }) => {
            let p = BranchingProgram::load(&program)?;
            let r = p.run(&input)?;
            emit_json(out, &serde_json::json!({ "outputs": r.outputs, "path": r.path }))?;
        }
        Cmd::Bp(BpCmd::Metrics { program }) => {
            let m = BranchingProgram::load(&program)?.metrics();
            match cli.format {
                Format::Csv => bprog::write_width_csv(&m.widths, sink(out)?)?,
                Format::Json => emit_json(out, &m)?,
            }
        }
        Cmd::Bp(BpCmd::Blocks(a)) => {
            let widths = match (&a.program, &a.widths) {
                (Some(p), _) => BranchingProgram::load(p)?.widths(),
                (None, Some(w)) => bprog::read_width_csv(File::open(w)?)?,
                (None, None) => bail!("pass --program or --widths"),
            };
            let d = match a.mode {
                BlockMode::Simple => bprog::simple_blocks(&widths, a.h)?,
                BlockMode::Adaptive => {
                    let h0 = MonotoneFn::parse(&a.h0)?;
                    let targets = a.targets.as_ref().map(|t| OutputTargets {
                        k_base: t[0],
                        c_const: t[1],
                        alpha: t[2],
                        t_pow: t[3],
                    });
                    bprog::adaptive_blocks(&widths, |s| h0.eval(s), a.h1, targets.as_ref())?
                }
                BlockMode::Exp => {
                    let n = a.n.context("exponential blocks need --n")?;
                    let space = bprog::CostProfile::from_widths(widths).log_widths();
                    bprog::exp_blocks(&space, a.beta, n)?
                }
            };
            emit_json(out, &d)?;
        }
        Cmd::Rect(RectCmd::Search { function, n, big_n, m }) => {
            let f: Box<dyn Fn(&[u64]) -> bool> = match function.as_str() {
                "ed" => Box::new(problems::element_distinct),
                "ham" => Box::new(move |x: &[u64]| !problems::hamming_close(x, big_n)),
                other => bail!("unknown function {other:?}; use ed or ham"),
            };
            match problems::max_alpha_search(&f, n, big_n, m)? {
                Some((alpha, rect)) => emit_json(
                    out,
                    &serde_json::json!({ "alpha": alpha, "alpha_value": alpha.value(), "rectangle": rect }),
                )?,
                None => emit_json(out, &serde_json::json!({ "alpha": null }))?,
            }
        }
        Cmd::Loss(LossCmd::Compute { family, n, c }) => {
            let r = loss_bounds_check(&MonotoneFn::parse(&family)?, n, c)?;
            emit_json(out, &r)?;
            return Ok(r.all_hold());
        }
        Cmd::Opt(OptCmd::Fuzz { lemma, iters, family }) => {
            let r = match lemma.as_str() {
                "c1" | "moment" => opt::fuzz_moment(iters, cli.seed),
                "c2" | "concave" => {
                    let f = match family.as_str() {
                        "sqrt" => ConcaveRatioFunction::sqrt(),
                        "cbrt" => ConcaveRatioFunction::cbrt(),
                        "log" => ConcaveRatioFunction::log_ratio(),
                        other => bail!("unknown family {other:?}"),
                    };
                    opt::fuzz_concave(&f, iters, cli.seed)?
                }
                other => bail!("unknown lemma {other:?}; use c1 or c2"),
            };
            emit_json(out, &r)?;
            return Ok(r.violations == 0);
        }
        Cmd::Bounds(BoundsCmd::Compute(a)) => {
            let r = match a.tag.as_str() {
                "generic-poly" => bounds::cm_generic_poly(
                    a.m.context("--m")?,
                    a.h1.context("--h1")?,
                    a.delta.unwrap_or(0.0),
                    a.k_base.context("--K")?,
                    a.t.context("--T")?,
                )?,
                "general" => {
                    let n = a.n.context("--n")?;
                    let m = a.m.context("--m")?;
                    let p = GeneralParams {
                        n,
                        domain: a.domain.unwrap_or(n),
                        m,
                        m_prime: a.m_prime.unwrap_or(m),
                        h1: a.h1.context("--h1")?,
                        k_base: a.k_base.context("--K")?,
                        c_const: a.c_const.unwrap_or(1.0),
                        alpha: a.alpha.unwrap_or(1.0),
                        c_exp: a.c_exp.unwrap_or(1.0),
                        t: a.t.context("--T")?,
                    };
                    bounds::cm_general(&MonotoneFn::parse(&a.h0)?, &p)?
                }
                tag => bounds::cm_applications(
                    tag,
                    &BoundParams {
                        n: a.n,
                        t: a.t,
                        k: a.k,
                        d: a.d,
                        domain: a.domain,
                        g: a.g,
                        h: a.h,
                        beta: a.beta,
                        delta: a.delta,
                        constant: a.constant,
                        exponent: a.exponent,
                        explicit: a.explicit,
                    },
                )?,
            };
            emit_json(out, &r)?;
        }
        Cmd::Bounds(BoundsCmd::Alpha { gamma, b }) => {
            print_json(&serde_json::json!({ "gamma": gamma, "b": b, "threshold": bounds::alpha_threshold(gamma, b) }))?;
        }
        Cmd::Experiment(a) => {
            let cfg = ExperimentConfig {
                tag: a.tag,
                seed: cli.seed,
                out_dir: out.clone().unwrap_or_else(|| PathBuf::from("artifacts")),
                format: match cli.format {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                },
                ns: a.n,
                trials: a.trials,
                family: a.family,
            };
            let report = run_experiment(&cfg)?;
            for c in &report.checks {
                eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            eprintln!("wrote {} rows to {}", report.rows, report.path.display());
            return Ok(report.passed());
        }
    }
    Ok(true)
}
