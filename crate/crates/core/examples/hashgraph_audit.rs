//! Evaluates hash-graph labels under a pebbling strategy, extracts the ex
//! post facto pebbling from the oracle calls and audits a cheating trace.

use cmlab::dag::make_separation_graph;
use cmlab::experiment::drop_one_query;
use cmlab::hashgraph::{audit, evaluate_with_strategy, expost_facto, HashGraphInstance};
use cmlab::pebbling::{run, strategy_separation};
use rand::SeedableRng;

fn main() -> cmlab::Result<()> {
    let strategy = strategy_separation(27)?;
    let inst = HashGraphInstance::new(make_separation_graph(27)?, 4, 11)?;
    let ev = evaluate_with_strategy(&inst, &strategy)?;
    println!("target label {} ({} bits)", ev.label.to_hex(), ev.label.bits());
    println!("matches direct evaluation: {}", ev.label == inst.label(inst.target())?);
    println!("oracle calls {}, peak {} bits", ev.oracle_calls(), ev.peak_bits());

    let ex = expost_facto(&ev.queries, &inst);
    let m = run(inst.dag(), &ex.trace)?;
    println!("extracted pebbling: {} moves, peak {} pebbles", m.time, m.max_pebbles);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let cheat = drop_one_query(&ev.queries, &inst, &mut rng);
    let report = audit(&cheat, &inst);
    println!("honest trace clean: {}", audit(&ev.queries, &inst).clean());
    println!("cheating trace guessed labels at queries {:?}", report.guessed_labels);
    Ok(())
}
