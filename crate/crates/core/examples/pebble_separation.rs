//! Time-space product against cumulative memory on the lattice-plus-chain
//! graph: the product grows like n^(4/3) while CM stays linear.

use cmlab::dag::make_separation_graph;
use cmlab::pebbling::{run, strategy_separation};

fn main() -> cmlab::Result<()> {
    println!("{:>6} {:>6} {:>5} {:>7} {:>9} {:>8}", "n", "time", "peak", "cm", "time*peak", "ratio");
    for n in [27, 216, 729, 1728] {
        let m = run(&make_separation_graph(n)?, &strategy_separation(n)?)?;
        println!(
            "{n:>6} {:>6} {:>5} {:>7} {:>9} {:>8.3}",
            m.time,
            m.max_pebbles,
            m.cm,
            m.ts_product(),
            m.ts_product() as f64 / m.cm as f64
        );
    }
    Ok(())
}
