//! A sorting program over composite values `x_i * n + i` becomes a ranking
//! program, and a ranking program becomes a sorting program.

use cmlab::bprog::{rank_to_sort, read_then_emit, sort_to_rank};
use cmlab::problems::{rank, sort};

fn main() -> cmlab::Result<()> {
    let (n, big_n) = (3usize, 2u64);
    let sorter = read_then_emit(n, n as u64 * big_n, sort)?;
    let ranker = sort_to_rank(&sorter)?;
    let resorter = rank_to_sort(&ranker)?;
    for x in [[1, 0, 1], [0, 0, 0], [1, 1, 0]] {
        println!(
            "x = {x:?}: rank {:?} (reference {:?}), sort {:?}",
            ranker.run(&x)?.output_vector(n),
            rank(&x),
            resorter.run(&x)?.output_vector(n)
        );
    }
    for (name, p) in [("sort over [nN]", &sorter), ("rank over [N]", &ranker), ("sort over [N]", &resorter)] {
        let m = p.metrics();
        println!("{name:<15} T={:<3} S={:.3} CM={:.3}", m.time, m.space, m.cm);
    }
    Ok(())
}
