//! Cumulative memory of a budgeted multi-pass sort against n^2 log(nN).

use cmlab::bprog::counting_sort_ram;
use cmlab::experiment::sort_reference;
use rand::{Rng, SeedableRng};

fn main() -> cmlab::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for n in [64usize, 256, 1024] {
        let big_n = (n * n) as u64;
        let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..big_n)).collect();
        for budget in [1, (n as f64).sqrt() as usize, n] {
            let r = counting_sort_ram(&x, big_n, budget)?;
            println!(
                "n={n:<5} budget={budget:<5} T={:<8} S={:<6} CM={:<10} CM/ref={:.3}",
                r.time(),
                r.space(),
                r.cm(),
                r.cm() as f64 / sort_reference(n, big_n)
            );
        }
    }
    Ok(())
}
