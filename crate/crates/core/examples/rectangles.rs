//! Largest embedded rectangles inside element distinctness, against the
//! 2^-m density bound.

use cmlab::problems::{element_distinct, max_alpha_search};

fn main() -> cmlab::Result<()> {
    let ed = |x: &[u64]| element_distinct(x);
    for n in 2..=4 {
        for big_n in 4..=5 {
            for m in 1..=n / 2 {
                if let Some((alpha, r)) = max_alpha_search(&ed, n, big_n, m)? {
                    println!(
                        "n={n} N={big_n} m={m}: alpha = {}/{} (bound 2^-{m}), A={:?} B={:?}",
                        alpha.num, alpha.den, r.a, r.b
                    );
                }
            }
        }
    }
    Ok(())
}
