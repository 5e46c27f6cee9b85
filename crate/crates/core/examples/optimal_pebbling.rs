//! Exhaustive optimal pebblings of small pyramids.

use cmlab::dag::make_pyramid;
use cmlab::pebbling::{min_cm_exhaustive, min_pebbles_exhaustive, run};

fn main() -> cmlab::Result<()> {
    for h in 1..=4 {
        let d = make_pyramid(h)?;
        let best = min_pebbles_exhaustive(&d, 64)?.expect("pyramids are pebblable");
        let m = run(&d, &best.witness)?;
        println!("pyramid({h}): {} pebbles suffice, witness takes {} moves", best.value, m.time);
    }
    let d = make_pyramid(2)?;
    if let Some(r) = min_cm_exhaustive(&d, 12)? {
        println!("pyramid(2): least cumulative memory {}", r.value);
    }
    Ok(())
}
