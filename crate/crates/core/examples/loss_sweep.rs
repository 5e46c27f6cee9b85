//! The loss function for the registered families with its bounds.

use cmlab::loss::{loss_bounds_check, MonotoneFn};

fn main() -> cmlab::Result<()> {
    let families = [MonotoneFn::Identity, MonotoneFn::LogPlus, MonotoneFn::Power(2.0), MonotoneFn::Power(3.0)];
    for p in &families {
        for e in [4, 8, 12, 16, 20] {
            let n = f64::from(1u32 << e);
            let r = loss_bounds_check(p, n, 2.0)?;
            println!("{:>10} n=2^{e:<2} loss {:.6} bounds hold: {}", p.name(), r.loss.value, r.all_hold());
        }
    }
    Ok(())
}
