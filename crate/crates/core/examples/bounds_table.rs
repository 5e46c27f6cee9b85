//! Lower-bound calculators with unit constants, and the completeness
//! threshold sweep.

use cmlab::bounds::{cm_applications, cm_generic_poly, sigma_consistency_sweep, BoundParams};
use cmlab::experiment::{table_params, TABLE_ROWS};

fn main() -> cmlab::Result<()> {
    let n = 1024.0;
    for (tag, problem, ts) in TABLE_ROWS {
        let r = cm_applications(tag, &table_params(n, 2.0 * n))?;
        println!("{problem:<32} TS {ts:<20} CM >= {:.4e} ({})", r.value, r.branch);
    }
    let q = BoundParams { n: Some(256.0), t: Some(4096.0), beta: Some(1.0), ..Default::default() };
    println!("quantum sorting, n=256, T=4096: {}", cm_applications("qsort", &q)?.value);
    println!("generic, m=h1=16, Delta=1/2: {}", cm_generic_poly(16.0, 16.0, 0.5, 2.0, 256.0)?.value);
    let s = sigma_consistency_sweep(1000, 1);
    println!("threshold sweep: {} violations in {} trials", s.violations, s.trials);
    Ok(())
}
