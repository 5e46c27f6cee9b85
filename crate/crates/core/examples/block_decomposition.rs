//! The three ways of cutting a width profile into blocks.

use cmlab::bprog::{adaptive_blocks, exp_blocks, simple_blocks, CostProfile};

fn main() -> cmlab::Result<()> {
    let widths: Vec<u64> = (0..=48u64).map(|t| if t == 0 { 1 } else { 1 << (3 + t % 7) }).collect();
    let profile = CostProfile::from_widths(widths.clone());
    println!("T = {}, space = {}, CM = {}", profile.time, profile.space, profile.cm);

    let s = simple_blocks(&widths, 6)?;
    println!("simple, H = 6: boundaries {:?}, certified CM {}", s.boundaries(), s.cm_lower_bound());

    let a = adaptive_blocks(&widths, f64::sqrt, 8, None)?;
    for b in &a.blocks {
        println!("adaptive block [{}, {}) over {} segments, S = {}", b.start, b.end, b.segments, b.log_width);
    }

    let e = exp_blocks(&profile.log_widths(), 1.0, 16.0)?;
    for b in &e.blocks {
        println!("exponential block [{}, {}) with k* = {:?}", b.start, b.end, b.k_star);
    }
    Ok(())
}
