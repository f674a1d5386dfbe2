//! Wilson score bounds for a few integer and fractional counts.

use wskdc::interval::{wilson_interval, z_quantile, Counts};

fn main() -> wskdc::error::Result<()> {
    let z = z_quantile(0.95)?;
    println!("z(0.95) = {z:.6}");
    for (s, n) in [(0.0, 0.0), (1.0, 1.0), (5.0, 10.0), (90.0, 100.0), (2.5, 3.2)] {
        let b = wilson_interval(Counts::new(s, n)?, z)?;
        println!(
            "{s:>5}/{n:<5} center {:.4}  [{:.4}, {:.4}]",
            b.center,
            b.lower(),
            b.upper()
        );
    }
    Ok(())
}
