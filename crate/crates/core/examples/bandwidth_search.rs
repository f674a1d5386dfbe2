//! Cross-validated bandwidth search on two noisy clusters.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wskdc::bandwidth::{optimize_bandwidth, BandwidthSearchConfig};
use wskdc::estimator::Dataset;

fn main() -> wskdc::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 400;
    let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let x = Array2::from_shape_fn((n, 2), |(i, k)| {
        let center = if y[i] && k == 0 { 1.5 } else { 0.0 };
        center + rng.random_range(-1.0..1.0)
    });
    let data = Dataset::new(x, y)?;

    let report = optimize_bandwidth(&data, &BandwidthSearchConfig::default())?;
    println!("mean pairwise distance d = {:.4}", report.d);
    for c in &report.candidates {
        let mark = if c.h == report.selected { " <-" } else { "" };
        println!("h = {:.5}  nll = {:.5}{mark}", c.h.value(), c.mean_nll);
    }
    Ok(())
}
