//! Optimization and inference time against training set size.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wskdc::cli::bench;
use wskdc::estimator::Dataset;
use wskdc::harness::ExperimentConfig;

fn main() -> wskdc::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let n = 1000;
    let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(0.0..1.0));
    let y = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let data = Dataset::new(x, y)?;

    println!("size  t_optim (s)        t_infer (s)");
    for row in bench(&data, &[125, 250, 500, 1000], &ExperimentConfig::default(), 0)? {
        println!(
            "{:>4}  {:.4} [{:.4}]  {:.5} [{:.5}]",
            row.size, row.t_optim.mean, row.t_optim.std, row.t_infer.mean, row.t_infer.std
        );
    }
    Ok(())
}
