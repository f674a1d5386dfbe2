//! Seeded repeated train/test evaluation, summarized as mean [std].

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wskdc::estimator::Dataset;
use wskdc::harness::{run_repeated, ExperimentConfig};

fn main() -> wskdc::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 300;
    let x: Array2<f64> = Array2::from_shape_fn((n, 3), |_| rng.random_range(-1.0..1.0));
    // positive with probability rising along the first axis
    let y = (0..n)
        .map(|i| rng.random_bool(((x[[i, 0]] + 1.0) / 2.0).clamp(0.0, 1.0)))
        .collect();
    let data = Dataset::new(x, y)?;

    let config = ExperimentConfig {
        repeats: 10,
        parallel: true,
        ..Default::default()
    };
    let report = run_repeated(&data, &config)?;
    for r in &report.records {
        println!("seed {:>2}: h = {:.4}, auprc {:.4}, aurrc {:.4}", r.seed, r.bandwidth, r.auprc, r.aurrc);
    }
    let s = &report.summary;
    println!(
        "{}: AUPRC {:.3} [{:.3}]  AURRC {:.3} [{:.3}]  t_optim {:.3}s",
        report.method, s.auprc.mean, s.auprc.std, s.aurrc.mean, s.aurrc.std, s.t_optim.mean
    );
    if let Some(c) = s.curves.tau_coverage_mean {
        println!("mean coverage at tau = {}: {c:.3}", config.tau);
    }
    Ok(())
}
