//! Histogram-style Wilson bounds next to the kernel estimate on a 1-D
//! problem where the true success rate is a smooth curve.

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wskdc::estimator::{binned_wilson_bounds, fit, Dataset};
use wskdc::kernel::Bandwidth;

fn main() -> wskdc::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 500;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let p = |x: f64| 0.5 + 0.4 * (6.0 * x).sin();
    let ys = xs.iter().map(|&x| rng.random_bool(p(x))).collect();
    let data = Dataset::new(Array2::from_shape_vec((n, 1), xs).unwrap(), ys)?;

    let edges: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let model = fit(data.clone(), Bandwidth::new(0.03)?, 0.95)?;
    println!("   x   p(x)   binned            kernel");
    for k in 0..20 {
        let x = (k as f64 + 0.5) / 20.0;
        let q = array![x];
        let b = binned_wilson_bounds(&data, std::slice::from_ref(&edges), model.z(), q.view())?;
        let w = model.predict_bounds(q.view())?;
        println!(
            "{x:.3}  {:.3}  [{:.3}, {:.3}]  [{:.3}, {:.3}]",
            p(x),
            b.lower(),
            b.upper(),
            w.lower(),
            w.upper()
        );
    }
    Ok(())
}
