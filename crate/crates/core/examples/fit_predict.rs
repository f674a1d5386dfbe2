//! Fit a model with a fixed bandwidth and classify a few queries with the
//! reject option.

use ndarray::array;
use wskdc::classifier::classify;
use wskdc::estimator::{fit, Dataset};
use wskdc::kernel::Bandwidth;

fn main() -> wskdc::error::Result<()> {
    let x = array![
        [0.0, 0.0],
        [0.1, 0.2],
        [0.2, -0.1],
        [-0.1, 0.1],
        [0.0, -0.2],
        [2.0, 2.0],
        [2.1, 1.9],
        [1.9, 2.2],
        [2.2, 2.1],
        [2.0, 1.8],
    ];
    let y = vec![false, false, false, false, false, true, true, true, true, true];
    let model = fit(Dataset::new(x, y)?, Bandwidth::new(0.3)?, 0.95)?;

    let queries = array![[0.05, 0.05], [2.0, 2.05], [1.0, 1.0], [10.0, 10.0]];
    let tau = 0.5;
    for (q, b) in queries.outer_iter().zip(model.predict_batch(queries.view())?) {
        let d = classify(&b, tau);
        println!(
            "{:?}: [{:.3}, {:.3}] -> {} (confidence {:.3})",
            q.to_vec(),
            b.lower(),
            b.upper(),
            d.label,
            d.confidence
        );
    }
    Ok(())
}
