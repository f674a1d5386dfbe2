//! Isotropic Gaussian kernel weights and pseudo-counts.
//!
//! The kernel is max-normalized: a training sample that coincides with the
//! query contributes exactly one observation, and samples further away
//! contribute a fractional observation `exp(−‖x − xᵢ‖² / 2h²)`.

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::Counts;

/// Radius, in bandwidths, beyond which [`weighted_counts_truncated`] drops samples.
///
/// A dropped sample weighs less than `exp(−12.5) ≈ 3.73e−6`, so the absolute
/// error on either count is at most `N · exp(−12.5)` for `N` training samples.
pub const TRUNCATION_RADIUS: f64 = 5.0;

/// Gaussian kernel lengthscale, in feature-space units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Bandwidth(h))
        } else {
            Err(Error::domain(format!("bandwidth must be positive and finite, got {h}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub(crate) fn weight(self, squared_distance: f64) -> f64 {
        (-squared_distance / (2.0 * self.0 * self.0)).exp()
    }
}

/// `exp(−d² / 2h²)`; equals 1 at zero distance.
pub fn kernel_weight(squared_distance: f64, h: Bandwidth) -> Result<f64> {
    if !(squared_distance >= 0.0) {
        return Err(Error::domain(format!(
            "squared distance must be nonnegative, got {squared_distance}"
        )));
    }
    Ok(h.weight(squared_distance))
}

#[inline]
pub fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_inputs(
    query: ArrayView1<'_, f64>,
    train_x: ArrayView2<'_, f64>,
    train_y: &[bool],
) -> Result<()> {
    if train_x.nrows() != train_y.len() {
        return Err(Error::domain(format!(
            "{} training rows but {} labels",
            train_x.nrows(),
            train_y.len()
        )));
    }
    if train_x.nrows() > 0 && query.len() != train_x.ncols() {
        return Err(Error::domain(format!(
            "query has {} features, training data has {}",
            query.len(),
            train_x.ncols()
        )));
    }
    Ok(())
}

/// Kernel-weighted success and total counts around `query`, summed in row order.
pub fn weighted_counts(
    query: ArrayView1<'_, f64>,
    train_x: ArrayView2<'_, f64>,
    train_y: &[bool],
    h: Bandwidth,
) -> Result<Counts> {
    check_inputs(query, train_x, train_y)?;
    let distances = train_x
        .outer_iter()
        .map(|row| squared_distance(query, row));
    Ok(accumulate(distances.zip(train_y.iter().copied()), h))
}

/// Like [`weighted_counts`], but skips samples further than
/// [`TRUNCATION_RADIUS`]` · h` from the query.
pub fn weighted_counts_truncated(
    query: ArrayView1<'_, f64>,
    train_x: ArrayView2<'_, f64>,
    train_y: &[bool],
    h: Bandwidth,
) -> Result<Counts> {
    check_inputs(query, train_x, train_y)?;
    let radius2 = (TRUNCATION_RADIUS * h.value()).powi(2);
    let distances = train_x
        .outer_iter()
        .map(|row| squared_distance(query, row))
        .zip(train_y.iter().copied())
        .filter(|&(d2, _)| d2 <= radius2);
    Ok(accumulate(distances, h))
}

/// Sums kernel weights over `(squared distance, label)` pairs.
///
/// Every prediction path funnels through here so that a given set of
/// distances always produces bit-identical counts.
pub(crate) fn accumulate(pairs: impl Iterator<Item = (f64, bool)>, h: Bandwidth) -> Counts {
    let mut successes = 0.0;
    let mut total = 0.0;
    for (d2, label) in pairs {
        let w = h.weight(d2);
        total += w;
        if label {
            successes += w;
        }
    }
    // successes is a partial sum of the same nonnegative terms, so
    // monotone rounding keeps it ≤ total.
    Counts::new(successes, total).expect("kernel pseudo-counts are finite and ordered")
}

/// Mean Euclidean distance over unordered pairs of rows.
///
/// With `max_pairs` set below the number of pairs, the mean is taken over a
/// uniform sample of distinct pairs drawn with `seed`.
pub fn mean_pairwise_distance(
    train_x: ArrayView2<'_, f64>,
    max_pairs: Option<usize>,
    seed: u64,
) -> Result<f64> {
    let n = train_x.nrows();
    if n < 2 {
        return Err(Error::domain(format!(
            "mean pairwise distance needs at least 2 rows, got {n}"
        )));
    }
    let pair_count = n * (n - 1) / 2;
    if let Some(0) = max_pairs {
        return Err(Error::domain("max_pairs must be positive"));
    }
    match max_pairs {
        Some(m) if m < pair_count => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks = rand::seq::index::sample(&mut rng, pair_count, m);
            let mut sum = 0.0;
            for k in picks.iter() {
                let (i, j) = unrank_pair(k, n);
                sum += squared_distance(train_x.row(i), train_x.row(j)).sqrt();
            }
            Ok(sum / m as f64)
        }
        _ => {
            let row_sums: Vec<f64> = (0..n - 1)
                .into_par_iter()
                .map(|i| {
                    let a = train_x.row(i);
                    train_x
                        .slice(ndarray::s![i + 1.., ..])
                        .axis_iter(Axis(0))
                        .map(|b| squared_distance(a, b).sqrt())
                        .sum::<f64>()
                })
                .collect();
            Ok(row_sums.iter().sum::<f64>() / pair_count as f64)
        }
    }
}

/// Maps `k ∈ [0, n(n−1)/2)` to the pair `(i, j)`, `i < j`, in row-major order
/// `(0,1), (0,2), …, (0,n−1), (1,2), …`.
fn unrank_pair(k: usize, n: usize) -> (usize, usize) {
    // Row i starts at offset i·(2n − i − 1)/2.
    let offset = |i: usize| i * (2 * n - i - 1) / 2;
    let nf = n as f64;
    let disc = (2.0 * nf - 1.0).powi(2) - 8.0 * k as f64;
    let mut i = ((2.0 * nf - 1.0 - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
    i = i.min(n - 2);
    while i > 0 && offset(i) > k {
        i -= 1;
    }
    while i + 1 < n - 1 && offset(i + 1) <= k {
        i += 1;
    }
    (i, i + 1 + k - offset(i))
}
