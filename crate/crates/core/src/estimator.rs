//! The Wilson score kernel density estimator.
//!
//! Fitting is lazy: the model keeps the training data, and each prediction
//! forms kernel-weighted pseudo-counts around the query before passing them
//! through the Wilson score interval.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{wilson_interval, z_quantile, ConfidenceBound, Counts};
use crate::kernel::{self, Bandwidth};

/// Labeled feature vectors: an `N × n` matrix and `N` binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<bool>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<bool>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::domain(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.ncols() == 0 {
            return Err(Error::domain("dataset needs at least one feature column"));
        }
        if let Some(((row, col), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite feature value {v} at row {row}, column {col}"
            )));
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension `n`.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// A fitted estimator. Immutable; shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct WskdeModel {
    data: Dataset,
    h: Bandwidth,
    z: f64,
    alpha: f64,
    truncate: bool,
}

/// Stores `data` with bandwidth `h` and the `z` quantile for confidence level `alpha`.
pub fn fit(data: Dataset, h: Bandwidth, alpha: f64) -> Result<WskdeModel> {
    if data.is_empty() {
        return Err(Error::domain("cannot fit on an empty dataset"));
    }
    let z = z_quantile(alpha)?;
    Ok(WskdeModel {
        data,
        h,
        z,
        alpha,
        truncate: false,
    })
}

impl WskdeModel {
    /// Rebuilds a model from persisted parts. `z` is recomputed from `alpha`
    /// and must agree with the stored value to 1e-8.
    pub fn from_parts(data: Dataset, h: Bandwidth, alpha: f64, z: f64) -> Result<Self> {
        let model = fit(data, h, alpha)?;
        if (model.z - z).abs() > 1e-8 {
            return Err(Error::domain(format!(
                "stored z {z} disagrees with z({alpha}) = {}",
                model.z
            )));
        }
        Ok(model)
    }

    /// Drops training samples further than [`kernel::TRUNCATION_RADIUS`]`·h`
    /// from each query. Off by default.
    pub fn with_truncation(mut self, truncate: bool) -> Self {
        self.truncate = truncate;
        self
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.h
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn counts(&self, query: ArrayView1<'_, f64>) -> Result<Counts> {
        if query.len() != self.dim() {
            return Err(Error::domain(format!(
                "query has {} features, model expects {}",
                query.len(),
                self.dim()
            )));
        }
        if let Some(v) = query.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("query contains non-finite value {v}")));
        }
        let x = self.data.features();
        let y = self.data.labels();
        if self.truncate {
            kernel::weighted_counts_truncated(query, x, y, self.h)
        } else {
            kernel::weighted_counts(query, x, y, self.h)
        }
    }

    pub fn predict_bounds(&self, query: ArrayView1<'_, f64>) -> Result<ConfidenceBound> {
        wilson_interval(self.counts(query)?, self.z)
    }

    /// Bounds for every row of `queries`, in row order. Rows are evaluated in parallel.
    pub fn predict_batch(&self, queries: ArrayView2<'_, f64>) -> Result<Vec<ConfidenceBound>> {
        if queries.nrows() == 0 {
            return Ok(Vec::new());
        }
        if queries.ncols() != self.dim() {
            return Err(Error::domain(format!(
                "queries have {} features, model expects {}",
                queries.ncols(),
                self.dim()
            )));
        }
        (0..queries.nrows())
            .into_par_iter()
            .map(|i| self.predict_bounds(queries.row(i)))
            .collect()
    }
}

/// Wilson bounds from a regular grid: the query gets the interval of the
/// integer counts in its own bin.
///
/// `bin_edges[k]` holds the strictly increasing edges of dimension `k`. Bins
/// are half-open `[e_i, e_{i+1})` except the last, which includes its upper
/// edge. Training points outside the grid are ignored.
pub fn binned_wilson_bounds(
    data: &Dataset,
    bin_edges: &[Vec<f64>],
    z: f64,
    query: ArrayView1<'_, f64>,
) -> Result<ConfidenceBound> {
    if bin_edges.len() != data.dim() || query.len() != data.dim() {
        return Err(Error::domain(format!(
            "grid has {} dimensions, data {}, query {}",
            bin_edges.len(),
            data.dim(),
            query.len()
        )));
    }
    for (k, edges) in bin_edges.iter().enumerate() {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain(format!(
                "edges for dimension {k} must be at least two strictly increasing values"
            )));
        }
    }
    let query_bin = locate_bin(bin_edges, query)
        .ok_or_else(|| Error::domain("query lies outside the grid"))?;

    let mut successes = 0usize;
    let mut total = 0usize;
    for (row, &label) in data.features().outer_iter().zip(data.labels()) {
        if locate_bin(bin_edges, row).as_deref() == Some(&query_bin[..]) {
            total += 1;
            successes += usize::from(label);
        }
    }
    wilson_interval(Counts::new(successes as f64, total as f64)?, z)
}

fn locate_bin(bin_edges: &[Vec<f64>], point: ArrayView1<'_, f64>) -> Option<Vec<usize>> {
    bin_edges
        .iter()
        .zip(point.iter())
        .map(|(edges, &v)| {
            let last = edges.len() - 1;
            if !(v >= edges[0] && v <= edges[last]) {
                return None;
            }
            // number of edges ≤ v, minus one, capped at the last bin
            let idx = edges.partition_point(|&e| e <= v);
            Some((idx - 1).min(last - 1))
        })
        .collect()
}
