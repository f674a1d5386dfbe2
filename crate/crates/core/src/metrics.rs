//! Precision and recall reject curves.
//!
//! Test samples are ordered by ranking score; rejecting the `i` least
//! confident leaves coverage `c_i = (N − i)/N`. Selective precision and recall
//! are evaluated on the retained samples for every `i = 0..N−1`, and the areas
//! under the curves are the Riemann sums `(1/N) Σ precision_i` and
//! `(1/N) Σ recall_i`.
//!
//! When a retained subset predicts no positives, its precision is 1; when it
//! holds no positive labels, its recall is 1.

use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, shifted_mean, MeanStd};

/// Points on the common coverage grid used to aggregate runs: 1.0, 0.999, …, 0.0.
pub const SUMMARY_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq)]
pub struct RejectCurves {
    /// Strictly decreasing from 1.0 to 1/N.
    pub coverage: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub auprc: f64,
    pub aurrc: f64,
    /// Largest coverage at which every retained score exceeds `tau`.
    pub tau_coverage: Option<f64>,
}

impl RejectCurves {
    pub fn len(&self) -> usize {
        self.coverage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coverage.is_empty()
    }
}

fn ratio_or_one(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn reject_curves(
    scores: &[f64],
    predicted: &[bool],
    labels: &[bool],
    tau: Option<f64>,
) -> Result<RejectCurves> {
    let n = scores.len();
    if n == 0 {
        return Err(Error::domain("reject curves need at least one sample"));
    }
    if predicted.len() != n || labels.len() != n {
        return Err(Error::domain(format!(
            "length mismatch: {n} scores, {} predictions, {} labels",
            predicted.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::domain(format!("score {s} is not a number")));
    }

    // ascending by score; sort_by is stable so ties keep input order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut precision = vec![0.0; n];
    let mut recall = vec![0.0; n];
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for i in (0..n).rev() {
        let k = order[i];
        match (predicted[k], labels[k]) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
        precision[i] = ratio_or_one(tp, tp + fp);
        recall[i] = ratio_or_one(tp, tp + fn_);
    }

    let coverage: Vec<f64> = (0..n).map(|i| (n - i) as f64 / n as f64).collect();
    let tau_coverage = tau.and_then(|t| {
        order
            .iter()
            .position(|&k| scores[k] > t)
            .map(|i| coverage[i])
    });

    Ok(RejectCurves {
        auprc: precision.iter().sum::<f64>() / n as f64,
        aurrc: recall.iter().sum::<f64>() / n as f64,
        coverage,
        precision,
        recall,
        tau_coverage,
    })
}

/// Unselective precision and recall of `predicted` against `labels`.
pub fn precision_recall(predicted: &[bool], labels: &[bool]) -> (f64, f64) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (&p, &y) in predicted.iter().zip(labels) {
        match (p, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    (ratio_or_one(tp, tp + fp), ratio_or_one(tp, tp + fn_))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub coverage: f64,
    pub precision: f64,
    pub recall: f64,
    pub tau_marker: bool,
}

pub fn curve_to_table(curves: &RejectCurves) -> Vec<CurveRow> {
    let mut marked = false;
    curves
        .coverage
        .iter()
        .zip(&curves.precision)
        .zip(&curves.recall)
        .map(|((&coverage, &precision), &recall)| {
            let tau_marker = !marked && curves.tau_coverage == Some(coverage);
            marked |= tau_marker;
            CurveRow {
                coverage,
                precision,
                recall,
                tau_marker,
            }
        })
        .collect()
}

/// Pointwise mean and 5%/95% quantiles of one curve across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q95: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub runs: usize,
    pub auprc: MeanStd,
    pub aurrc: MeanStd,
    /// Decreasing coverage grid, 1.0 down to 0.0.
    pub grid: Vec<f64>,
    pub precision: Band,
    pub recall: Band,
    /// Mean τ-coverage over the runs that reached τ at all.
    pub tau_coverage_mean: Option<f64>,
    /// Grid row nearest to `tau_coverage_mean`.
    pub tau_marker_row: Option<usize>,
}

/// Index of the curve point that represents coverage `m/1000`: the smallest
/// retained set with at least that coverage.
fn grid_index(n: usize, m: usize, points: usize) -> usize {
    let scale = points - 1;
    ((n * (scale - m)) / scale).min(n - 1)
}

/// Step-resamples `curve` onto the decreasing grid.
pub fn resample(curve: &[f64], points: usize) -> Vec<f64> {
    let n = curve.len();
    (0..points)
        .map(|r| curve[grid_index(n, points - 1 - r, points)])
        .collect()
}

fn band(curves: &[Vec<f64>]) -> Band {
    let points = curves[0].len();
    let mut mean = Vec::with_capacity(points);
    let mut q05 = Vec::with_capacity(points);
    let mut q95 = Vec::with_capacity(points);
    let mut column = Vec::with_capacity(curves.len());
    for r in 0..points {
        column.clear();
        column.extend(curves.iter().map(|c| c[r]));
        mean.push(shifted_mean(&column));
        column.sort_by(f64::total_cmp);
        q05.push(quantile_sorted(&column, 0.05));
        q95.push(quantile_sorted(&column, 0.95));
    }
    Band { mean, q05, q95 }
}

/// Aggregates repeated runs (possibly of different test-set sizes) onto a
/// common 1001-point coverage grid.
pub fn summarize_runs(runs: &[RejectCurves]) -> Result<RunSummary> {
    if runs.is_empty() {
        return Err(Error::domain("cannot summarize an empty list of runs"));
    }
    if runs.iter().any(|r| r.is_empty()) {
        return Err(Error::domain("cannot summarize an empty curve"));
    }
    let points = SUMMARY_GRID_POINTS;
    let scale = (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|r| (points - 1 - r) as f64 / scale).collect();

    let precision: Vec<Vec<f64>> = runs.iter().map(|r| resample(&r.precision, points)).collect();
    let recall: Vec<Vec<f64>> = runs.iter().map(|r| resample(&r.recall, points)).collect();

    let auprc: Vec<f64> = runs.iter().map(|r| r.auprc).collect();
    let aurrc: Vec<f64> = runs.iter().map(|r| r.aurrc).collect();

    let taus: Vec<f64> = runs.iter().filter_map(|r| r.tau_coverage).collect();
    let tau_coverage_mean = (!taus.is_empty()).then(|| MeanStd::of(&taus).mean);
    let tau_marker_row = tau_coverage_mean.map(|t| {
        let m = (t * scale).round() as usize;
        points - 1 - m.min(points - 1)
    });

    Ok(RunSummary {
        runs: runs.len(),
        auprc: MeanStd::of(&auprc),
        aurrc: MeanStd::of(&aurrc),
        grid,
        precision: band(&precision),
        recall: band(&recall),
        tau_coverage_mean,
        tau_marker_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn example() -> RejectCurves {
        reject_curves(
            &[0.1, 0.2, 0.3, 0.4],
            &[true, true, false, true],
            &[false, true, false, true],
            Some(0.25),
        )
        .unwrap()
    }

    #[test]
    fn four_sample_example() {
        let c = example();
        assert_eq!(c.coverage, vec![1.0, 0.75, 0.5, 0.25]);
        assert_eq!(c.precision, vec![2.0 / 3.0, 1.0, 1.0, 1.0]);
        assert_eq!(c.recall, vec![1.0; 4]);
        assert_abs_diff_eq!(c.auprc, 11.0 / 12.0, epsilon = 1e-15);
        assert_eq!(c.aurrc, 1.0);
        assert_eq!(c.tau_coverage, Some(0.5));
    }

    #[test]
    fn input_validation() {
        assert!(reject_curves(&[], &[], &[], None).is_err());
        assert!(reject_curves(&[0.1], &[true, false], &[true], None).is_err());
        assert!(reject_curves(&[f64::NAN], &[true], &[true], None).is_err());
    }

    #[test]
    fn separable_scores_give_perfect_areas() {
        let scores = [0.9, 0.8, 0.95, 0.7, 0.85];
        let pred = [true, false, true, false, true];
        let c = reject_curves(&scores, &pred, &pred, None).unwrap();
        assert_eq!((c.auprc, c.aurrc), (1.0, 1.0));
        assert_eq!(c.tau_coverage, None);
    }

    #[test]
    fn no_retained_sample_beats_tau() {
        let c = reject_curves(&[0.1, 0.2], &[true, true], &[true, true], Some(0.9)).unwrap();
        assert_eq!(c.tau_coverage, None);
        assert!(curve_to_table(&c).iter().all(|r| !r.tau_marker));
    }

    #[test]
    fn ties_resolve_by_input_order() {
        // the first (wrong) sample is rejected first among equal scores
        let c = reject_curves(&[0.5, 0.5], &[true, true], &[false, true], None).unwrap();
        assert_eq!(c.precision, vec![0.5, 1.0]);
        let c = reject_curves(&[0.5, 0.5], &[true, true], &[true, false], None).unwrap();
        assert_eq!(c.precision, vec![0.5, 0.0]);
    }

    #[test]
    fn table_rows() {
        let rows = curve_to_table(&example());
        assert_eq!(rows.len(), 4);
        let marked: Vec<f64> = rows.iter().filter(|r| r.tau_marker).map(|r| r.coverage).collect();
        assert_eq!(marked, vec![0.5]);
        let single = reject_curves(&[0.3], &[true], &[true], None).unwrap();
        let rows = curve_to_table(&single);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].coverage, 1.0);
    }

    #[test]
    fn resampling_steps() {
        // N = 4: coverage 1, .75, .5, .25
        let curve = [10.0, 20.0, 30.0, 40.0];
        let r = resample(&curve, SUMMARY_GRID_POINTS);
        assert_eq!(r.len(), 1001);
        assert_eq!(r[0], 10.0); // coverage 1.0
        assert_eq!(r[250], 20.0); // coverage 0.75
        assert_eq!(r[251], 20.0); // coverage 0.749 → smallest set ≥ it is 0.75
        assert_eq!(r[249], 10.0); // coverage 0.751 needs the full set
        assert_eq!(r[750], 40.0); // coverage 0.25
        assert_eq!(r[1000], 40.0); // coverage 0 → smallest set
    }

    #[test]
    fn single_run_summary_collapses() {
        let c = example();
        let s = summarize_runs(std::slice::from_ref(&c)).unwrap();
        assert_eq!(s.auprc.std, 0.0);
        assert_eq!(s.auprc.mean, c.auprc);
        assert_eq!(s.precision.q05, s.precision.mean);
        assert_eq!(s.precision.q95, s.precision.mean);
        assert_eq!(s.tau_marker_row, Some(500));
    }

    #[test]
    fn two_run_summary() {
        let mut a = example();
        let mut b = example();
        a.auprc = 0.9;
        b.auprc = 1.0;
        let s = summarize_runs(&[a, b]).unwrap();
        assert_abs_diff_eq!(s.auprc.mean, 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(s.auprc.std, 0.070_710_678_118_654_75, epsilon = 1e-12);
    }

    #[test]
    fn identical_runs_have_zero_spread() {
        let runs = vec![example(); 50];
        let s = summarize_runs(&runs).unwrap();
        assert_eq!(s.auprc.std, 0.0);
        assert_eq!(s.aurrc.std, 0.0);
        let expected = resample(&runs[0].precision, SUMMARY_GRID_POINTS);
        assert_eq!(s.precision.mean, expected);
        assert_eq!(s.precision.q05, expected);
        assert_eq!(s.auprc.mean, runs[0].auprc);
        assert!(summarize_runs(&[]).is_err());
    }

    proptest! {
        #[test]
        fn curve_invariants(
            rows in proptest::collection::vec((0.0f64..1.0, any::<bool>(), any::<bool>()), 1..80)
        ) {
            let scores: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let pred: Vec<bool> = rows.iter().map(|r| r.1).collect();
            let labels: Vec<bool> = rows.iter().map(|r| r.2).collect();
            let c = reject_curves(&scores, &pred, &labels, Some(0.5)).unwrap();
            let n = scores.len();
            prop_assert_eq!(c.coverage[0], 1.0);
            prop_assert_eq!(c.coverage[n - 1], 1.0 / n as f64);
            prop_assert!(c.coverage.windows(2).all(|w| w[0] > w[1]));
            let (p, r) = precision_recall(&pred, &labels);
            prop_assert_eq!(c.precision[0], p);
            prop_assert_eq!(c.recall[0], r);
            prop_assert!((0.0..=1.0).contains(&c.auprc) && (0.0..=1.0).contains(&c.aurrc));
            let mean_p = c.precision.iter().sum::<f64>() / n as f64;
            prop_assert!((c.auprc - mean_p).abs() < 1e-12);
        }

        #[test]
        fn areas_ignore_input_order(
            rows in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..60),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = rows.len();
            // distinct scores
            let scores: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pick = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
            let pred: Vec<bool> = rows.iter().map(|r| r.0).collect();
            let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
            let a = reject_curves(&scores, &pred, &labels, None).unwrap();
            let b = reject_curves(
                &pick(&scores),
                &perm.iter().map(|&i| pred[i]).collect::<Vec<_>>(),
                &perm.iter().map(|&i| labels[i]).collect::<Vec<_>>(),
                None,
            ).unwrap();
            prop_assert_eq!(a.auprc, b.auprc);
            prop_assert_eq!(a.aurrc, b.aurrc);
        }
    }
}
