//! Bandwidth selection by cross-validated negative log-likelihood over a
//! logarithmic grid.
//!
//! The grid spans `[lo·d, hi·d]` where `d` is the mean pairwise distance of the
//! training rows. Each candidate is scored by the Bernoulli NLL of held-out
//! labels, with `q` taken at the center of the predicted Wilson bound.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{fit, Dataset, WskdeModel};
use crate::interval::{wilson_interval, z_quantile, Counts};
use crate::kernel::{mean_pairwise_distance, squared_distance, Bandwidth};

/// Probabilities are clamped to `[ε, 1 − ε]` before taking logs.
pub const NLL_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSearchConfig {
    pub folds: usize,
    pub steps: usize,
    pub range_lo_factor: f64,
    pub range_hi_factor: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Keep each fold's class balance close to the full set's.
    pub stratified: bool,
    /// Estimate `d` from this many sampled pairs instead of all of them.
    pub max_pairs: Option<usize>,
}

impl Default for BandwidthSearchConfig {
    fn default() -> Self {
        BandwidthSearchConfig {
            folds: 10,
            steps: 20,
            range_lo_factor: 1e-2,
            range_hi_factor: 1e-1,
            alpha: 0.95,
            seed: 0,
            stratified: false,
            max_pairs: None,
        }
    }
}

impl BandwidthSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::domain(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.steps < 2 {
            return Err(Error::domain(format!("steps must be at least 2, got {}", self.steps)));
        }
        let (lo, hi) = (self.range_lo_factor, self.range_hi_factor);
        if !(lo > 0.0 && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!(
                "range factors must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        z_quantile(self.alpha)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub h: Bandwidth,
    pub mean_nll: f64,
    pub fold_nll: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSearchReport {
    /// In increasing order of bandwidth.
    pub candidates: Vec<CandidateScore>,
    pub selected: Bandwidth,
    /// Mean pairwise distance of the training rows.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    /// Ascending row indices.
    pub train: Vec<usize>,
    /// Held-out row indices, in shuffled order.
    pub holdout: Vec<usize>,
}

/// Seeded shuffle of `0..n` cut into `folds` contiguous chunks whose sizes
/// differ by at most one.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    check_fold_count(n, folds)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let base = n / folds;
    let extra = n % folds;
    let mut start = 0;
    let chunks = (0..folds).map(|f| {
        let len = base + usize::from(f < extra);
        let chunk = order[start..start + len].to_vec();
        start += len;
        chunk
    });
    Ok(folds_from_holdouts(n, chunks.collect()))
}

/// Like [`kfold_split`], but positives and negatives are shuffled separately
/// and dealt round-robin so every fold sees both classes where possible.
pub fn stratified_kfold_split(labels: &[bool], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    let n = labels.len();
    check_fold_count(n, folds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i]);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut holdouts = vec![Vec::with_capacity(n / folds + 1); folds];
    for (k, i) in pos.into_iter().chain(neg).enumerate() {
        holdouts[k % folds].push(i);
    }
    Ok(folds_from_holdouts(n, holdouts))
}

fn check_fold_count(n: usize, folds: usize) -> Result<()> {
    if folds == 0 || folds > n {
        return Err(Error::domain(format!(
            "cannot split {n} samples into {folds} folds"
        )));
    }
    Ok(())
}

fn folds_from_holdouts(n: usize, holdouts: Vec<Vec<usize>>) -> Vec<Fold> {
    holdouts
        .into_iter()
        .map(|holdout| {
            let mut held = vec![false; n];
            for &i in &holdout {
                held[i] = true;
            }
            let train = (0..n).filter(|&i| !held[i]).collect();
            Fold { train, holdout }
        })
        .collect()
}

#[inline]
fn bernoulli_nll(q: f64, label: bool) -> f64 {
    let q = q.clamp(NLL_EPSILON, 1.0 - NLL_EPSILON);
    if label {
        -q.ln()
    } else {
        -(1.0 - q).ln()
    }
}

/// Mean Bernoulli NLL of `holdout` labels under the bound centers of `model`.
pub fn holdout_nll(model: &WskdeModel, holdout: &Dataset) -> Result<f64> {
    if holdout.is_empty() {
        return Err(Error::domain("holdout set is empty"));
    }
    let bounds = model.predict_batch(holdout.features())?;
    let total: f64 = bounds
        .iter()
        .zip(holdout.labels())
        .map(|(b, &y)| bernoulli_nll(b.center, y))
        .sum();
    Ok(total / holdout.len() as f64)
}

/// Log-uniform candidates `d·lo·(hi/lo)^(k/(steps−1))`, `k = 0..steps`.
pub fn candidate_grid(d: f64, config: &BandwidthSearchConfig) -> Result<Vec<Bandwidth>> {
    config.validate()?;
    let lo = d * config.range_lo_factor;
    let ratio = config.range_hi_factor / config.range_lo_factor;
    let last = (config.steps - 1) as f64;
    (0..config.steps)
        .map(|k| Bandwidth::new(lo * ratio.powf(k as f64 / last)))
        .collect()
}

/// Runs the cross-validated line search and picks the candidate with the
/// lowest mean held-out NLL. Ties go to the smaller bandwidth.
pub fn optimize_bandwidth(
    data: &Dataset,
    config: &BandwidthSearchConfig,
) -> Result<BandwidthSearchReport> {
    config.validate()?;
    if data.len() < 2 || data.len() < config.folds {
        return Err(Error::domain(format!(
            "bandwidth search needs at least max(2, folds={}) samples, got {}",
            config.folds,
            data.len()
        )));
    }
    let d = mean_pairwise_distance(data.features(), config.max_pairs, config.seed)?;
    if !(d > 0.0) {
        return Err(Error::domain(
            "all training points are identical (mean pairwise distance is 0); \
             no bandwidth scale can be derived",
        ));
    }
    let grid = candidate_grid(d, config)?;
    let z = z_quantile(config.alpha)?;
    let folds = if config.stratified {
        stratified_kfold_split(data.labels(), config.folds, config.seed)?
    } else {
        kfold_split(data.len(), config.folds, config.seed)?
    };

    // fold_nll[f][k]: mean NLL of fold f under candidate k
    let fold_nll: Vec<Vec<f64>> = folds
        .iter()
        .map(|fold| fold_scores(data, fold, &grid, z))
        .collect::<Result<_>>()?;

    let candidates: Vec<CandidateScore> = grid
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            let per_fold: Vec<f64> = fold_nll.iter().map(|row| row[k]).collect();
            let mean_nll = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
            CandidateScore {
                h,
                mean_nll,
                fold_nll: per_fold,
            }
        })
        .collect();

    let mut best = 0;
    for (k, c) in candidates.iter().enumerate().skip(1) {
        if c.mean_nll < candidates[best].mean_nll {
            best = k;
        }
    }
    Ok(BandwidthSearchReport {
        selected: candidates[best].h,
        candidates,
        d,
    })
}

/// Held-out NLL of one fold for every candidate.
///
/// Distances are computed once per (holdout, train) pair and reused across
/// the grid. Per candidate the arithmetic is the same, in the same order, as
/// `holdout_nll(&fit(train, h), holdout)`, so the results are bit-identical.
fn fold_scores(data: &Dataset, fold: &Fold, grid: &[Bandwidth], z: f64) -> Result<Vec<f64>> {
    let train = data.select(&fold.train);
    let x = data.features();
    let tx = train.features();
    let ty = train.labels();

    let centers: Vec<Vec<f64>> = fold
        .holdout
        .par_iter()
        .map(|&j| {
            let query = x.row(j);
            let mut successes = vec![0.0; grid.len()];
            let mut total = vec![0.0; grid.len()];
            for (row, &label) in tx.outer_iter().zip(ty) {
                let d2 = squared_distance(query, row);
                for (k, h) in grid.iter().enumerate() {
                    let w = h.weight(d2);
                    total[k] += w;
                    if label {
                        successes[k] += w;
                    }
                }
            }
            successes
                .iter()
                .zip(&total)
                .map(|(&s, &t)| Ok(wilson_interval(Counts::new(s, t)?, z)?.center))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let m = fold.holdout.len() as f64;
    Ok((0..grid.len())
        .map(|k| {
            let sum: f64 = fold
                .holdout
                .iter()
                .zip(&centers)
                .map(|(&j, c)| bernoulli_nll(c[k], data.labels()[j]))
                .sum();
            sum / m
        })
        .collect())
}

/// Scores one candidate on one fold the direct way: fit on the fold's
/// training rows and evaluate [`holdout_nll`].
pub fn fold_nll_direct(
    data: &Dataset,
    fold: &Fold,
    h: Bandwidth,
    alpha: f64,
) -> Result<f64> {
    let model = fit(data.select(&fold.train), h, alpha)?;
    holdout_nll(&model, &data.select(&fold.holdout))
}

impl BandwidthSearchReport {
    /// Mean NLL of the selected candidate.
    pub fn selected_score(&self) -> f64 {
        self.candidates
            .iter()
            .find(|c| c.h == self.selected)
            .map(|c| c.mean_nll)
            .unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use rand::Rng;
    use std::collections::BTreeSet;

    fn two_clusters(n_per: usize, separation: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::zeros((2 * n_per, 2));
        let mut y = Vec::with_capacity(2 * n_per);
        for i in 0..2 * n_per {
            let offset = if i < n_per { 0.0 } else { separation };
            x[[i, 0]] = offset + rng.random_range(-0.5..0.5);
            x[[i, 1]] = rng.random_range(-0.5..0.5);
            y.push(i >= n_per);
        }
        Dataset::new(x, y).unwrap()
    }

    fn assert_partition(folds: &[Fold], n: usize) {
        let mut seen = BTreeSet::new();
        for f in folds {
            for &i in &f.holdout {
                assert!(seen.insert(i), "index {i} held out twice");
            }
            assert_eq!(f.train.len() + f.holdout.len(), n);
            let held: BTreeSet<_> = f.holdout.iter().collect();
            assert!(f.train.iter().all(|i| !held.contains(i)));
        }
        assert_eq!(seen, (0..n).collect());
    }

    #[test]
    fn leave_one_out_degenerate_case() {
        let folds = kfold_split(10, 10, 3).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.holdout.len() == 1));
        assert_partition(&folds, 10);
    }

    #[test]
    fn two_folds_of_five() {
        let folds = kfold_split(10, 2, 3).unwrap();
        assert!(folds.iter().all(|f| f.holdout.len() == 5));
        assert_partition(&folds, 10);
    }

    #[test]
    fn uneven_fold_sizes() {
        let folds = kfold_split(23, 10, 0).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.holdout.len()).collect();
        assert!(sizes.iter().all(|&s| s == 2 || s == 3));
        assert_partition(&folds, 23);
    }

    #[test]
    fn split_is_deterministic() {
        assert_eq!(kfold_split(50, 7, 42).unwrap(), kfold_split(50, 7, 42).unwrap());
        assert_ne!(kfold_split(50, 7, 42).unwrap(), kfold_split(50, 7, 43).unwrap());
        assert!(kfold_split(3, 4, 0).is_err());
        assert!(kfold_split(3, 0, 0).is_err());
    }

    #[test]
    fn stratified_folds_balance_classes() {
        let labels: Vec<bool> = (0..40).map(|i| i < 10).collect();
        let folds = stratified_kfold_split(&labels, 5, 1).unwrap();
        assert_partition(&folds, 40);
        for f in &folds {
            let pos = f.holdout.iter().filter(|&&i| labels[i]).count();
            assert_eq!(pos, 2);
            assert_eq!(f.holdout.len(), 8);
        }
    }

    #[test]
    fn nll_no_data_limit() {
        let train = Dataset::new(array![[0.0]], vec![true]).unwrap();
        let model = fit(train, Bandwidth::new(0.01).unwrap(), 0.95).unwrap();
        let far = Dataset::new(array![[100.0], [-100.0]], vec![false, true]).unwrap();
        assert_abs_diff_eq!(
            holdout_nll(&model, &far).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        let empty = Dataset::new(Array2::zeros((0, 1)), vec![]).unwrap();
        assert!(holdout_nll(&model, &empty).is_err());
    }

    #[test]
    fn nll_approaches_zero_for_confident_hits() {
        let train = Dataset::new(Array2::zeros((5000, 1)), vec![true; 5000]).unwrap();
        let model = fit(train, Bandwidth::new(1.0).unwrap(), 0.95).unwrap();
        let hold = Dataset::new(array![[0.0]], vec![true]).unwrap();
        let nll = holdout_nll(&model, &hold).unwrap();
        assert!(nll > 0.0 && nll < 1e-3);
    }

    #[test]
    fn grid_is_log_uniform_with_exact_endpoints() {
        let config = BandwidthSearchConfig::default();
        let grid = candidate_grid(1.0, &config).unwrap();
        assert_eq!(grid.len(), 20);
        assert_abs_diff_eq!(grid[0].value(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(grid[19].value(), 0.1, epsilon = 1e-15);
        let r0 = grid[1].value() / grid[0].value();
        for w in grid.windows(2) {
            assert_abs_diff_eq!(w[1].value() / w[0].value(), r0, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            BandwidthSearchConfig { folds: 1, ..Default::default() },
            BandwidthSearchConfig { steps: 1, ..Default::default() },
            BandwidthSearchConfig { range_lo_factor: 0.2, ..Default::default() },
            BandwidthSearchConfig { alpha: 1.5, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn identical_points_are_rejected() {
        let data = Dataset::new(Array2::from_elem((20, 2), 3.0), vec![true; 20]).unwrap();
        let err = optimize_bandwidth(&data, &BandwidthSearchConfig::default()).unwrap_err();
        assert!(err.to_string().contains("identical"));
    }

    #[test]
    fn too_few_samples_for_folds() {
        let data = two_clusters(3, 4.0, 0);
        assert!(optimize_bandwidth(&data, &BandwidthSearchConfig::default()).is_err());
    }

    #[test]
    fn shared_distance_path_matches_direct_fits() {
        let data = two_clusters(40, 1.5, 9);
        let config = BandwidthSearchConfig { folds: 5, steps: 6, seed: 4, ..Default::default() };
        let report = optimize_bandwidth(&data, &config).unwrap();
        let folds = kfold_split(data.len(), config.folds, config.seed).unwrap();
        for cand in &report.candidates {
            for (f, fold) in folds.iter().enumerate() {
                let direct = fold_nll_direct(&data, fold, cand.h, config.alpha).unwrap();
                assert_eq!(cand.fold_nll[f], direct);
            }
        }
    }

    #[test]
    fn separated_clusters_select_the_exhaustive_minimum() {
        let separation = 6.0;
        let data = two_clusters(50, separation, 2);
        let config = BandwidthSearchConfig::default();
        let report = optimize_bandwidth(&data, &config).unwrap();

        // exhaustive re-evaluation of every grid point through fit + holdout_nll
        let folds = kfold_split(data.len(), config.folds, config.seed).unwrap();
        let grid = candidate_grid(report.d, &config).unwrap();
        let mut best = (f64::INFINITY, grid[0]);
        for &h in &grid {
            let mean = folds
                .iter()
                .map(|f| fold_nll_direct(&data, f, h, config.alpha).unwrap())
                .sum::<f64>()
                / folds.len() as f64;
            if mean < best.0 {
                best = (mean, h);
            }
        }
        assert_eq!(report.selected, best.1);
        assert!(report.selected.value() < separation);
    }

    #[test]
    fn report_invariants_and_determinism() {
        let data = two_clusters(30, 1.0, 5);
        let config = BandwidthSearchConfig { seed: 17, ..Default::default() };
        let a = optimize_bandwidth(&data, &config).unwrap();
        let b = optimize_bandwidth(&data, &config).unwrap();
        assert_eq!(a, b);
        assert!(a.candidates.iter().any(|c| c.h == a.selected));
        for c in &a.candidates {
            assert!(c.fold_nll.iter().all(|v| v.is_finite()));
            let mean = c.fold_nll.iter().sum::<f64>() / c.fold_nll.len() as f64;
            assert_abs_diff_eq!(c.mean_nll, mean, epsilon = 1e-12);
            assert!(a.selected_score() <= c.mean_nll);
        }
    }

    #[test]
    fn ties_prefer_smaller_bandwidth() {
        // every holdout point is far from every training point at all
        // candidate scales, so all candidates score ln 2
        let x = Array2::from_shape_fn((10, 1), |(i, _)| 1e6 * i as f64);
        let y = (0..10).map(|i| i % 2 == 0).collect();
        let data = Dataset::new(x, y).unwrap();
        let config = BandwidthSearchConfig {
            folds: 2,
            steps: 4,
            range_lo_factor: 1e-9,
            range_hi_factor: 1e-8,
            ..Default::default()
        };
        let report = optimize_bandwidth(&data, &config).unwrap();
        assert!(report.candidates.iter().all(|c| c.mean_nll == report.candidates[0].mean_nll));
        assert_eq!(report.selected, report.candidates[0].h);
    }
}

