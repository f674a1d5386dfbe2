//! Seeded repeated experiments: split, select the bandwidth on the training
//! part, fit, predict the test part and score the reject curves.
//!
//! Run `i` of a repeated experiment uses seed `base_seed + i` for both its
//! train/test split and its cross-validation folds, so every report is a pure
//! function of the data and the configuration, timing columns aside.
//!
//! Timings are monotonic wall-clock seconds of the work done inside one run.
//! When runs execute in parallel they compete for cores, which inflates them.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bandwidth::{optimize_bandwidth, BandwidthSearchConfig};
use crate::classifier::{predicted_positive, ranking_score};
use crate::error::{Error, Result};
use crate::estimator::{fit, Dataset};
use crate::interval::z_quantile;
use crate::metrics::{reject_curves, summarize_runs, RejectCurves, RunSummary};
use crate::stats::MeanStd;

pub const METHOD_NAME: &str = "WS-KDC";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train_fraction: f64,
    pub repeats: usize,
    pub base_seed: u64,
    pub alpha: f64,
    pub tau: f64,
    /// `seed` is overwritten per run; `alpha` follows [`ExperimentConfig::alpha`].
    pub bandwidth: BandwidthSearchConfig,
    /// Execute repeats concurrently.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train_fraction: 0.8,
            repeats: 50,
            base_seed: 0,
            alpha: 0.95,
            tau: 0.95,
            bandwidth: BandwidthSearchConfig::default(),
            parallel: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::domain(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::domain("repeats must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::domain(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        z_quantile(self.alpha)?;
        self.bandwidth.validate()
    }

    fn search_config(&self, seed: u64) -> BandwidthSearchConfig {
        BandwidthSearchConfig {
            seed,
            alpha: self.alpha,
            ..self.bandwidth.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub bandwidth: f64,
    /// Mean pairwise distance of the training split.
    pub d: f64,
    pub auprc: f64,
    pub aurrc: f64,
    pub tau_coverage: Option<f64>,
    pub t_optim: f64,
    pub t_infer: f64,
    pub curves: RejectCurves,
}

impl RunRecord {
    /// Equality on everything but the timing fields.
    pub fn same_result(&self, other: &RunRecord) -> bool {
        RunRecord {
            t_optim: 0.0,
            t_infer: 0.0,
            ..self.clone()
        } == RunRecord {
            t_optim: 0.0,
            t_infer: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub auprc: MeanStd,
    pub aurrc: MeanStd,
    pub t_optim: MeanStd,
    pub t_infer: MeanStd,
    pub curves: RunSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub method: String,
    pub records: Vec<RunRecord>,
    pub summary: ExperimentSummary,
}

/// Seeded shuffle; the first `⌊N·train_fraction⌋` rows train, the rest test.
pub fn split_train_test(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::domain(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let n = data.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::domain(format!(
            "splitting {n} rows at fraction {train_fraction} leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = order.split_at(n_train);
    Ok((data.select(train), data.select(test)))
}

/// One seeded run. Errors carry the seed.
pub fn run_experiment(data: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    run_inner(data, config, seed).map_err(|e| match e {
        Error::Run { .. } => e,
        other => Error::Run {
            seed,
            source: Box::new(other),
        },
    })
}

fn run_inner(data: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let (train, test) = split_train_test(data, config.train_fraction, seed)?;

    let started = Instant::now();
    let search = optimize_bandwidth(&train, &config.search_config(seed))?;
    let t_optim = started.elapsed().as_secs_f64();

    let model = fit(train, search.selected, config.alpha)?;
    let started = Instant::now();
    let bounds = model.predict_batch(test.features())?;
    let t_infer = started.elapsed().as_secs_f64();

    let scores: Vec<f64> = bounds.iter().map(ranking_score).collect();
    let predicted: Vec<bool> = bounds.iter().map(predicted_positive).collect();
    let curves = reject_curves(&scores, &predicted, test.labels(), Some(config.tau))?;

    Ok(RunRecord {
        seed,
        bandwidth: search.selected.value(),
        d: search.d,
        auprc: curves.auprc,
        aurrc: curves.aurrc,
        tau_coverage: curves.tau_coverage,
        t_optim,
        t_infer,
        curves,
    })
}

/// Aggregates run records into the per-column mean/std and curve bands.
pub fn summarize(records: &[RunRecord]) -> Result<ExperimentSummary> {
    if records.is_empty() {
        return Err(Error::domain("no run records to summarize"));
    }
    let column = |f: fn(&RunRecord) -> f64| MeanStd::of(&records.iter().map(f).collect::<Vec<_>>());
    let curves: Vec<RejectCurves> = records.iter().map(|r| r.curves.clone()).collect();
    Ok(ExperimentSummary {
        auprc: column(|r| r.auprc),
        aurrc: column(|r| r.aurrc),
        t_optim: column(|r| r.t_optim),
        t_infer: column(|r| r.t_infer),
        curves: summarize_runs(&curves)?,
    })
}

/// Runs seeds `base_seed .. base_seed + repeats` and aggregates them. The
/// first failing run, in seed order, aborts the experiment.
pub fn run_repeated(data: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.repeats as u64)
        .map(|i| config.base_seed.wrapping_add(i))
        .collect();
    let records: Vec<RunRecord> = if config.parallel {
        seeds
            .par_iter()
            .map(|&s| run_experiment(data, config, s))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_>>()?
    } else {
        seeds
            .iter()
            .map(|&s| run_experiment(data, config, s))
            .collect::<Result<_>>()?
    };
    Ok(ExperimentReport {
        method: METHOD_NAME.to_string(),
        summary: summarize(&records)?,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn clusters(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let positive = i % 2 == 0;
            let cx = if positive { 5.0 } else { -5.0 };
            x[[i, 0]] = cx + rng.random_range(-1.0..1.0);
            x[[i, 1]] = rng.random_range(-1.0..1.0);
            y.push(positive);
        }
        Dataset::new(x, y).unwrap()
    }

    fn small_config(repeats: usize) -> ExperimentConfig {
        ExperimentConfig {
            repeats,
            base_seed: 100,
            ..Default::default()
        }
    }

    #[test]
    fn split_partition() {
        let data = clusters(10, 0);
        let (train, test) = split_train_test(&data, 0.8, 1).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let mut rows: Vec<Vec<u64>> = train
            .features()
            .outer_iter()
            .chain(test.features().outer_iter())
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut original: Vec<Vec<u64>> = data
            .features()
            .outer_iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        original.sort();
        assert_eq!(rows, original);
    }

    #[test]
    fn split_determinism_and_seed_sensitivity() {
        let data = clusters(10, 0);
        assert_eq!(
            split_train_test(&data, 0.8, 5).unwrap(),
            split_train_test(&data, 0.8, 5).unwrap()
        );
        for s in 0..10u64 {
            let a = split_train_test(&data, 0.5, 2 * s).unwrap();
            let b = split_train_test(&data, 0.5, 2 * s + 1).unwrap();
            assert_ne!(a, b);
        }
    }

    #[test]
    fn split_rejects_empty_sides() {
        let data = clusters(3, 0);
        assert!(split_train_test(&data, 0.2, 0).is_err());
        assert!(split_train_test(&data, 1.0, 0).is_err());
        assert!(split_train_test(&data, 0.0, 0).is_err());
    }

    #[test]
    fn separable_clusters_score_perfectly() {
        let data = clusters(120, 3);
        let r = run_experiment(&data, &small_config(1), 7).unwrap();
        assert_eq!((r.auprc, r.aurrc), (1.0, 1.0));
        assert!(r.t_optim >= 0.0 && r.t_infer >= 0.0);
    }

    #[test]
    fn all_positive_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((60, 2), |_| rng.random::<f64>());
        let data = Dataset::new(x, vec![true; 60]).unwrap();
        let r = run_experiment(&data, &small_config(1), 0).unwrap();
        assert_eq!(r.auprc, 1.0);
        assert!(r.curves.recall.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn reruns_match_except_timing() {
        let data = clusters(80, 4);
        let config = small_config(1);
        let a = run_experiment(&data, &config, 11).unwrap();
        let b = run_experiment(&data, &config, 11).unwrap();
        assert!(a.same_result(&b));
    }

    #[test]
    fn errors_carry_the_seed() {
        let data = Dataset::new(Array2::from_elem((30, 2), 1.0), vec![true; 30]).unwrap();
        match run_experiment(&data, &small_config(1), 42) {
            Err(Error::Run { seed: 42, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeated_runs_use_consecutive_seeds() {
        let data = clusters(60, 5);
        let report = run_repeated(&data, &small_config(3)).unwrap();
        let seeds: Vec<u64> = report.records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![100, 101, 102]);
        assert_eq!(report.method, METHOD_NAME);
        let again = summarize(&report.records).unwrap();
        assert_eq!(again, report.summary);
    }

    #[test]
    fn single_repeat_has_zero_spread() {
        let data = clusters(60, 6);
        let report = run_repeated(&data, &small_config(1)).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.summary.auprc.mean, report.records[0].auprc);
        assert_eq!(report.summary.auprc.std, 0.0);
        assert_eq!(report.summary.t_optim.std, 0.0);
    }

    #[test]
    fn parallel_repeats_match_sequential() {
        let data = clusters(60, 8);
        let seq = run_repeated(&data, &small_config(4)).unwrap();
        let par = run_repeated(&data, &ExperimentConfig { parallel: true, ..small_config(4) })
            .unwrap();
        for (a, b) in seq.records.iter().zip(&par.records) {
            assert!(a.same_result(b));
        }
        assert_eq!(seq.summary.auprc, par.summary.auprc);
        assert_eq!(seq.summary.curves.precision, par.summary.curves.precision);
    }

    #[test]
    fn test_labels_do_not_affect_bandwidth() {
        let data = clusters(100, 9);
        let config = small_config(1);
        let seed = 3;
        let base = run_experiment(&data, &config, seed).unwrap();

        // flip the labels of exactly the rows that land in the test split
        let (train, _) = split_train_test(&data, config.train_fraction, seed).unwrap();
        let train_rows: std::collections::HashSet<Vec<u64>> = train
            .features()
            .outer_iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        let labels: Vec<bool> = data
            .features()
            .outer_iter()
            .zip(data.labels())
            .map(|(row, &y)| {
                let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
                if train_rows.contains(&key) {
                    y
                } else {
                    !y
                }
            })
            .collect();
        let flipped = Dataset::new(data.features().to_owned(), labels).unwrap();
        let perturbed = run_experiment(&flipped, &config, seed).unwrap();
        assert_eq!(base.bandwidth, perturbed.bandwidth);
        assert_ne!(base.auprc, perturbed.auprc);
    }
}
