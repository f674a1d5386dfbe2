//! Wilson score kernel density classification.
//!
//! A lazy binary classifier that returns, for every query, a Wilson score
//! confidence bound on the probability of the positive class. Labels near
//! the query are aggregated into Gaussian-kernel pseudo-counts, and the bound
//! drives a reject option: a sample is classified only when the whole bound
//! clears the required success rate `tau`.
//!
//! ```
//! use ndarray::array;
//! use wskdc::{classify, fit, Bandwidth, Dataset, Label};
//!
//! let data = Dataset::new(
//!     array![[0.0], [0.1], [0.2], [5.0], [5.1], [5.2]],
//!     vec![false, false, false, true, true, true],
//! )?;
//! let model = fit(data, Bandwidth::new(0.2)?, 0.95)?;
//! let bound = model.predict_bounds(array![5.1].view())?;
//! assert_eq!(classify(&bound, 0.3).label, Label::Positive);
//! # Ok::<(), wskdc::Error>(())
//! ```
//!
//! ## Examples
//!
//! ```text
//! examples/
//! ├── wilson_interval.rs       # bounds from success/total counts
//! ├── fit_predict.rs           # fixed bandwidth, selective decisions
//! ├── bandwidth_search.rs      # cross-validated bandwidth grid
//! ├── binned_vs_kernel.rs      # histogram bounds next to the kernel estimate
//! ├── reject_curves.rs         # precision/recall against coverage
//! ├── repeated_experiment.rs   # seeded train/test runs, mean [std]
//! └── timing_bench.rs          # optimization and inference time by size
//! ```
//!
//! ```bash
//! cargo run --release --example repeated_experiment
//! ```
//!
//! The `wskdc` binary wraps the same pipeline for CSV files; see [`cli`].

pub mod bandwidth;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod interval;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod plot;
pub mod stats;

pub use bandwidth::{optimize_bandwidth, BandwidthSearchConfig, BandwidthSearchReport};
pub use classifier::{classify, Label, SelectiveDecision};
pub use error::{Error, Result};
pub use estimator::{fit, Dataset, WskdeModel};
pub use harness::{run_repeated, ExperimentConfig, ExperimentReport};
pub use interval::{wilson_interval, z_quantile, ConfidenceBound, Counts};
pub use kernel::Bandwidth;
pub use metrics::{reject_curves, RejectCurves};
