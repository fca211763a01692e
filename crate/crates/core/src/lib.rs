//! Non-parametric uncertainty bands for regression predictions.
//!
//! A study draws many synthetic training sets from a noisy line, fits a
//! linear or random-forest regressor to each, and evaluates every fit on a
//! common grid. The resulting prediction matrix is summarised column by
//! column with quartiles and `1.5 IQR` fences, next to the classical
//! analytical bands of ordinary least squares.
//!
//! ```
//! use mcband::{band_curve, make_grid, run_study, StudyConfig};
//!
//! let config = StudyConfig {
//!     replications: 50,
//!     grid: make_grid(150.0, 200.0, 11).unwrap(),
//!     ..StudyConfig::default()
//! };
//! let out = run_study(&config).unwrap();
//! let curve = band_curve(&out.matrix).unwrap();
//! assert_eq!(curve.len(), 11);
//! ```

pub mod cli;
pub mod datagen;
pub mod error;
pub mod io;
pub mod models;
pub mod montecarlo;
pub mod rng;
pub mod stats;

pub use datagen::{generate_dataset, make_grid, split_train_test, Dataset, GenConfig, Grid};
pub use error::{Error, Result};
pub use models::{
    forest_fit, forest_predict, mse, ols_fit, ols_predict, ols_prediction_band, tree_fit,
    tree_predict, BandKind, Forest, ForestConfig, LinearFit, Tree, TreeConfig,
};
pub use montecarlo::{
    run_study, run_study_with_threads, single_sample_curve, CoefficientSamples, ModelSpec,
    PredictionMatrix, StudyConfig, StudyOutput,
};
pub use rng::derive_seed;
pub use stats::{
    band_curve, band_slope, boxplot_summary, gaussian_overlay, histogram, mean_sd, quantile,
    quartile_band, BandCurve, BoxplotSummary, Histogram, QuartileBand,
};
