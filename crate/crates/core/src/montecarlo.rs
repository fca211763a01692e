//! Repeated generate → fit → predict experiments on a fixed grid.
//!
//! Replication `r` of a study with master seed `m` and `R` replications uses
//!
//! * data seed `derive_seed(m, r)`
//! * forest seed `derive_seed(m, R + r)`
//! * train/test split seed `derive_seed(m, 2R + r)`
//!
//! so each row of the output depends on `(m, r)` only and the result is the
//! same for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate_dataset, make_grid, split_train_test, GenConfig, Grid};
use crate::error::{Error, Result};
use crate::models::{forest_fit, forest_predict, mse, ols_fit, ols_predict, ForestConfig};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Linear,
    /// The forest's own seed is replaced per replication.
    Forest(ForestConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// `gen.seed` is the master seed of the study.
    pub gen: GenConfig,
    pub model: ModelSpec,
    pub grid: Grid,
    pub replications: usize,
    pub test_fraction: Option<f64>,
}

pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const DEFAULT_GRID_POINTS: usize = 101;

impl Default for StudyConfig {
    fn default() -> Self {
        let gen = GenConfig::default();
        Self {
            grid: make_grid(gen.x_low, gen.x_high, DEFAULT_GRID_POINTS)
                .expect("default grid is valid"),
            gen,
            model: ModelSpec::Linear,
            replications: DEFAULT_REPLICATIONS,
            test_fraction: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        if self.replications < 2 {
            return Err(Error::config(format!(
                "a study needs at least 2 replications, got {}",
                self.replications
            )));
        }
        if self.grid.low() < self.gen.x_low || self.grid.high() > self.gen.x_high {
            return Err(Error::config(format!(
                "grid [{}, {}] extends beyond the data range [{}, {}]",
                self.grid.low(),
                self.grid.high(),
                self.gen.x_low,
                self.gen.x_high
            )));
        }
        if let ModelSpec::Forest(f) = &self.model {
            f.validate()?;
        }
        if let Some(f) = self.test_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::config(format!(
                    "test fraction must lie in (0, 1), got {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn master_seed(&self) -> u64 {
        self.gen.seed
    }

    fn data_seed(&self, r: usize) -> u64 {
        derive_seed(self.master_seed(), r as u64)
    }

    fn model_seed(&self, r: usize) -> u64 {
        derive_seed(self.master_seed(), (self.replications + r) as u64)
    }

    fn split_seed(&self, r: usize) -> u64 {
        derive_seed(self.master_seed(), (2 * self.replications + r) as u64)
    }
}

/// `R x G` predictions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    grid: Grid,
    values: Vec<f64>,
    n_rows: usize,
}

impl PredictionMatrix {
    pub fn from_rows(grid: Grid, rows: Vec<Vec<f64>>) -> Result<Self> {
        let g = grid.len();
        let n_rows = rows.len();
        let mut values = Vec::with_capacity(n_rows * g);
        for row in rows {
            if row.len() != g {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: g,
                });
            }
            values.extend(row);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid,
            values,
            n_rows,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.grid.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let g = self.n_cols();
        &self.values[r * g..(r + 1) * g]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|row| row[j]).collect()
    }

    /// Row-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientSamples {
    /// Empty for the forest model.
    pub slopes: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub test_mse: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub matrix: PredictionMatrix,
    pub coefficients: CoefficientSamples,
}

struct Replicate {
    row: Vec<f64>,
    coef: Option<(f64, f64)>,
    test_mse: Option<f64>,
}

fn replicate(config: &StudyConfig, r: usize) -> Result<Replicate> {
    let data = generate_dataset(&config.gen.with_seed(config.data_seed(r)))?;
    let (train, test) = match config.test_fraction {
        Some(f) => {
            let (tr, te) = split_train_test(&data, f, config.split_seed(r))?;
            (tr, Some(te))
        }
        None => (data, None),
    };
    let grid = config.grid.points();
    match &config.model {
        ModelSpec::Linear => {
            let fit = ols_fit(&train)?;
            let test_mse = test
                .map(|t| mse(t.ys(), &ols_predict(&fit, t.xs())))
                .transpose()?;
            Ok(Replicate {
                row: ols_predict(&fit, grid),
                coef: Some((fit.b, fit.a)),
                test_mse,
            })
        }
        ModelSpec::Forest(fc) => {
            let fc = ForestConfig {
                seed: config.model_seed(r),
                ..*fc
            };
            let forest = forest_fit(&train, &fc)?;
            let test_mse = test
                .map(|t| mse(t.ys(), &forest_predict(&forest, t.xs())))
                .transpose()?;
            Ok(Replicate {
                row: forest_predict(&forest, grid),
                coef: None,
                test_mse,
            })
        }
    }
}

fn tag(r: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Replication {
        index: r,
        source: Box::new(e),
    }
}

/// Runs every replication on the current rayon pool.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutput> {
    config.validate()?;
    let reps = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(config, r).map_err(tag(r)))
        .collect::<Vec<_>>()
        .into_iter()
        // lowest failing index, whatever the schedule
        .collect::<Result<Vec<_>>>()?;
    assemble(config, reps)
}

/// As [`run_study`], on a dedicated pool of `threads` workers (`None` uses
/// rayon's default sizing).
pub fn run_study_with_threads(config: &StudyConfig, threads: Option<usize>) -> Result<StudyOutput> {
    let Some(threads) = threads else {
        return run_study(config);
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_study(config))
}

fn assemble(config: &StudyConfig, reps: Vec<Replicate>) -> Result<StudyOutput> {
    let mut coefficients = CoefficientSamples::default();
    let mut test_mse = Vec::new();
    let mut rows = Vec::with_capacity(reps.len());
    for rep in reps {
        if let Some((slope, intercept)) = rep.coef {
            coefficients.slopes.push(slope);
            coefficients.intercepts.push(intercept);
        }
        if let Some(m) = rep.test_mse {
            test_mse.push(m);
        }
        rows.push(rep.row);
    }
    if config.test_fraction.is_some() {
        coefficients.test_mse = Some(test_mse);
    }
    Ok(StudyOutput {
        matrix: PredictionMatrix::from_rows(config.grid.clone(), rows)?,
        coefficients,
    })
}

/// Row `replication` of the study, computed on its own.
pub fn single_sample_curve(config: &StudyConfig, replication: usize) -> Result<Vec<f64>> {
    config.validate()?;
    if replication >= config.replications {
        return Err(Error::OutOfRange {
            index: replication,
            len: config.replications,
        });
    }
    replicate(config, replication)
        .map(|rep| rep.row)
        .map_err(tag(replication))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ModelSpec) -> StudyConfig {
        StudyConfig {
            gen: GenConfig::default(),
            model,
            grid: make_grid(150.0, 200.0, 5).unwrap(),
            replications: 3,
            test_fraction: None,
        }
    }

    fn small_forest() -> ModelSpec {
        ModelSpec::Forest(ForestConfig {
            n_trees: 5,
            ..Default::default()
        })
    }

    #[test]
    fn shape() {
        let out = run_study(&small(ModelSpec::Linear)).unwrap();
        assert_eq!((out.matrix.n_rows(), out.matrix.n_cols()), (3, 5));
        assert_eq!(out.coefficients.slopes.len(), 3);
        assert!(out.coefficients.test_mse.is_none());

        let out = run_study(&small(small_forest())).unwrap();
        assert_eq!((out.matrix.n_rows(), out.matrix.n_cols()), (3, 5));
        assert!(out.coefficients.slopes.is_empty());
    }

    #[test]
    fn zero_noise_rows_are_the_true_line() {
        let mut cfg = small(ModelSpec::Linear);
        cfg.gen.noise_sigma = 0.0;
        let out = run_study(&cfg).unwrap();
        for row in out.matrix.rows() {
            for (p, x) in row.iter().zip(cfg.grid.points()) {
                assert!((p - (x - 100.0)).abs() < 1e-9, "{p} vs {x}");
            }
        }
        for &b in &out.coefficients.slopes {
            assert!((b - 1.0).abs() < 1e-12);
        }
        let curve = single_sample_curve(&cfg, 1).unwrap();
        assert!((curve[0] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn single_sample_curve_matches_row() {
        for cfg in [small(ModelSpec::Linear), small(small_forest())] {
            let out = run_study(&cfg).unwrap();
            for r in 0..cfg.replications {
                assert_eq!(single_sample_curve(&cfg, r).unwrap(), out.matrix.row(r));
            }
            assert!(matches!(
                single_sample_curve(&cfg, 3),
                Err(Error::OutOfRange { .. })
            ));
        }
    }

    #[test]
    fn rows_depend_only_on_their_index() {
        // Linear rows use data seeds only; forest seeds shift with R.
        let mut cfg = small(ModelSpec::Linear);
        let a = run_study(&cfg).unwrap();
        cfg.replications = 6;
        let b = run_study(&cfg).unwrap();
        for r in 0..3 {
            assert_eq!(a.matrix.row(r), b.matrix.row(r));
        }
    }

    #[test]
    fn test_fraction_records_holdout_error() {
        let mut cfg = small(ModelSpec::Linear);
        cfg.test_fraction = Some(0.3);
        let out = run_study(&cfg).unwrap();
        let m = out.coefficients.test_mse.unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn fit_failure_names_replication() {
        let mut cfg = small(ModelSpec::Forest(ForestConfig {
            n_trees: 2,
            tree: crate::models::TreeConfig {
                min_samples_leaf: 200,
                ..Default::default()
            },
            ..Default::default()
        }));
        cfg.replications = 4;
        match run_study(&cfg) {
            Err(Error::Replication { index, .. }) => assert!(index < 4),
            other => panic!("expected replication error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small(ModelSpec::Linear);
        cfg.replications = 1;
        assert!(run_study(&cfg).is_err());
        let mut cfg = small(ModelSpec::Linear);
        cfg.grid = make_grid(100.0, 200.0, 3).unwrap();
        assert!(run_study(&cfg).is_err());
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let cfg = StudyConfig {
            replications: 20,
            ..small(small_forest())
        };
        let one = run_study_with_threads(&cfg, Some(1)).unwrap();
        let four = run_study_with_threads(&cfg, Some(4)).unwrap();
        assert_eq!(one, four);
    }
}
