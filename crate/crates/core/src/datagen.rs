//! Synthetic training sets, prediction grids and train/test splits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Parameters of the data-generating line `y = intercept + slope * x + e`,
/// `x ~ U[x_low, x_high)`, `e ~ N(0, noise_sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub intercept: f64,
    pub slope: f64,
    pub x_low: f64,
    pub x_high: f64,
    pub noise_sigma: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            intercept: -100.0,
            slope: 1.0,
            x_low: 150.0,
            x_high: 200.0,
            noise_sigma: 10.0,
            n_samples: 100,
            seed: DEFAULT_SEED,
        }
    }
}

pub const DEFAULT_SEED: u64 = 42;

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.intercept.is_finite() && self.slope.is_finite()) {
            return Err(Error::config("intercept and slope must be finite"));
        }
        if !(self.x_low.is_finite() && self.x_high.is_finite() && self.x_low < self.x_high) {
            return Err(Error::config(format!(
                "x range [{}, {}) is empty or not finite",
                self.x_low, self.x_high
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::config(format!(
                "noise sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.n_samples,
            });
        }
        Ok(())
    }

    /// Noise-free response at `x`.
    pub fn true_response(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Paired observations `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Rows picked by `indices`, in that order. Repeats are allowed.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            xs: indices.iter().map(|&i| self.xs[i]).collect(),
            ys: indices.iter().map(|&i| self.ys[i]).collect(),
        }
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.xs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    pub fn y_range(&self) -> (f64, f64) {
        self.ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                (lo.min(y), hi.max(y))
            })
    }
}

/// Draws a dataset. All `n` x values are drawn first, then all `n` noise
/// values, from a single stream seeded with `config.seed`.
pub fn generate_dataset(config: &GenConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = Stream::new(config.seed);
    let xs: Vec<f64> = (0..config.n_samples)
        .map(|_| rng.uniform_in(config.x_low, config.x_high))
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let e = rng.normal(0.0, config.noise_sigma);
            config.true_response(x) + e
        })
        .collect();
    Ok(Dataset { xs, ys })
}

/// Equally spaced prediction points, both endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn low(&self) -> f64 {
        self.points[0]
    }

    pub fn high(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index of the grid point equal to `x` within `tol`, if any.
    pub fn position(&self, x: f64, tol: f64) -> Option<usize> {
        self.points.iter().position(|&p| (p - x).abs() <= tol)
    }
}

impl AsRef<[f64]> for Grid {
    fn as_ref(&self) -> &[f64] {
        &self.points
    }
}

pub fn make_grid(low: f64, high: f64, count: usize) -> Result<Grid> {
    if count < 2 {
        return Err(Error::config(format!(
            "grid needs at least 2 points, got {count}"
        )));
    }
    if !(low.is_finite() && high.is_finite() && low < high) {
        return Err(Error::config(format!(
            "grid range [{low}, {high}] is empty"
        )));
    }
    let step = (high - low) / (count - 1) as f64;
    let mut points: Vec<f64> = (0..count).map(|i| low + step * i as f64).collect();
    points[count - 1] = high;
    Ok(Grid { points })
}

/// Shuffles row indices with `seed`, takes the first `round(n * test_fraction)`
/// as the test part and the rest as training. Both parts keep the original row
/// order.
pub fn split_train_test(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::config(format!(
            "test fraction {test_fraction} of {n} rows leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Stream::new(seed).shuffle(&mut order);
    let (test_idx, train_idx) = order.split_at_mut(n_test);
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((data.select(train_idx), data.select(test_idx)))
}
