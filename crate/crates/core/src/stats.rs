//! Distribution summaries for prediction and coefficient samples.
//!
//! Quantiles interpolate linearly between order statistics at
//! `h = (n - 1) p`. Fences follow the box-plot convention
//! `q1 - 1.5 iqr` / `q3 + 1.5 iqr`. For Gaussian data these sit at about
//! ±2.698σ, which contains roughly 99.3% of the mass.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, Grid};
use crate::error::{Error, Result};
use crate::models::ols_fit;
use crate::montecarlo::PredictionMatrix;

pub const FENCE_FACTOR: f64 = 1.5;

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile of already sorted values. `p` must be in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    check_values(values)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(quantile_sorted(&sorted(values), p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileBand {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub low: f64,
    pub high: f64,
}

impl QuartileBand {
    fn from_sorted(sorted: &[f64]) -> Self {
        let q1 = quantile_sorted(sorted, 0.25);
        let median = quantile_sorted(sorted, 0.5);
        let q3 = quantile_sorted(sorted, 0.75);
        Self::from_quartiles(q1, median, q3)
    }

    pub fn from_quartiles(q1: f64, median: f64, q3: f64) -> Self {
        let iqr = q3 - q1;
        Self {
            q1,
            median,
            q3,
            iqr,
            low: q1 - FENCE_FACTOR * iqr,
            high: q3 + FENCE_FACTOR * iqr,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.low && v <= self.high
    }
}

pub fn quartile_band(values: &[f64]) -> Result<QuartileBand> {
    check_values(values)?;
    Ok(QuartileBand::from_sorted(&sorted(values)))
}

/// Sample mean and standard deviation (`n - 1` denominator, 0 for one value).
pub fn mean_sd(values: &[f64]) -> Result<(f64, f64)> {
    check_values(values)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Column-wise summary of a prediction matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCurve {
    pub grid: Grid,
    pub bands: Vec<QuartileBand>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl BandCurve {
    pub fn medians(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.median).collect()
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

pub fn band_curve(matrix: &PredictionMatrix) -> Result<BandCurve> {
    if matrix.n_rows() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: matrix.n_rows(),
        });
    }
    let mut bands = Vec::with_capacity(matrix.n_cols());
    let mut means = Vec::with_capacity(matrix.n_cols());
    let mut sds = Vec::with_capacity(matrix.n_cols());
    for j in 0..matrix.n_cols() {
        let col = matrix.column(j);
        check_values(&col)?;
        let (m, s) = mean_sd(&col)?;
        bands.push(QuartileBand::from_sorted(&sorted(&col)));
        means.push(m);
        sds.push(s);
    }
    Ok(BandCurve {
        grid: matrix.grid().clone(),
        bands,
        means,
        sds,
    })
}

/// Slope of the median curve regressed on the grid.
pub fn band_slope(curve: &BandCurve) -> Result<f64> {
    let data = Dataset::new(curve.grid.points().to_vec(), curve.medians())?;
    Ok(ols_fit(&data)?.b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub n: usize,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.bin_edges[self.bin_edges.len() - 1] - self.bin_edges[0]) / self.n_bins() as f64
    }

    /// Bin holding `v`: right-open bins, the last one closed.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let k = self.n_bins();
        let (lo, hi) = (self.bin_edges[0], self.bin_edges[k]);
        if !(v >= lo && v <= hi) {
            return None;
        }
        let mut i = (((v - lo) / self.bin_width()) as usize).min(k - 1);
        while i > 0 && v < self.bin_edges[i] {
            i -= 1;
        }
        while i + 1 < k && v >= self.bin_edges[i + 1] {
            i += 1;
        }
        Some(i)
    }
}

/// Equal-width histogram over `[min, max]`, `ceil(sqrt(n))` bins by default.
/// A constant sample gets one bin `[c - 0.5, c + 0.5]`.
pub fn histogram(values: &[f64], bins: Option<usize>) -> Result<Histogram> {
    check_values(values)?;
    let n = values.len();
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min == max {
        return Ok(Histogram {
            bin_edges: vec![min - 0.5, max + 0.5],
            counts: vec![n],
            n,
        });
    }
    let k = match bins {
        Some(0) => return Err(Error::config("bin count must be at least 1")),
        Some(k) => k,
        None => (n as f64).sqrt().ceil() as usize,
    };
    let width = (max - min) / k as f64;
    let mut bin_edges: Vec<f64> = (0..=k).map(|i| min + width * i as f64).collect();
    bin_edges[k] = max;
    let mut hist = Histogram {
        bin_edges,
        counts: vec![0; k],
        n,
    };
    for &v in values {
        let i = hist.bin_of(v).expect("value within [min, max]");
        hist.counts[i] += 1;
    }
    Ok(hist)
}

/// Moment-matched normal density scaled to histogram counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOverlay {
    pub mean: f64,
    pub sd: f64,
    /// `n * bin_width`.
    pub scale: f64,
}

impl GaussianOverlay {
    pub fn new(mean: f64, sd: f64, hist: &Histogram) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::config(format!(
                "overlay sd must be positive, got {sd}"
            )));
        }
        Ok(Self {
            mean,
            sd,
            scale: hist.n as f64 * hist.bin_width(),
        })
    }

    pub fn expected_count(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        self.scale * (-0.5 * z * z).exp() / (self.sd * (2.0 * PI).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Overlay sampled at `points_per_bin` steps per bin across the histogram span,
/// edges included.
pub fn gaussian_overlay(
    mean: f64,
    sd: f64,
    hist: &Histogram,
    points_per_bin: usize,
) -> Result<Curve> {
    let overlay = GaussianOverlay::new(mean, sd, hist)?;
    let steps = hist.n_bins() * points_per_bin.max(1);
    let lo = hist.bin_edges[0];
    let span = hist.bin_edges[hist.n_bins()] - lo;
    let x: Vec<f64> = (0..=steps)
        .map(|i| lo + span * i as f64 / steps as f64)
        .collect();
    let y = x.iter().map(|&v| overlay.expected_count(v)).collect();
    Ok(Curve { x, y })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Points strictly outside the fences, ascending.
    pub outliers: Vec<f64>,
}

pub fn boxplot_summary(values: &[f64]) -> Result<BoxplotSummary> {
    check_values(values)?;
    let v = sorted(values);
    let band = QuartileBand::from_sorted(&v);
    let inside = || v.iter().copied().filter(|&x| band.contains(x));
    Ok(BoxplotSummary {
        q1: band.q1,
        median: band.median,
        q3: band.q3,
        whisker_low: inside().next().unwrap_or(band.median),
        whisker_high: inside().next_back().unwrap_or(band.median),
        outliers: v.iter().copied().filter(|&x| !band.contains(x)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxJson {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// `[low, high]`.
    pub whiskers: [f64; 2],
    pub outliers: Vec<f64>,
}

/// Histogram, box plot and Gaussian overlay of one sample, as written by
/// `mcband report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Absent when the sample has zero spread.
    pub overlay: Option<Curve>,
    #[serde(rename = "box")]
    pub boxplot: BoxJson,
}

impl DistributionReport {
    pub fn new(values: &[f64], bins: Option<usize>, points_per_bin: usize) -> Result<Self> {
        let (mean, sd) = mean_sd(values)?;
        let hist = histogram(values, bins)?;
        let overlay = if sd > 0.0 {
            Some(gaussian_overlay(mean, sd, &hist, points_per_bin)?)
        } else {
            None
        };
        let b = boxplot_summary(values)?;
        Ok(Self {
            n: hist.n,
            mean,
            sd,
            bin_edges: hist.bin_edges,
            counts: hist.counts,
            overlay,
            boxplot: BoxJson {
                q1: b.q1,
                median: b.median,
                q3: b.q3,
                whiskers: [b.whisker_low, b.whisker_high],
                outliers: b.outliers,
            },
        })
    }
}
