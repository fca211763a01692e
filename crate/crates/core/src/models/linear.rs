//! Closed-form simple linear regression with coefficient standard errors.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::datagen::Dataset;
use crate::error::{Error, Result};

/// Ordinary least squares estimate of `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// Intercept.
    pub a: f64,
    /// Slope.
    pub b: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    /// Residual standard error, `sqrt(SSE / (n - 2))`; zero when `n == 2`.
    pub s: f64,
    pub n: usize,
    pub x_mean: f64,
    /// `sum (x - x_mean)^2`.
    pub sxx: f64,
}

/// Which analytical band [`ols_prediction_band`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    /// Confidence band for the mean response `a + b x0`.
    #[default]
    Mean,
    /// Prediction band for a new observation at `x0`.
    Observation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub x: f64,
    pub prediction: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn ols_fit(data: &Dataset) -> Result<LinearFit> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let nf = n as f64;
    let x_mean = data.xs().iter().sum::<f64>() / nf;
    let y_mean = data.ys().iter().sum::<f64>() / nf;
    let (sxx, sxy) = data.iter().fold((0.0, 0.0), |(sxx, sxy), (x, y)| {
        let dx = x - x_mean;
        (sxx + dx * dx, sxy + dx * (y - y_mean))
    });
    if sxx <= 0.0 {
        return Err(Error::SingularDesign);
    }
    let b = sxy / sxx;
    let a = y_mean - b * x_mean;

    let s = if n > 2 {
        let sse: f64 = data
            .iter()
            .map(|(x, y)| {
                let r = y - a - b * x;
                r * r
            })
            .sum();
        (sse / (nf - 2.0)).sqrt()
    } else {
        0.0
    };

    Ok(LinearFit {
        a,
        b,
        sigma_a: s * (1.0 / nf + x_mean * x_mean / sxx).sqrt(),
        sigma_b: s / sxx.sqrt(),
        s,
        n,
        x_mean,
        sxx,
    })
}

impl LinearFit {
    #[inline]
    pub fn predict_one(&self, x: f64) -> f64 {
        self.a + self.b * x
    }

    pub fn residuals(&self, data: &Dataset) -> Vec<f64> {
        data.iter().map(|(x, y)| y - self.predict_one(x)).collect()
    }
}

pub fn ols_predict(fit: &LinearFit, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| fit.predict_one(x)).collect()
}

/// Two-sided standard normal critical value for confidence `level`.
pub fn z_critical(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let std_normal = Normal::standard();
    Ok(std_normal.inverse_cdf(0.5 + level / 2.0))
}

/// Analytical band around the fitted line, using the normal critical value
/// in place of Student's t.
pub fn ols_prediction_band(
    fit: &LinearFit,
    xs: &[f64],
    level: f64,
    kind: BandKind,
) -> Result<Vec<BandPoint>> {
    if fit.n <= 2 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: fit.n,
        });
    }
    let z = z_critical(level)?;
    let base = match kind {
        BandKind::Mean => 0.0,
        BandKind::Observation => 1.0,
    };
    let inv_n = 1.0 / fit.n as f64;
    Ok(xs
        .iter()
        .map(|&x| {
            let dx = x - fit.x_mean;
            let half = z * fit.s * (base + inv_n + dx * dx / fit.sxx).sqrt();
            let prediction = fit.predict_one(x);
            BandPoint {
                x,
                prediction,
                lower: prediction - half,
                upper: prediction + half,
            }
        })
        .collect())
}

/// Coefficients on the first line, standard errors in parentheses beneath:
///
/// ```text
/// y = -100.77   +  1.0036 x
///     (7.1434)    (0.0407)
/// ```
impl fmt::Display for LinearFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(4);
        let a = format!("{:.*}", prec, self.a);
        let sa = format!("({:.*})", prec, self.sigma_a);
        let b = format!("{:.*}", prec, self.b);
        let sb = format!("({:.*})", prec, self.sigma_b);
        let wa = a.len().max(sa.len());
        let wb = b.len().max(sb.len());
        writeln!(f, "y = {a:^wa$} + {b:^wb$} x")?;
        write!(f, "    {sa:^wa$}   {sb:^wb$}")
    }
}
