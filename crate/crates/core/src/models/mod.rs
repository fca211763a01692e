//! Regressors trained under the squared-error criterion.

mod forest;
mod linear;
mod tree;

pub use forest::{forest_fit, forest_predict, Forest, ForestConfig};
pub use linear::{
    ols_fit, ols_predict, ols_prediction_band, z_critical, BandKind, BandPoint, LinearFit,
};
pub use tree::{tree_fit, tree_predict, Node, Tree, TreeConfig};

use crate::error::{Error, Result};

/// Mean squared error between two equal-length vectors.
pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(sum / y_true.len() as f64)
}
