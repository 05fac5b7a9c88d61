//! Residual analysis: Durbin-Watson, normal probability plot data,
//! standardized-residual outlier flags.

use serde::Serialize;

use crate::dataset::skewness;
use crate::error::{Error, Result};
use crate::linreg::ols::OlsFit;
use crate::special::normal_quantile;

/// Standardized residuals beyond this magnitude are flagged as outliers.
pub const OUTLIER_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualDiagnostics {
    /// None when the residual variance is zero (statistic undefined).
    pub durbin_watson: Option<f64>,
    pub note: Option<String>,
    pub residual_skewness: f64,
    /// (theoretical normal quantile, ordered residual) pairs.
    pub normal_plot_points: Vec<(f64, f64)>,
    pub fitted_vs_residual: Vec<(f64, f64)>,
    /// Row indices with |standardized residual| > 3.
    pub flagged_outliers: Vec<usize>,
}

/// Durbin-Watson statistic of a residual series in observation order;
/// None when the residuals have zero sum of squares.
pub fn durbin_watson(residuals: &[f64]) -> Option<f64> {
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return None;
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Some(num / denom)
}

/// Residual diagnostics for a fit. `order` optionally reorders observations
/// for the Durbin-Watson statistic (e.g. by measurement time); when absent
/// the stored row order is used.
pub fn residual_diagnostics(
    fit: &OlsFit,
    order: Option<&[usize]>,
) -> Result<ResidualDiagnostics> {
    let n = fit.n;
    if n < 3 {
        return Err(Error::TooFewObservations { n, k: fit.k });
    }

    let ordered: Vec<f64> = match order {
        Some(perm) => {
            if perm.len() != n {
                return Err(Error::LengthMismatch(n, perm.len()));
            }
            let mut seen = vec![false; n];
            for &i in perm {
                if i >= n || seen[i] {
                    return Err(Error::Invalid(format!(
                        "order is not a permutation of 0..{n}"
                    )));
                }
                seen[i] = true;
            }
            perm.iter().map(|&i| fit.residuals[i]).collect()
        }
        None => fit.residuals.clone(),
    };

    let dw = durbin_watson(&ordered);
    let note = if dw.is_none() {
        Some("zero residual variance; Durbin-Watson undefined".to_string())
    } else {
        None
    };

    let mut sorted = fit.residuals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let normal_plot_points: Vec<(f64, f64)> = sorted
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let p = (i as f64 + 1.0 - 0.375) / (n as f64 + 0.25);
            (normal_quantile(p), *e)
        })
        .collect();

    let fitted_vs_residual: Vec<(f64, f64)> = fit
        .fitted
        .iter()
        .zip(&fit.residuals)
        .map(|(f, e)| (*f, *e))
        .collect();

    let mut flagged_outliers = Vec::new();
    if fit.s > 0.0 {
        for (i, (e, h)) in fit.residuals.iter().zip(&fit.leverage).enumerate() {
            let denom = fit.s * (1.0 - h).max(0.0).sqrt();
            if denom > 0.0 && (e / denom).abs() > OUTLIER_THRESHOLD {
                flagged_outliers.push(i);
            }
        }
    }

    Ok(ResidualDiagnostics {
        durbin_watson: dw,
        note,
        residual_skewness: skewness(&fit.residuals),
        normal_plot_points,
        fitted_vs_residual,
        flagged_outliers,
    })
}
