//! Box-Cox power transformation with profile-likelihood lambda estimation
//! and exact inversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lambda treated as zero (log transform) below this magnitude.
const LAMBDA_ZERO: f64 = 1e-12;
/// Search bounds for the optimal lambda.
const LAMBDA_LO: f64 = -5.0;
const LAMBDA_HI: f64 = 5.0;
/// Grid points for the coarse search.
const GRID_STEPS: usize = 101;
/// Golden-section refinement width.
const REFINE_TOL: f64 = 1e-4;

/// Fitted transform parameters. `shift` is added before transforming so the
/// data is strictly positive; `source_min` records the pre-shift minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxParams {
    pub lambda: f64,
    pub shift: f64,
    pub source_min: f64,
}

/// A transformed column together with everything needed to invert it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedColumn {
    pub values: Vec<f64>,
    pub params: BoxCoxParams,
    pub original_name: String,
}

fn boxcox_value(y: f64, lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_ZERO {
        y.ln()
    } else {
        // (y^l - 1)/l computed as expm1(l*ln(y))/l for precision near l = 0.
        (lambda * y.ln()).exp_m1() / lambda
    }
}

/// Apply the Box-Cox transform elementwise: (y^λ − 1)/λ, or ln(y) at λ = 0.
pub fn boxcox_apply(
    y: &[f64],
    lambda: f64,
    shift: f64,
    name: &str,
) -> Result<TransformedColumn> {
    if y.is_empty() {
        return Err(Error::EmptyVector);
    }
    let source_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut values = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        let shifted = v + shift;
        if shifted <= 0.0 {
            return Err(Error::NonPositive {
                index: i,
                value: shifted,
            });
        }
        values.push(boxcox_value(shifted, lambda));
    }
    Ok(TransformedColumn {
        values,
        params: BoxCoxParams {
            lambda,
            shift,
            source_min,
        },
        original_name: name.to_string(),
    })
}

/// Shift that makes a column strictly positive: 0 when already positive,
/// otherwise |min| + 1e-6 * range.
pub fn auto_shift(y: &[f64]) -> f64 {
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        return 0.0;
    }
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    min.abs() + 1e-6 * (max - min)
}

/// Box-Cox profile log-likelihood at a given lambda.
fn profile_log_likelihood(shifted: &[f64], lambda: f64) -> f64 {
    let n = shifted.len() as f64;
    let transformed: Vec<f64> = shifted.iter().map(|&v| boxcox_value(v, lambda)).collect();
    let mean = transformed.iter().sum::<f64>() / n;
    let var = transformed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let log_sum = shifted.iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * n * var.ln() + (lambda - 1.0) * log_sum
}

/// Find the lambda maximizing the profile log-likelihood: coarse grid over
/// [-5, 5], then golden-section refinement to 1e-4. Grid ties break toward
/// the lambda of smaller magnitude.
pub fn boxcox_optimal_lambda(y: &[f64]) -> Result<BoxCoxParams> {
    if y.len() < 3 {
        return Err(Error::EmptyVector);
    }
    let source_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if source_min == max {
        return Err(Error::NoInformativeLambda);
    }
    let shift = auto_shift(y);
    let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();

    let step = (LAMBDA_HI - LAMBDA_LO) / (GRID_STEPS - 1) as f64;
    let mut best_idx = 0;
    let mut best_ll = f64::NEG_INFINITY;
    let mut best_lambda = LAMBDA_LO;
    for i in 0..GRID_STEPS {
        let lambda = LAMBDA_LO + i as f64 * step;
        let ll = profile_log_likelihood(&shifted, lambda);
        let better = ll > best_ll + 1e-12
            || ((ll - best_ll).abs() <= 1e-12 && lambda.abs() < best_lambda.abs());
        if better {
            best_ll = ll;
            best_idx = i;
            best_lambda = lambda;
        }
    }
    if !best_ll.is_finite() {
        return Err(Error::NoInformativeLambda);
    }

    // Golden-section refine inside the bracket around the best grid point.
    let mut lo = (LAMBDA_LO + best_idx.saturating_sub(1) as f64 * step).max(LAMBDA_LO);
    let mut hi = (LAMBDA_LO + (best_idx + 1) as f64 * step).min(LAMBDA_HI);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = profile_log_likelihood(&shifted, x1);
    let mut f2 = profile_log_likelihood(&shifted, x2);
    while hi - lo > REFINE_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = profile_log_likelihood(&shifted, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = profile_log_likelihood(&shifted, x2);
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    if lambda.abs() < REFINE_TOL {
        // Snap to the exact log transform when the optimum is at zero.
        lambda = 0.0;
    }

    Ok(BoxCoxParams {
        lambda,
        shift,
        source_min,
    })
}

/// Invert a transformed column back to the original scale.
pub fn boxcox_inverse(t: &TransformedColumn) -> Result<Vec<f64>> {
    let lambda = t.params.lambda;
    let shift = t.params.shift;
    let mut out = Vec::with_capacity(t.values.len());
    for (i, &v) in t.values.iter().enumerate() {
        let y = if lambda.abs() < LAMBDA_ZERO {
            v.exp()
        } else {
            let base = lambda * v;
            if base <= -1.0 {
                return Err(Error::InverseDomain { index: i, lambda });
            }
            (base.ln_1p() / lambda).exp()
        };
        out.push(y - shift);
    }
    Ok(out)
}

/// Invert a single predicted value on the transformed scale.
pub fn boxcox_inverse_value(v: f64, params: &BoxCoxParams) -> Result<f64> {
    let col = TransformedColumn {
        values: vec![v],
        params: *params,
        original_name: String::new(),
    };
    Ok(boxcox_inverse(&col)?[0])
}
