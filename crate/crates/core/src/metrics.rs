//! Model evaluation: R², RMSE, MAPE (percent) and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::dataset::pearson;
use crate::error::{Error, Result};

/// The evaluation quartet for one (actual, predicted) pair of vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub r2: f64,
    pub rmse: f64,
    pub mape_pct: f64,
    pub correlation: f64,
    pub n: usize,
}

fn check_lengths(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch(actual.len(), predicted.len()));
    }
    if actual.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(())
}

/// Coefficient of determination, 1 − SSres/SStot. May be negative.
pub fn r2_score(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    if actual.len() < 2 {
        return Err(Error::EmptyVector);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantActual);
    }
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let n = actual.len() as f64;
    let ss: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (p - a).powi(2))
        .sum();
    Ok((ss / n).sqrt())
}

/// Mean absolute percentage error, in percent. Zero actuals are an error.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let mut acc = 0.0;
    for (i, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroActual(i));
        }
        acc += ((a - p) / a).abs();
    }
    Ok(acc / actual.len() as f64 * 100.0)
}

/// All four metrics at once.
pub fn evaluate(actual: &[f64], predicted: &[f64]) -> Result<EvalResult> {
    Ok(EvalResult {
        r2: r2_score(actual, predicted)?,
        rmse: rmse(actual, predicted)?,
        mape_pct: mape(actual, predicted)?,
        correlation: pearson(actual, predicted)?,
        n: actual.len(),
    })
}
