//! Ordinary least squares with the full diagnostic set: standard errors,
//! t/p-values, VIF, PRESS, and the model-selection criteria.

use crate::error::{Error, Result};
use crate::linreg::solve::least_squares;
use crate::special::student_t_p_value;

/// VIF values above this R-squared are reported as the +infinity sentinel.
const PERFECT_FIT_R2: f64 = 1.0 - 1e-12;

/// A fitted linear model. The intercept ("Constant") is always present and
/// comes first in the per-term vectors; `vif` has one entry per predictor
/// (no intercept entry).
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub term_names: Vec<String>,
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub t_stat: Vec<f64>,
    pub p_value: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub leverage: Vec<f64>,
    pub sse: f64,
    pub sst: f64,
    pub ssr: f64,
    /// Residual standard error, sqrt(SSE / (n - k - 1)).
    pub s: f64,
    pub r2: f64,
    pub r2_adj: f64,
    /// None when some leverage is 1 (PRESS undefined).
    pub press: Option<f64>,
    pub r2_pred: Option<f64>,
    pub vif: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub(crate) x_data: Vec<Vec<f64>>,
    pub(crate) y_data: Vec<f64>,
}

impl OlsFit {
    /// Predict the response for one row of predictor values (same order as
    /// the fitted predictors).
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.k {
            return Err(Error::ArityMismatch {
                expected: self.k,
                got: features.len(),
            });
        }
        let mut acc = self.beta[0];
        for (b, x) in self.beta[1..].iter().zip(features) {
            if !x.is_finite() {
                return Err(Error::NonFiniteFeature(0));
            }
            acc += b * x;
        }
        Ok(acc)
    }

    /// Names of the predictors, i.e. all terms except the intercept.
    pub fn predictor_names(&self) -> &[String] {
        &self.term_names[1..]
    }
}

/// Fit y on the given predictors plus an intercept.
pub fn ols_fit(predictors: &[(&str, &[f64])], y: &[f64]) -> Result<OlsFit> {
    let n = y.len();
    let k = predictors.len();
    if n <= k + 1 {
        return Err(Error::TooFewObservations { n, k });
    }
    for (_, col) in predictors {
        if col.len() != n {
            return Err(Error::LengthMismatch(n, col.len()));
        }
    }

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut term_names: Vec<String> = Vec::with_capacity(k + 1);
    columns.push(vec![1.0; n]);
    term_names.push("Constant".to_string());
    for (name, col) in predictors {
        columns.push(col.to_vec());
        term_names.push(name.to_string());
    }

    let sol = least_squares(&columns, y, &term_names)?;

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let sse = sol.sse;
    let ssr = (sst - sse).max(0.0);
    let df = (n - k - 1) as f64;
    let s = (sse / df).sqrt();
    let (r2, r2_adj) = if sst > 0.0 {
        let r2 = 1.0 - sse / sst;
        (r2, 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df)
    } else {
        (0.0, 0.0)
    };

    let se: Vec<f64> = sol
        .xtx_inv
        .iter()
        .enumerate()
        .map(|(j, row)| s * row[j].max(0.0).sqrt())
        .collect();
    let t_stat: Vec<f64> = sol
        .beta
        .iter()
        .zip(&se)
        .map(|(b, e)| if *e > 0.0 { b / e } else { f64::INFINITY * b.signum() })
        .collect();
    let p_value: Vec<f64> = t_stat.iter().map(|t| student_t_p_value(*t, df)).collect();

    let press_pair = press_from_parts(&sol.residuals, &sol.leverage);
    let (press, r2_pred) = match press_pair {
        Ok(p) => (Some(p), if sst > 0.0 { Some(1.0 - p / sst) } else { None }),
        Err(_) => (None, None),
    };

    let vif = if k >= 2 {
        let preds: Vec<(&str, &[f64])> = predictors.to_vec();
        vif_values(&preds)?
    } else if k == 1 {
        vec![1.0]
    } else {
        Vec::new()
    };

    Ok(OlsFit {
        term_names,
        beta: sol.beta,
        se,
        t_stat,
        p_value,
        fitted: sol.fitted,
        residuals: sol.residuals,
        leverage: sol.leverage,
        sse,
        sst,
        ssr,
        s,
        r2,
        r2_adj,
        press,
        r2_pred,
        vif,
        n,
        k,
        x_data: predictors.iter().map(|(_, c)| c.to_vec()).collect(),
        y_data: y.to_vec(),
    })
}

fn press_from_parts(residuals: &[f64], leverage: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (e, h)) in residuals.iter().zip(leverage).enumerate() {
        if *h >= 1.0 - 1e-12 {
            return Err(Error::LeverageOne(i));
        }
        acc += (e / (1.0 - h)).powi(2);
    }
    Ok(acc)
}

/// PRESS and R-sq(pred) of a fit. Errors when a leverage is 1 (an exact
/// interpolation point), naming the row.
pub fn press_r2pred(fit: &OlsFit) -> Result<(f64, f64)> {
    let press = press_from_parts(&fit.residuals, &fit.leverage)?;
    Ok((press, 1.0 - press / fit.sst))
}

/// Variance inflation factors: VIF_j = 1 / (1 - R2_j) from regressing
/// predictor j on the remaining predictors. Perfect collinearity yields the
/// +infinity sentinel rather than an error.
pub fn vif(predictors: &[(&str, &[f64])]) -> Result<Vec<f64>> {
    if predictors.len() < 2 {
        return Err(Error::Invalid(
            "VIF needs at least 2 predictors".to_string(),
        ));
    }
    vif_values(predictors)
}

fn vif_values(predictors: &[(&str, &[f64])]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(predictors.len());
    for j in 0..predictors.len() {
        let response = predictors[j].1;
        let mean = response.iter().sum::<f64>() / response.len() as f64;
        let sst: f64 = response.iter().map(|v| (v - mean).powi(2)).sum();
        if sst == 0.0 {
            return Err(Error::ConstantColumn(predictors[j].0.to_string()));
        }
        let others: Vec<(&str, &[f64])> = predictors
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, p)| *p)
            .collect();
        let r2_j = match ols_fit(&others, response) {
            Ok(aux) => aux.r2,
            // Collinearity among the auxiliary regressors means predictor j
            // lives in a degenerate span; report the sentinel.
            Err(Error::RankDeficient(_)) => 1.0,
            Err(e) => return Err(e),
        };
        if r2_j >= PERFECT_FIT_R2 {
            out.push(f64::INFINITY);
        } else {
            out.push(1.0 / (1.0 - r2_j));
        }
    }
    Ok(out)
}

/// Mallows Cp of a subset model against the full model:
/// Cp = SSE_subset / MSE_full - n + 2 (k_subset + 1).
pub fn mallows_cp(fit: &OlsFit, full_fit: &OlsFit) -> Result<f64> {
    let full_terms: Vec<&String> = full_fit.term_names.iter().collect();
    let missing: Vec<String> = fit
        .term_names
        .iter()
        .filter(|t| !full_terms.contains(t))
        .cloned()
        .collect();
    if !missing.is_empty() || fit.n != full_fit.n {
        return Err(Error::NotNested(missing));
    }
    if full_fit.n <= full_fit.k + 1 {
        return Err(Error::TooFewObservations {
            n: full_fit.n,
            k: full_fit.k,
        });
    }
    let mse_full = full_fit.sse / (full_fit.n - full_fit.k - 1) as f64;
    Ok(fit.sse / mse_full - fit.n as f64 + 2.0 * (fit.k as f64 + 1.0))
}

/// Small-sample corrected AIC with p = k + 2 estimated parameters
/// (coefficients, intercept and the error variance).
pub fn aicc(fit: &OlsFit) -> Result<f64> {
    let n = fit.n as f64;
    let p = fit.k as f64 + 2.0;
    if fit.n <= fit.k + 2 {
        return Err(Error::TooFewObservations { n: fit.n, k: fit.k });
    }
    Ok(n * (fit.sse / n).ln() + 2.0 * p + 2.0 * p * (p + 1.0) / (n - p - 1.0))
}

/// Bayesian information criterion with the same p = k + 2 convention.
pub fn bic(fit: &OlsFit) -> f64 {
    let n = fit.n as f64;
    let p = fit.k as f64 + 2.0;
    n * (fit.sse / n).ln() + p * n.ln()
}
