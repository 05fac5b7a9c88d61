//! Sequential / adjusted analysis of variance for a fitted model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linreg::ols::{ols_fit, OlsFit};
use crate::special::f_p_value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaRow {
    pub source: String,
    pub df: usize,
    pub seq_ss: f64,
    pub contribution_pct: f64,
    pub adj_ss: Option<f64>,
    pub adj_ms: Option<f64>,
    pub f_value: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
}

fn refit(fit: &OlsFit, term_subset: &[String]) -> Result<OlsFit> {
    let names = fit.predictor_names();
    let preds: Vec<(&str, &[f64])> = term_subset
        .iter()
        .map(|t| {
            let idx = names
                .iter()
                .position(|n| n == t)
                .ok_or_else(|| Error::UnknownColumn(t.clone()))?;
            Ok((t.as_str(), fit.x_data[idx].as_slice()))
        })
        .collect::<Result<_>>()?;
    ols_fit(&preds, &fit.y_data)
}

/// ANOVA decomposition: sequential SS by incremental fitting in
/// `entry_order`, adjusted SS by drop-one refits, F tests against the full
/// model's MSE. Rows cover each term, then Error, then Total.
pub fn anova(fit: &OlsFit, entry_order: &[String]) -> Result<AnovaTable> {
    let names = fit.predictor_names();
    if entry_order.len() != names.len()
        || entry_order.iter().any(|t| !names.contains(t))
    {
        return Err(Error::Invalid(format!(
            "entry order {entry_order:?} is not a permutation of the fitted terms {names:?}"
        )));
    }

    let err_df = fit.n - fit.k - 1;
    let mse = fit.sse / err_df as f64;
    let mut rows = Vec::with_capacity(fit.k + 2);

    let mut sse_prev = fit.sst; // intercept-only SSE
    let mut active: Vec<String> = Vec::new();
    for term in entry_order {
        active.push(term.clone());
        let sse_now = if active.len() == fit.k {
            fit.sse
        } else {
            refit(fit, &active)?.sse
        };
        let seq_ss = (sse_prev - sse_now).max(0.0);
        sse_prev = sse_now;

        let without: Vec<String> = entry_order
            .iter()
            .filter(|t| *t != term)
            .cloned()
            .collect();
        let sse_without = if without.is_empty() {
            fit.sst
        } else {
            refit(fit, &without)?.sse
        };
        let adj_ss = (sse_without - fit.sse).max(0.0);
        let f = if mse > 0.0 { adj_ss / mse } else { f64::INFINITY };

        rows.push(AnovaRow {
            source: term.clone(),
            df: 1,
            seq_ss,
            contribution_pct: 100.0 * seq_ss / fit.sst,
            adj_ss: Some(adj_ss),
            adj_ms: Some(adj_ss),
            f_value: Some(f),
            p_value: Some(f_p_value(f, 1.0, err_df as f64)),
        });
    }

    rows.push(AnovaRow {
        source: "Error".to_string(),
        df: err_df,
        seq_ss: fit.sse,
        contribution_pct: 100.0 * fit.sse / fit.sst,
        adj_ss: Some(fit.sse),
        adj_ms: Some(mse),
        f_value: None,
        p_value: None,
    });
    rows.push(AnovaRow {
        source: "Total".to_string(),
        df: fit.n - 1,
        seq_ss: fit.sst,
        contribution_pct: 100.0,
        adj_ss: None,
        adj_ms: None,
        f_value: None,
        p_value: None,
    });

    Ok(AnovaTable { rows })
}
