//! Report structures mirroring the classic regression-output vocabulary
//! (coefficient table, model summary, stepwise trace, ANOVA), with JSON
//! serialization and a markdown renderer.

use serde::Serialize;

use crate::linreg::anova::AnovaTable;
use crate::linreg::cv::CvResult;
use crate::linreg::ols::OlsFit;
use crate::linreg::stepwise::StepwiseTrace;
use crate::special::student_t_quantile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    #[serde(rename = "Term")]
    pub term: String,
    #[serde(rename = "Coef")]
    pub coef: f64,
    #[serde(rename = "SE Coef")]
    pub se_coef: f64,
    #[serde(rename = "95% CI")]
    pub ci: (f64, f64),
    #[serde(rename = "T-Value")]
    pub t_value: f64,
    #[serde(rename = "P-Value")]
    pub p_value: f64,
    #[serde(rename = "VIF")]
    pub vif: Option<f64>,
}

/// Model summary in percent for the R-sq family, natural units otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "R-sq")]
    pub r_sq_pct: f64,
    #[serde(rename = "R-sq(adj)")]
    pub r_sq_adj_pct: f64,
    #[serde(rename = "PRESS")]
    pub press: Option<f64>,
    #[serde(rename = "R-sq(pred)")]
    pub r_sq_pred_pct: Option<f64>,
    #[serde(rename = "k-fold S")]
    pub k_fold_s: Option<f64>,
    #[serde(rename = "k-fold R-sq")]
    pub k_fold_r_sq_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: String,
    pub coefficients: Vec<CoefficientRow>,
    pub summary: ModelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stepwise: Option<StepwiseTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anova: Option<AnovaTable>,
}

/// Assemble the serializable report for a fit, optionally with k-fold CV
/// results and the stepwise/ANOVA sections.
pub fn fit_report(
    label: &str,
    fit: &OlsFit,
    cv: Option<&CvResult>,
    stepwise: Option<StepwiseTrace>,
    anova: Option<AnovaTable>,
) -> FitReport {
    let df = (fit.n - fit.k - 1) as f64;
    let t_crit = student_t_quantile(0.975, df);
    let coefficients = fit
        .term_names
        .iter()
        .enumerate()
        .map(|(i, term)| CoefficientRow {
            term: term.clone(),
            coef: fit.beta[i],
            se_coef: fit.se[i],
            ci: (
                fit.beta[i] - t_crit * fit.se[i],
                fit.beta[i] + t_crit * fit.se[i],
            ),
            t_value: fit.t_stat[i],
            p_value: fit.p_value[i],
            vif: if i == 0 { None } else { Some(fit.vif[i - 1]) },
        })
        .collect();

    FitReport {
        model: label.to_string(),
        coefficients,
        summary: ModelSummary {
            s: fit.s,
            r_sq_pct: 100.0 * fit.r2,
            r_sq_adj_pct: 100.0 * fit.r2_adj,
            press: fit.press,
            r_sq_pred_pct: fit.r2_pred.map(|v| 100.0 * v),
            k_fold_s: cv.map(|c| c.cv_s),
            k_fold_r_sq_pct: cv.map(|c| 100.0 * c.cv_r2),
        },
        stepwise,
        anova,
    }
}

fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-4..1e7).contains(&a) {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl FitReport {
    /// Markdown rendering of all sections present.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("## {}\n\n", self.model));

        if let Some(trace) = &self.stepwise {
            out.push_str("### Stepwise Selection of Terms\n\n");
            out.push_str(&format!(
                "Candidate terms: {}\n\n",
                trace.candidates.join(", ")
            ));
            out.push_str(&render_stepwise(trace));
            out.push_str(&format!(
                "\nalpha to enter = {}, alpha to remove = {}\n\n",
                trace.alpha_enter, trace.alpha_remove
            ));
        }

        out.push_str("### Model Summary\n\n");
        out.push_str(
            "| S | R-sq | R-sq(adj) | PRESS | R-sq(pred) | k-fold S | k-fold R-sq |\n",
        );
        out.push_str("|---|------|-----------|-------|------------|----------|-------------|\n");
        let s = &self.summary;
        out.push_str(&format!(
            "| {} | {:.2}% | {:.2}% | {} | {} | {} | {} |\n\n",
            fmt(s.s),
            s.r_sq_pct,
            s.r_sq_adj_pct,
            fmt_opt(s.press),
            s.r_sq_pred_pct
                .map(|v| format!("{v:.2}%"))
                .unwrap_or_default(),
            fmt_opt(s.k_fold_s),
            s.k_fold_r_sq_pct
                .map(|v| format!("{v:.2}%"))
                .unwrap_or_default(),
        ));

        out.push_str("### Coefficients\n\n");
        out.push_str("| Term | Coef | SE Coef | 95% CI | T-Value | P-Value | VIF |\n");
        out.push_str("|------|------|---------|--------|---------|---------|-----|\n");
        for row in &self.coefficients {
            out.push_str(&format!(
                "| {} | {} | {} | ({}, {}) | {:.2} | {:.3} | {} |\n",
                row.term,
                fmt(row.coef),
                fmt(row.se_coef),
                fmt(row.ci.0),
                fmt(row.ci.1),
                row.t_value,
                row.p_value,
                row.vif.map(|v| format!("{v:.2}")).unwrap_or_default(),
            ));
        }
        out.push('\n');

        if let Some(table) = &self.anova {
            out.push_str("### Analysis of Variance\n\n");
            out.push_str(
                "| Source | DF | Seq SS | Contribution | Adj SS | Adj MS | F-Value | P-Value |\n",
            );
            out.push_str(
                "|--------|----|--------|--------------|--------|--------|---------|---------|\n",
            );
            for row in &table.rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {:.2}% | {} | {} | {} | {} |\n",
                    row.source,
                    row.df,
                    fmt(row.seq_ss),
                    row.contribution_pct,
                    fmt_opt(row.adj_ss),
                    fmt_opt(row.adj_ms),
                    row.f_value.map(|v| format!("{v:.2}")).unwrap_or_default(),
                    row.p_value.map(|v| format!("{v:.3}")).unwrap_or_default(),
                ));
            }
            out.push('\n');
        }
        out
    }
}

fn render_stepwise(trace: &StepwiseTrace) -> String {
    let mut out = String::new();
    let n_steps = trace.steps.len();
    // Header: one column pair per step.
    out.push_str("| Term |");
    for i in 0..n_steps {
        out.push_str(&format!(" Step {} Coef | Step {} P |", i + 1, i + 1));
    }
    out.push('\n');
    out.push_str("|------|");
    for _ in 0..n_steps {
        out.push_str("------|------|");
    }
    out.push('\n');

    // Term rows, in first-appearance order.
    let mut terms: Vec<String> = Vec::new();
    for step in &trace.steps {
        for c in &step.coef_snapshot {
            if !terms.contains(&c.term) {
                terms.push(c.term.clone());
            }
        }
    }
    for term in &terms {
        out.push_str(&format!("| {term} |"));
        for step in &trace.steps {
            match step.coef_snapshot.iter().find(|c| &c.term == term) {
                Some(c) if term == "Constant" => {
                    out.push_str(&format!(" {} |  |", fmt(c.coef)))
                }
                Some(c) => out.push_str(&format!(" {} | {:.3} |", fmt(c.coef), c.p_value)),
                None => out.push_str("  |  |"),
            }
        }
        out.push('\n');
    }

    // Footer statistics, spanning the coef/p pair per step.
    type StepFmt = Box<dyn Fn(&crate::linreg::stepwise::StepwiseStep) -> String>;
    let footer: [(&str, StepFmt); 6] = [
        ("S", Box::new(|s| fmt(s.s))),
        ("R-sq", Box::new(|s| format!("{:.2}%", 100.0 * s.r2))),
        ("R-sq(adj)", Box::new(|s| format!("{:.2}%", 100.0 * s.r2_adj))),
        (
            "Mallows Cp",
            Box::new(|s| s.mallows_cp.map(|v| format!("{v:.2}")).unwrap_or_default()),
        ),
        (
            "AICc",
            Box::new(|s| s.aicc.map(|v| format!("{v:.2}")).unwrap_or_default()),
        ),
        ("BIC", Box::new(|s| format!("{:.2}", s.bic))),
    ];
    for (label, f) in footer {
        out.push_str(&format!("| {label} |"));
        for step in &trace.steps {
            out.push_str(&format!(" {} |  |", f(step)));
        }
        out.push('\n');
    }
    out
}
