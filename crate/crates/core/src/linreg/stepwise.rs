//! Stepwise variable selection: forward entry gated by t-test p-values,
//! with removal to fixpoint after each entry.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linreg::ols::{aicc, bic, mallows_cp, ols_fit, OlsFit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseConfig {
    pub alpha_enter: f64,
    pub alpha_remove: f64,
    pub max_steps: usize,
    pub candidates: Vec<String>,
}

impl StepwiseConfig {
    pub fn new(candidates: Vec<String>) -> Self {
        StepwiseConfig {
            alpha_enter: 0.15,
            alpha_remove: 0.15,
            max_steps: 100,
            candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefSnapshot {
    pub term: String,
    pub coef: f64,
    pub p_value: f64,
}

/// One entry or removal, with the model statistics after the change.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseStep {
    pub entered: Option<String>,
    pub removed: Option<String>,
    pub coef_snapshot: Vec<CoefSnapshot>,
    pub s: f64,
    pub r2: f64,
    pub r2_adj: f64,
    pub mallows_cp: Option<f64>,
    pub aicc: Option<f64>,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepwiseTrace {
    pub candidates: Vec<String>,
    pub alpha_enter: f64,
    pub alpha_remove: f64,
    pub steps: Vec<StepwiseStep>,
}

fn fit_terms(ds: &Dataset, response: &str, terms: &[String]) -> Result<OlsFit> {
    let y = ds.column(response)?;
    let mut preds: Vec<(&str, &[f64])> = Vec::with_capacity(terms.len());
    for t in terms {
        preds.push((t.as_str(), ds.column(t)?));
    }
    ols_fit(&preds, y)
}

fn record_step(
    fit: &OlsFit,
    full: Option<&OlsFit>,
    entered: Option<String>,
    removed: Option<String>,
) -> StepwiseStep {
    let coef_snapshot = fit
        .term_names
        .iter()
        .zip(fit.beta.iter().zip(&fit.p_value))
        .map(|(term, (coef, p))| CoefSnapshot {
            term: term.clone(),
            coef: *coef,
            p_value: *p,
        })
        .collect();
    StepwiseStep {
        entered,
        removed,
        coef_snapshot,
        s: fit.s,
        r2: fit.r2,
        r2_adj: fit.r2_adj,
        mallows_cp: full.and_then(|f| mallows_cp(fit, f).ok()),
        aicc: aicc(fit).ok(),
        bic: bic(fit),
    }
}

/// Forward stepwise selection with removal, Minitab style: enter the
/// candidate with the smallest entry p-value below `alpha_enter` (ties to
/// larger |t|, then candidate order), then repeatedly remove the active term
/// with the largest p-value above `alpha_remove`, one per step. Stops when
/// no entry qualifies or `max_steps` is reached. When nothing ever enters,
/// the result is the intercept-only fit with an empty trace.
pub fn stepwise_select(
    ds: &Dataset,
    response: &str,
    cfg: &StepwiseConfig,
) -> Result<(OlsFit, StepwiseTrace)> {
    if !(cfg.alpha_enter > 0.0 && cfg.alpha_enter <= 1.0) {
        return Err(Error::BadAlpha(cfg.alpha_enter));
    }
    if !(cfg.alpha_remove > 0.0 && cfg.alpha_remove <= 1.0) {
        return Err(Error::BadAlpha(cfg.alpha_remove));
    }
    ds.column(response)?;
    for c in &cfg.candidates {
        if c == response {
            return Err(Error::ResponseInCandidates(response.to_string()));
        }
        ds.column(c)?;
    }

    // Full-candidate fit anchors Mallows Cp for every step; collinear
    // candidate sets simply leave Cp unreported.
    let full = fit_terms(ds, response, &cfg.candidates).ok();

    let mut active: Vec<String> = Vec::new();
    let mut steps: Vec<StepwiseStep> = Vec::new();

    'outer: while steps.len() < cfg.max_steps {
        // Entry phase.
        let mut best: Option<(f64, f64, String)> = None; // (p, |t|, name)
        for cand in cfg.candidates.iter().filter(|c| !active.contains(c)) {
            let mut trial = active.clone();
            trial.push(cand.clone());
            let fit = match fit_terms(ds, response, &trial) {
                Ok(f) => f,
                Err(_) => continue, // collinear or infeasible with this candidate
            };
            let p = *fit.p_value.last().unwrap();
            let t_abs = fit.t_stat.last().unwrap().abs();
            if p >= cfg.alpha_enter {
                continue;
            }
            let replace = match &best {
                None => true,
                Some((bp, bt, _)) => p < bp - 1e-12 || ((p - bp).abs() <= 1e-12 && t_abs > *bt),
            };
            if replace {
                best = Some((p, t_abs, cand.clone()));
            }
        }
        let Some((_, _, entering)) = best else {
            break;
        };
        active.push(entering.clone());
        let fit = fit_terms(ds, response, &active)?;
        steps.push(record_step(&fit, full.as_ref(), Some(entering), None));

        // Removal phase: largest offending p first, one term per step.
        loop {
            if steps.len() >= cfg.max_steps {
                break 'outer;
            }
            let fit = fit_terms(ds, response, &active)?;
            let mut worst: Option<(f64, String)> = None;
            for (term, p) in fit.term_names.iter().zip(&fit.p_value).skip(1) {
                if *p > cfg.alpha_remove && worst.as_ref().is_none_or(|(wp, _)| *p > *wp) {
                    worst = Some((*p, term.clone()));
                }
            }
            let Some((_, leaving)) = worst else {
                break;
            };
            active.retain(|t| t != &leaving);
            let fit = fit_terms(ds, response, &active)?;
            steps.push(record_step(&fit, full.as_ref(), None, Some(leaving)));
        }
    }

    let final_fit = fit_terms(ds, response, &active)?;
    Ok((
        final_fit,
        StepwiseTrace {
            candidates: cfg.candidates.clone(),
            alpha_enter: cfg.alpha_enter,
            alpha_remove: cfg.alpha_remove,
            steps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64, scale: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let bits: u64 = rand::Rng::gen(&mut rng);
                let u = ((bits >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0);
                scale * crate::special::normal_quantile(u)
            })
            .collect()
    }

    #[test]
    fn selects_only_the_true_signal() {
        let n = 40;
        let x1: Vec<f64> = (0..n).map(|i| i as f64 / 10.0).collect();
        let x2 = noise(n, 5, 1.0);
        let y: Vec<f64> = x1
            .iter()
            .zip(noise(n, 6, 0.01))
            .map(|(x, e)| 3.0 * x + e)
            .collect();
        let ds = Dataset::new(vec![
            ("x1".into(), x1.clone()),
            ("x2".into(), x2.clone()),
            ("y".into(), y.clone()),
        ])
        .unwrap();
        let cfg = StepwiseConfig::new(vec!["x1".into(), "x2".into()]);
        let (fit, trace) = stepwise_select(&ds, "y", &cfg).unwrap();
        assert_eq!(fit.predictor_names(), ["x1".to_string()]);

        // Oracle: exhaustive best subset (by AICc) over the 2 candidates.
        let mut best: Option<(f64, Vec<&str>)> = None;
        let subsets: Vec<Vec<&str>> =
            vec![vec![], vec!["x1"], vec!["x2"], vec!["x1", "x2"]];
        for subset in subsets {
            let preds: Vec<(&str, &[f64])> = subset
                .iter()
                .map(|&nm| (nm, ds.column(nm).unwrap()))
                .collect();
            let f = ols_fit(&preds, &y).unwrap();
            let score = aicc(&f).unwrap();
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, subset));
            }
        }
        assert_eq!(best.unwrap().1, vec!["x1"]);
        assert_eq!(trace.steps.len(), 1);
        assert!(trace.steps[0].r2 > 0.99);
    }

    #[test]
    fn closed_gate_yields_intercept_only() {
        let n = 30;
        let x1 = noise(n, 11, 1.0);
        let y = noise(n, 12, 1.0);
        let ds = Dataset::new(vec![("x1".into(), x1), ("y".into(), y)]).unwrap();
        let mut cfg = StepwiseConfig::new(vec!["x1".into()]);
        cfg.alpha_enter = 1e-9;
        let (fit, trace) = stepwise_select(&ds, "y", &cfg).unwrap();
        assert_eq!(fit.k, 0);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn response_among_candidates_is_rejected() {
        let ds = Dataset::new(vec![
            ("x".into(), vec![1.0, 2.0, 3.0, 4.0]),
            ("y".into(), vec![1.0, 2.0, 2.5, 4.0]),
        ])
        .unwrap();
        let cfg = StepwiseConfig::new(vec!["x".into(), "y".into()]);
        assert!(matches!(
            stepwise_select(&ds, "y", &cfg),
            Err(Error::ResponseInCandidates(_))
        ));
    }

    #[test]
    fn collinear_candidates_all_retained_terms_significant() {
        use crate::dataset::{generate_synthetic, pearson, GeneratorProfile};
        let ds = generate_synthetic(124, 21, &GeneratorProfile::default()).unwrap();
        let cfg = StepwiseConfig::new(vec!["d99".into(), "d98".into(), "d97".into()]);
        let (fit, trace) = stepwise_select(&ds, "d80", &cfg).unwrap();
        assert!(!trace.steps.is_empty());
        for p in fit.p_value.iter().skip(1) {
            assert!(*p < 0.15, "retained term with p = {p}");
        }
        // Entry steps never decrease R^2.
        let mut last_entry_r2 = 0.0;
        for step in trace.steps.iter().filter(|s| s.entered.is_some()) {
            assert!(step.r2 >= last_entry_r2 - 1e-12);
            last_entry_r2 = step.r2;
        }
        // Each step changes the active set by exactly one term.
        for step in &trace.steps {
            assert!(step.entered.is_some() != step.removed.is_some());
        }
        // The final model never holds a near-duplicate pair.
        let names = fit.predictor_names();
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                let r = pearson(
                    ds.column(&names[i]).unwrap(),
                    ds.column(&names[j]).unwrap(),
                )
                .unwrap();
                assert!(r.abs() <= 0.995, "pair ({}, {}) with r = {r}", names[i], names[j]);
            }
        }
    }

    #[test]
    fn cp_trace_descends_toward_parameter_count() {
        use crate::dataset::{generate_synthetic, GeneratorProfile};
        use crate::seed::child_seed;
        // A collinear run where all three candidates enter: Cp falls step
        // over step and ends near k+1 when the final model is the full one.
        let ds =
            generate_synthetic(124, child_seed(7, 1), &GeneratorProfile::default()).unwrap();
        let cfg = StepwiseConfig::new(vec!["d99".into(), "d98".into(), "d97".into()]);
        let (fit, trace) = stepwise_select(&ds, "d80", &cfg).unwrap();
        assert_eq!(fit.k, 3, "expected the full trio at this seed");
        let cps: Vec<f64> = trace
            .steps
            .iter()
            .map(|s| s.mallows_cp.expect("full fit available"))
            .collect();
        for w in cps.windows(2) {
            assert!(w[1] < w[0], "Cp must decrease: {cps:?}");
        }
        let last = *cps.last().unwrap();
        assert!((last - 4.0).abs() < 1e-9, "final Cp {last} should equal k+1");
    }
}
