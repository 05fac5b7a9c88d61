//! Multiple linear regression: OLS core, stepwise selection, k-fold cross
//! validation, ANOVA decomposition, residual diagnostics and reporting.

mod anova;
mod cv;
mod diagnostics;
mod ols;
mod report;
mod solve;
mod stepwise;

pub use anova::{anova, AnovaRow, AnovaTable};
pub use cv::{kfold_cv, CvResult};
pub use diagnostics::{
    durbin_watson, residual_diagnostics, ResidualDiagnostics, OUTLIER_THRESHOLD,
};
pub use ols::{aicc, bic, mallows_cp, ols_fit, press_r2pred, vif, OlsFit};
pub use report::{fit_report, CoefficientRow, FitReport, ModelSummary};
pub use stepwise::{stepwise_select, CoefSnapshot, StepwiseConfig, StepwiseStep, StepwiseTrace};
