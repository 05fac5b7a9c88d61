//! Regression toolkit for skewed, multicollinear tabular data.
//!
//! The crate covers the full comparison workflow between linear and
//! tree-based regressors: data profiling (summary statistics, histograms,
//! correlation matrices), Box-Cox transformation with maximum-likelihood
//! lambda estimation, OLS with stepwise selection and the standard
//! diagnostic battery (VIF, Mallows Cp, AICc/BIC, PRESS, k-fold CV,
//! Durbin-Watson), CART regression trees, and bagged random forests with
//! out-of-bag validation and impurity-based feature importance.

pub mod dataset;
pub mod error;
pub mod forest;
pub mod linreg;
pub mod metrics;
pub mod seed;
pub mod special;
pub mod transform;
pub mod tree;

pub use error::{Error, Result};
