//! Library surface of the pipeline CLI, so the comparison workflow can be
//! driven programmatically (and by the acceptance suite).

pub mod config;
pub mod pipeline;
