//! Validation of purchase-derived disease-risk proxies against clinical
//! claim data: cohort extraction from purchase logs, ingredient risk
//! screening, dose-response analysis, seasonal decomposition and a seeded
//! synthetic population generator.

pub mod classify;
pub mod cohort;
pub mod ingest;
pub mod numstat;
pub mod plot;
pub mod risk;
pub mod seasonality;
pub mod synth;
