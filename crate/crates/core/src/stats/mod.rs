//! Normality and spatial autocorrelation diagnostics.

mod moran;
mod normality;
mod weights;

pub use moran::{morans_i, morans_i_statistic};
pub use normality::{blom_scores, ryan_joiner, ryan_joiner_critical, PBand};
pub use weights::{build_weights, WeightsMatrix, WeightsSpec, COINCIDENT_WEIGHT_CAP};

use serde::{Deserialize, Serialize};

/// Outcome of one diagnostic test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: String,
    pub detail: String,
}
