//! Per-site Pearson correlation between sensor presence and success rate.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// One weight per site; `None` where the site column (or the success
/// column) has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub weights: Vec<Option<f64>>,
    pub undefined_sites: Vec<usize>,
}

impl CorrelationReport {
    /// Defined weights as a dense vector, or `UndefinedWeights` listing the
    /// offending sites.
    pub fn dense(&self) -> Result<Vec<f64>> {
        if !self.undefined_sites.is_empty() {
            return Err(Error::UndefinedWeights(self.undefined_sites.clone()));
        }
        Ok(self.weights.iter().map(|w| w.expect("defined")).collect())
    }

    /// Copy with every undefined weight replaced by zero.
    pub fn with_undefined_as_zero(&self) -> CorrelationReport {
        CorrelationReport {
            weights: self
                .weights
                .iter()
                .map(|w| Some(w.unwrap_or(0.0)))
                .collect(),
            undefined_sites: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Pearson weight of every site column against the success-rate column,
/// two-pass (means first, then centered sums).
pub fn pearson_weights(dataset: &Dataset) -> Result<CorrelationReport> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::TooFewRecords { needed: 2, have: n });
    }
    let y = dataset.targets();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let dy: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let syy: f64 = dy.iter().map(|d| d * d).sum();
    if syy == 0.0 {
        return Err(Error::AllUndefined);
    }

    let mut weights = Vec::with_capacity(dataset.num_sites());
    let mut undefined_sites = Vec::new();
    for site in 0..dataset.num_sites() {
        let x = dataset.column(site);
        let x_mean = x.iter().sum::<f64>() / n as f64;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (xi, di) in x.iter().zip(&dy) {
            let dx = xi - x_mean;
            sxy += dx * di;
            sxx += dx * dx;
        }
        if sxx == 0.0 {
            weights.push(None);
            undefined_sites.push(site);
        } else {
            let w = sxy / (sxx.sqrt() * syy.sqrt());
            weights.push(Some(w.clamp(-1.0, 1.0)));
        }
    }
    Ok(CorrelationReport {
        weights,
        undefined_sites,
    })
}
