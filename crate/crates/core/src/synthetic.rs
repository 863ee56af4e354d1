//! Datasets drawn from a known ground-truth model, for end-to-end checks.

use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{random_configuration, Dataset, ExperimentRecord, SensorConfiguration};
use crate::error::{Error, Result};
use crate::hybrid::{PredictorAnchors, TunedPredictor};
use crate::layout::SensorLayout;
use crate::rng;

/// `y = clamp(p0 + (p92 - p0) * (T*·x + xᵀ A x) + ε, 0, 1)`, `ε ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenModel {
    pub anchors: PredictorAnchors,
    pub true_weights: Vec<f64>,
    /// Pairwise term `A`, `N x N`; absent means zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<Vec<Vec<f64>>>,
    pub noise_stddev: f64,
    pub seed: u64,
}

impl HiddenModel {
    pub fn linear(anchors: PredictorAnchors, true_weights: Vec<f64>, noise_stddev: f64) -> Self {
        HiddenModel {
            anchors,
            true_weights,
            interaction: None,
            noise_stddev,
            seed: 0,
        }
    }

    /// Positive weights summing to one, so the full configuration scores `p92`.
    pub fn random_positive(
        anchors: PredictorAnchors,
        num_sites: usize,
        noise_stddev: f64,
        seed: u64,
    ) -> Self {
        let mut rng = rng::seeded(seed);
        let raw: Vec<f64> = (0..num_sites).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        HiddenModel {
            anchors,
            true_weights: raw.iter().map(|w| w / total).collect(),
            interaction: None,
            noise_stddev,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_stddev >= 0.0 && self.noise_stddev.is_finite()) {
            return Err(Error::InvalidSetting(format!(
                "noise_stddev {} must be >= 0",
                self.noise_stddev
            )));
        }
        if self.true_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidSetting("true weights must be finite".into()));
        }
        PredictorAnchors::new(self.anchors.p0, self.anchors.p92)?;
        if let Some(a) = &self.interaction {
            let n = self.true_weights.len();
            if a.len() != n || a.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidSetting(format!(
                    "interaction must be {n}x{n}"
                )));
            }
            if a.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSetting("interaction must be finite".into()));
            }
        }
        Ok(())
    }

    /// Noise-free response before clamping.
    pub fn mean_response(&self, config: &SensorConfiguration) -> Result<f64> {
        Error::check_dim(self.true_weights.len(), config.len())?;
        let x = config.as_f64();
        let mut s: f64 = self.true_weights.iter().zip(&x).map(|(t, v)| t * v).sum();
        if let Some(a) = &self.interaction {
            for (i, row) in a.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    s += x[i] * v * x[j];
                }
            }
        }
        Ok(self.anchors.p0 + self.anchors.span() * s)
    }

    /// The ground truth viewed as a tuned predictor (interaction dropped).
    pub fn as_predictor(&self, layout_name: &str) -> TunedPredictor {
        TunedPredictor::new(self.anchors, self.true_weights.clone(), layout_name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hidden model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: HiddenModel =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("hidden model: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `num_records` random configurations scored by `hidden`. Configuration
/// bits and noise come from one stream seeded with `seed`.
pub fn generate_dataset(
    hidden: &HiddenModel,
    layout: &SensorLayout,
    num_records: usize,
    seed: u64,
) -> Result<Dataset> {
    hidden.validate()?;
    Error::check_dim(layout.len(), hidden.true_weights.len())?;
    if num_records == 0 {
        return Err(Error::EmptyDataset);
    }
    let noise = Normal::new(0.0, hidden.noise_stddev).expect("validated stddev");
    let mut rng = rng::seeded(seed);
    let width = num_records.to_string().len();
    let records = (0..num_records)
        .map(|i| {
            let config = random_configuration(layout.len(), &mut rng);
            let mut y = hidden.mean_response(&config)?;
            if hidden.noise_stddev > 0.0 {
                y += noise.sample(&mut rng);
            }
            ExperimentRecord::new(
                format!("R{i:0width$}"),
                config,
                "synthetic",
                y.clamp(0.0, 1.0),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(layout.clone(), records)
}
