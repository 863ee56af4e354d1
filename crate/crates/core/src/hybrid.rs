//! Anchored linear predictor with correlation-initialized, fine-tuned
//! per-site coefficients.
//!
//! The prediction for a configuration `x` is
//!
//! ```text
//! p̂(x) = clamp(p0 + (p92 - p0) * Σ T[n] * x[n], 0, 1)
//! ```
//!
//! where `p0` is the measured success without sensors and `p92` the
//! success with the full original sensor set. `T` starts from normalized
//! Pearson weights and is refined by [`fine_tune`]: a coordinate pass that
//! nudges one `T[i]` at a time by `±step_delta`, compensating the change
//! across the remaining coefficients in proportion to their magnitudes so
//! that `Σ T` never moves. A nudge is kept only if it strictly lowers the
//! validation error.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlation::CorrelationReport;
use crate::dataset::{Dataset, SensorConfiguration};
use crate::error::{Error, Result};
use crate::layout::{SensorLayout, SensorSite};
use crate::regression::RegressionFit;

/// Below this magnitude every other coefficient counts as zero and the
/// compensation is spread uniformly.
const COMPENSATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorAnchors {
    pub p0: f64,
    pub p92: f64,
}

impl PredictorAnchors {
    pub fn new(p0: f64, p92: f64) -> Result<Self> {
        for (name, v) in [("p0", p0), ("p92", p92)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Range(format!("anchor {name} = {v} outside [0, 1]")));
            }
        }
        if p0 == p92 {
            return Err(Error::DegenerateAnchors(p0));
        }
        Ok(PredictorAnchors { p0, p92 })
    }

    pub fn span(&self) -> f64 {
        self.p92 - self.p0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMetric {
    #[default]
    Mae,
    Rmse,
}

impl ValidationMetric {
    pub fn evaluate(self, errors: impl Iterator<Item = f64>) -> f64 {
        let (mut acc, mut n) = (0.0, 0usize);
        for e in errors {
            acc += match self {
                ValidationMetric::Mae => e.abs(),
                ValidationMetric::Rmse => e * e,
            };
            n += 1;
        }
        let mean = acc / n as f64;
        match self {
            ValidationMetric::Mae => mean,
            ValidationMetric::Rmse => mean.sqrt(),
        }
    }
}

impl fmt::Display for ValidationMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationMetric::Mae => "MAE",
            ValidationMetric::Rmse => "RMSE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningSettings {
    pub step_delta: f64,
    pub max_passes: usize,
    pub validation_metric: ValidationMetric,
}

impl Default for TuningSettings {
    fn default() -> Self {
        TuningSettings {
            step_delta: 0.01,
            max_passes: 50,
            validation_metric: ValidationMetric::Mae,
        }
    }
}

impl TuningSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_delta > 0.0 && self.step_delta.is_finite()) {
            return Err(Error::InvalidSetting(format!(
                "step_delta {} must be > 0",
                self.step_delta
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidSetting("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// One accepted coordinate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningStep {
    pub pass: usize,
    pub site_id: usize,
    pub delta: f64,
    pub val_before: f64,
    pub val_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunedPredictor {
    pub anchors: PredictorAnchors,
    pub weights: Vec<f64>,
    pub layout_name: String,
    pub tuning_log: Vec<TuningStep>,
}

#[derive(Serialize, Deserialize)]
struct PredictorFile {
    p0: f64,
    p92: f64,
    weights: Vec<f64>,
    layout_name: String,
}

impl TunedPredictor {
    pub fn new(
        anchors: PredictorAnchors,
        weights: Vec<f64>,
        layout_name: impl Into<String>,
    ) -> Self {
        TunedPredictor {
            anchors,
            weights,
            layout_name: layout_name.into(),
            tuning_log: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ T[n] * x[n]`.
    pub fn weighted_sum(&self, config: &SensorConfiguration) -> Result<f64> {
        Error::check_dim(self.len(), config.len())?;
        Ok(active_sum(&self.weights, config))
    }

    pub fn predict(&self, config: &SensorConfiguration) -> Result<f64> {
        Error::check_dim(self.len(), config.len())?;
        Ok(predict_with(&self.anchors, &self.weights, config))
    }

    /// Prediction for a configuration whose active coefficients sum to `sum`.
    pub fn predict_from_sum(&self, sum: f64) -> f64 {
        (self.anchors.p0 + self.anchors.span() * sum).clamp(0.0, 1.0)
    }

    /// Error of this predictor on `dataset` under `metric`.
    pub fn validation_error(&self, dataset: &Dataset, metric: ValidationMetric) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyValidation);
        }
        Error::check_dim(self.len(), dataset.num_sites())?;
        Ok(error_with(&self.anchors, &self.weights, dataset, metric))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PredictorFile {
            p0: self.anchors.p0,
            p92: self.anchors.p92,
            weights: self.weights.clone(),
            layout_name: self.layout_name.clone(),
        })
        .expect("predictor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PredictorFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("predictor: {e}")))?;
        if file.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parse("predictor weights must be finite".into()));
        }
        Ok(TunedPredictor::new(
            PredictorAnchors::new(file.p0, file.p92)?,
            file.weights,
            file.layout_name,
        ))
    }

    /// Tuning log as `pass,site_id,delta,val_before,val_after`.
    pub fn tuning_log_csv(&self) -> String {
        let mut out = String::from("pass,site_id,delta,val_before,val_after\n");
        for s in &self.tuning_log {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.pass, s.site_id, s.delta, s.val_before, s.val_after
            ));
        }
        out
    }
}

fn active_sum(weights: &[f64], config: &SensorConfiguration) -> f64 {
    weights
        .iter()
        .zip(config.bits())
        .filter(|(_, &b)| b)
        .map(|(w, _)| w)
        .sum()
}

fn predict_with(anchors: &PredictorAnchors, weights: &[f64], config: &SensorConfiguration) -> f64 {
    (anchors.p0 + anchors.span() * active_sum(weights, config)).clamp(0.0, 1.0)
}

fn error_with(
    anchors: &PredictorAnchors,
    weights: &[f64],
    dataset: &Dataset,
    metric: ValidationMetric,
) -> f64 {
    metric.evaluate(
        dataset
            .records()
            .iter()
            .map(|r| predict_with(anchors, weights, &r.config) - r.success_rate),
    )
}

/// Initial coefficients `T = s * W / Σ|W|`. The scale `s` makes the
/// all-ones prediction match the mean success of all-ones records in
/// `train`; without such records (or when `Σ W` is zero) `s = 1`.
pub fn initialize(
    correlations: &CorrelationReport,
    anchors: PredictorAnchors,
    train: &Dataset,
) -> Result<TunedPredictor> {
    if anchors.p0 == anchors.p92 {
        return Err(Error::DegenerateAnchors(anchors.p0));
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let w = correlations.dense()?;
    Error::check_dim(train.num_sites(), w.len())?;

    let norm: f64 = w.iter().map(|v| v.abs()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroNormalizer);
    }
    let base: Vec<f64> = w.iter().map(|v| v / norm).collect();

    let full: Vec<f64> = train
        .records()
        .iter()
        .filter(|r| r.config.is_all_ones())
        .map(|r| r.success_rate)
        .collect();
    let base_sum: f64 = base.iter().sum();
    let scale = if full.is_empty() || base_sum == 0.0 {
        1.0
    } else {
        let target = full.iter().sum::<f64>() / full.len() as f64;
        (target - anchors.p0) / (anchors.span() * base_sum)
    };

    Ok(TunedPredictor::new(
        anchors,
        base.iter().map(|b| scale * b).collect(),
        train.layout().name.clone(),
    ))
}

/// Moves `weights[site]` by `delta` and takes `delta` back out of the other
/// coordinates, proportionally to their magnitudes.
pub fn normalized_update(weights: &[f64], site: usize, delta: f64) -> Vec<f64> {
    let mut out = weights.to_vec();
    let n = weights.len();
    if n < 2 {
        return out;
    }
    out[site] += delta;
    let others: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != site)
        .map(|(_, w)| w.abs())
        .sum();
    let uniform = weights
        .iter()
        .enumerate()
        .all(|(j, w)| j == site || w.abs() < COMPENSATION_FLOOR);
    for (j, w) in out.iter_mut().enumerate() {
        if j == site {
            continue;
        }
        let share = if uniform {
            1.0 / (n - 1) as f64
        } else {
            weights[j].abs() / others
        };
        *w -= delta * share;
    }
    out
}

/// Coordinate passes over sites in id order. For each site the step in the
/// direction of the regression slope's sign is tried first, then the
/// opposite one; the first strict improvement is kept. Stops after a pass
/// without improvement or after `max_passes`.
pub fn fine_tune(
    initial: &TunedPredictor,
    regression: &RegressionFit,
    validation: &Dataset,
    settings: &TuningSettings,
) -> Result<TunedPredictor> {
    settings.validate()?;
    if validation.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let n = initial.len();
    Error::check_dim(n, regression.coefficients.len())?;
    Error::check_dim(n, validation.num_sites())?;

    let anchors = initial.anchors;
    let metric = settings.validation_metric;
    let mut weights = initial.weights.clone();
    let mut err = error_with(&anchors, &weights, validation, metric);
    let mut log = initial.tuning_log.clone();

    for pass in 1..=settings.max_passes {
        let mut improved = false;
        for site in 0..n {
            let preferred = if regression.coefficients[site] < 0.0 {
                -settings.step_delta
            } else {
                settings.step_delta
            };
            for delta in [preferred, -preferred] {
                let candidate = normalized_update(&weights, site, delta);
                let cand_err = error_with(&anchors, &candidate, validation, metric);
                if cand_err < err {
                    log.push(TuningStep {
                        pass,
                        site_id: site,
                        delta,
                        val_before: err,
                        val_after: cand_err,
                    });
                    weights = candidate;
                    err = cand_err;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }

    Ok(TunedPredictor {
        anchors,
        weights,
        layout_name: initial.layout_name.clone(),
        tuning_log: log,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSite {
    pub site: SensorSite,
    pub weight: f64,
}

/// Sites by descending coefficient, ties by ascending id.
pub fn rank_sites(predictor: &TunedPredictor, layout: &SensorLayout) -> Result<Vec<RankedSite>> {
    Error::check_dim(layout.len(), predictor.len())?;
    let mut ranked: Vec<RankedSite> = layout
        .sites()
        .iter()
        .zip(&predictor.weights)
        .map(|(site, &weight)| RankedSite {
            site: site.clone(),
            weight,
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.site.id.cmp(&b.site.id))
    });
    Ok(ranked)
}
