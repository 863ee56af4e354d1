//! correlation → OLS → initialize → fine-tune, in one call.

use crate::correlation::{pearson_weights, CorrelationReport};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::hybrid::{fine_tune, initialize, PredictorAnchors, TunedPredictor, TuningSettings};
use crate::regression::{fit_ridge, RegressionFit};

/// What to do with sites whose presence never varies in the training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndefinedPolicy {
    /// Start those sites at zero weight and let fine-tuning move them.
    #[default]
    Zero,
    /// Refuse to initialize.
    Error,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineOptions {
    pub tuning: TuningSettings,
    pub ridge: f64,
    pub undefined: UndefinedPolicy,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub correlations: CorrelationReport,
    pub regression: RegressionFit,
    pub initial: TunedPredictor,
    pub tuned: TunedPredictor,
    pub initial_validation_error: f64,
    pub tuned_validation_error: f64,
}

pub fn fit_hybrid(
    train: &Dataset,
    validation: &Dataset,
    anchors: PredictorAnchors,
    options: &PipelineOptions,
) -> Result<PipelineOutcome> {
    options.tuning.validate()?;
    let correlations = pearson_weights(train)?;
    let regression = fit_ridge(train, options.ridge)?;
    let usable = match options.undefined {
        UndefinedPolicy::Zero => correlations.with_undefined_as_zero(),
        UndefinedPolicy::Error => correlations.clone(),
    };
    let initial = initialize(&usable, anchors, train)?;
    let tuned = fine_tune(&initial, &regression, validation, &options.tuning)?;
    let metric = options.tuning.validation_metric;
    Ok(PipelineOutcome {
        initial_validation_error: initial.validation_error(validation, metric)?,
        tuned_validation_error: tuned.validation_error(validation, metric)?,
        correlations,
        regression,
        initial,
        tuned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::layout::SensorLayout;
    use crate::synthetic::{generate_dataset, HiddenModel};

    #[test]
    fn tuning_never_worsens_validation() {
        let layout = SensorLayout::builtin_shadow21();
        let anchors = PredictorAnchors::new(0.28, 0.392).unwrap();
        let hidden = HiddenModel::random_positive(anchors, 21, 0.005, 2);
        let data = generate_dataset(&hidden, &layout, 80, 3).unwrap();
        let (train, val) = data.split(0.25, 1).unwrap();
        let out = fit_hybrid(&train, &val, anchors, &PipelineOptions::default()).unwrap();
        assert!(out.tuned_validation_error <= out.initial_validation_error);
        assert!((out.tuned.weight_sum() - out.initial.weight_sum()).abs() < 1e-9);
    }

    #[test]
    fn strict_policy_surfaces_undefined_sites() {
        let layout = SensorLayout::generic(3).unwrap();
        let text =
            "config_id,task,success_rate,s0,s1,s2\nA,t,0.3,1,1,0\nB,t,0.35,1,0,1\nC,t,0.32,1,1,1\n";
        let data = Dataset::from_csv(text, &layout).unwrap();
        let anchors = PredictorAnchors::new(0.28, 0.392).unwrap();
        let strict = PipelineOptions {
            undefined: UndefinedPolicy::Error,
            ..PipelineOptions::default()
        };
        assert!(matches!(
            fit_hybrid(&data, &data, anchors, &strict),
            Err(Error::UndefinedWeights(ref s)) if s == &[0]
        ));
        let out = fit_hybrid(&data, &data, anchors, &PipelineOptions::default()).unwrap();
        assert_eq!(out.correlations.undefined_sites, vec![0]);
    }
}
