//! Predict manipulation success rates from binary tactile-sensor layouts.
//!
//! The pipeline runs over a fixed [`SensorLayout`] (by default the 21-site
//! hand of [`SensorLayout::builtin_shadow21`]):
//!
//! 1. [`correlation::pearson_weights`] scores each site by the Pearson
//!    correlation between its presence and the measured success rate.
//! 2. [`regression::fit_ols`] fits a plain linear model to the same data.
//! 3. [`hybrid::initialize`] turns the correlations into anchored
//!    coefficients and [`hybrid::fine_tune`] refines them on validation data
//!    with sum-preserving coordinate steps guided by the regression signs.
//!
//! The tuned predictor then drives [`search`] (budgeted and Pareto layout
//! search) and [`noise`] (bit-flip robustness). [`fnn`] is a small neural
//! baseline and [`synthetic`] generates data from known ground truth.
//!
//! ```
//! use tactile_placement::prelude::*;
//!
//! let layout = SensorLayout::builtin_shadow21();
//! let anchors = PredictorAnchors::new(0.28, 0.392).unwrap();
//! let hidden = HiddenModel::random_positive(anchors, layout.len(), 0.0, 1);
//! let data = generate_dataset(&hidden, &layout, 120, 2).unwrap();
//! let (train, validation) = data.split(0.2, 3).unwrap();
//!
//! let fitted = fit_hybrid(&train, &validation, anchors, &PipelineOptions::default()).unwrap();
//! let top = rank_sites(&fitted.tuned, &layout).unwrap();
//! assert_eq!(top.len(), 21);
//! ```

pub mod cli;
pub mod correlation;
pub mod dataset;
pub mod error;
pub mod fnn;
pub mod hybrid;
pub mod layout;
pub mod noise;
pub mod pipeline;
pub mod regression;
pub mod report;
pub mod rng;
pub mod search;
pub mod synthetic;

pub use dataset::{Dataset, ExperimentRecord, SensorConfiguration};
pub use error::{Error, Result};
pub use hybrid::{PredictorAnchors, TunedPredictor, TuningSettings};
pub use layout::{SensorLayout, SensorSite};

pub mod prelude {
    pub use crate::correlation::{pearson_weights, CorrelationReport};
    pub use crate::dataset::{
        random_configurations, Dataset, ExperimentRecord, SensorConfiguration,
    };
    pub use crate::error::{Error, Result};
    pub use crate::fnn::{gradient_check, train, FnnModel, TrainSettings};
    pub use crate::hybrid::{
        fine_tune, initialize, normalized_update, rank_sites, PredictorAnchors, TunedPredictor,
        TuningSettings, ValidationMetric,
    };
    pub use crate::layout::{Finger, Region, SensorLayout, SensorSite};
    pub use crate::noise::{expected_under_flips, monte_carlo_flips, noise_sweep, NoiseLevel};
    pub use crate::pipeline::{fit_hybrid, PipelineOptions, UndefinedPolicy};
    pub use crate::regression::{fit_ols, fit_ridge, RegressionFit};
    pub use crate::report::ValidationReport;
    pub use crate::search::{
        best_k_subset, exhaustive_search, pareto_frontier, ParetoFrontier, SearchResult,
    };
    pub use crate::synthetic::{generate_dataset, HiddenModel};
}
