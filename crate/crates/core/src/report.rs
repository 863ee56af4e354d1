//! Prediction-versus-ground-truth reports.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hybrid::TunedPredictor;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub config_id: String,
    pub ground_truth: f64,
    pub predicted: f64,
    pub relative_error_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub mean_error_percent: f64,
}

/// `|predicted - truth| / truth * 100`.
pub fn relative_error_percent(truth: f64, predicted: f64) -> f64 {
    (predicted - truth).abs() / truth * 100.0
}

impl ValidationReport {
    /// Report from `(config_id, ground_truth, predicted)` triples.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, f64, f64)>,
    ) -> Result<Self> {
        let rows = pairs
            .into_iter()
            .map(|(id, truth, predicted)| {
                let config_id = id.into();
                if truth <= 0.0 {
                    return Err(Error::ZeroGroundTruth(config_id));
                }
                Ok(ValidationRow {
                    relative_error_percent: relative_error_percent(truth, predicted),
                    config_id,
                    ground_truth: truth,
                    predicted,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Err(Error::EmptyValidation);
        }
        let mean_error_percent =
            rows.iter().map(|r| r.relative_error_percent).sum::<f64>() / rows.len() as f64;
        Ok(ValidationReport {
            rows,
            mean_error_percent,
        })
    }

    pub fn evaluate(predictor: &TunedPredictor, dataset: &Dataset) -> Result<Self> {
        Error::check_dim(predictor.len(), dataset.num_sites())?;
        let triples = dataset
            .records()
            .iter()
            .map(|r| {
                Ok((
                    r.config_id.clone(),
                    r.success_rate,
                    predictor.predict(&r.config)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_pairs(triples)
    }

    /// `config_id,ground_truth,predicted,relative_error_percent`, then a
    /// `mean` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config_id,ground_truth,predicted,relative_error_percent\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.config_id, r.ground_truth, r.predicted, r.relative_error_percent
            ));
        }
        out.push_str(&format!("mean,,,{}\n", self.mean_error_percent));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.config_id.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = format!(
            "{:<width$}  {:>8}  {:>9}  {:>9}\n",
            "config", "truth", "predicted", "error %"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<width$}  {:>8.3}  {:>9.3}  {:>9.2}\n",
                r.config_id, r.ground_truth, r.predicted, r.relative_error_percent
            ));
        }
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>9}  {:>9.2}\n",
            "mean", "", "", self.mean_error_percent
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_c1_row() {
        let report = ValidationReport::from_pairs([("C1", 0.339, 0.362)]).unwrap();
        let e = report.rows[0].relative_error_percent;
        assert!((e - 6.784661).abs() < 1e-5, "{e}");
    }

    #[test]
    fn exact_prediction_is_zero_error() {
        let report = ValidationReport::from_pairs([("x", 0.5, 0.5)]).unwrap();
        assert_eq!(report.mean_error_percent, 0.0);
    }

    #[test]
    fn egg_c1_row_near_printed_value() {
        let report = ValidationReport::from_pairs([("C1", 0.830, 0.831)]).unwrap();
        let e = report.rows[0].relative_error_percent;
        assert!((e - 0.12).abs() < 0.005);
        assert!((e - 0.08).abs() < 0.05);
    }

    #[test]
    fn zero_truth_is_rejected() {
        assert!(matches!(
            ValidationReport::from_pairs([("C9", 0.0, 0.1)]),
            Err(Error::ZeroGroundTruth(ref id)) if id == "C9"
        ));
    }

    #[test]
    fn csv_and_table_layout() {
        let report = ValidationReport::from_pairs([("a", 0.5, 0.55), ("b", 0.4, 0.4)]).unwrap();
        let csv = report.to_csv();
        assert!(
            csv.starts_with("config_id,ground_truth,predicted,relative_error_percent\na,0.5,0.55,")
        );
        assert!(csv
            .trim_end()
            .ends_with(&format!("mean,,,{}", report.mean_error_percent)));
        assert_eq!(report.to_table().lines().count(), 4);
    }
}
