//! Ordinary least squares from configurations to success rate.
//!
//! The intercept is left unpenalized: columns and target are centered, the
//! slope vector is the minimum-norm least-squares solution of the centered
//! system (one-sided Jacobi SVD), and the intercept restores the means.
//! Constant targets therefore give `intercept = c` and zero slopes even when
//! the design is rank deficient.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SensorConfiguration};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub training_rmse: f64,
    pub rank_deficient: bool,
}

impl RegressionFit {
    /// `intercept + Σ coefficients[n] * x[n]`, unclamped.
    pub fn predict(&self, config: &SensorConfiguration) -> Result<f64> {
        Error::check_dim(self.coefficients.len(), config.len())?;
        Ok(self.intercept
            + self
                .coefficients
                .iter()
                .zip(config.bits())
                .filter(|(_, &b)| b)
                .map(|(c, _)| c)
                .sum::<f64>())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

pub fn fit_ols(dataset: &Dataset) -> Result<RegressionFit> {
    fit_ridge(dataset, 0.0)
}

/// Least squares with an L2 penalty `lambda * |β|²` on the slopes
/// (`lambda = 0` is plain minimum-norm OLS).
pub fn fit_ridge(dataset: &Dataset, lambda: f64) -> Result<RegressionFit> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::TooFewRecords { needed: 2, have: n });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidSetting(format!(
            "ridge lambda {lambda} must be >= 0"
        )));
    }
    let p = dataset.num_sites();
    let y = dataset.targets();
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let x: Vec<Vec<f64>> = (0..p).map(|c| dataset.column(c)).collect();
    let x_mean: Vec<f64> = x
        .iter()
        .map(|col| col.iter().sum::<f64>() / n as f64)
        .collect();

    let centered = x
        .iter()
        .zip(&x_mean)
        .map(|(col, m)| col.iter().map(|v| v - m).collect())
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let (coefficients, rank) = solve_centered(centered, &yc, lambda);

    let intercept = y_mean
        - x_mean
            .iter()
            .zip(&coefficients)
            .map(|(m, b)| m * b)
            .sum::<f64>();

    let mut fit = RegressionFit {
        intercept,
        coefficients,
        training_rmse: 0.0,
        // Rank of [1 | X] is 1 + rank of the centered X.
        rank_deficient: rank < p,
    };
    let sse: f64 = dataset
        .records()
        .iter()
        .map(|r| {
            let e = fit.predict(&r.config).expect("dimensions checked") - r.success_rate;
            e * e
        })
        .sum();
    fit.training_rmse = (sse / n as f64).sqrt();
    Ok(fit)
}

/// Minimum-norm (optionally ridge) solution of `xc * β ≈ yc` and the
/// numerical rank of `xc`, with `xc` given as columns.
fn solve_centered(mut columns: Vec<Vec<f64>>, yc: &[f64], lambda: f64) -> (Vec<f64>, usize) {
    let rows = yc.len();
    let cols = columns.len();
    let v = jacobi_svd(&mut columns);

    let sigma: Vec<f64> = columns.iter().map(|c| dot(c, c).sqrt()).collect();
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let tol = rows.max(cols) as f64 * f64::EPSILON * sigma_max;

    let mut beta = vec![0.0; cols];
    let mut rank = 0;
    for ((a, &s), vk) in columns.iter().zip(&sigma).zip(&v) {
        if s > tol {
            rank += 1;
            // With u = a / s: s / (s² + λ) * (uᵀy) = (aᵀy) / (s² + λ).
            let coef = dot(a, yc) / (s * s + lambda);
            beta.iter_mut().zip(vk).for_each(|(b, vi)| *b += coef * vi);
        }
    }
    (beta, rank)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MAX_SWEEPS: usize = 100;

/// One-sided Jacobi SVD. Rotates `columns` in place until they are
/// mutually orthogonal (`A V = U Σ`) and returns the columns of `V`.
fn jacobi_svd(columns: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    let n = columns.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&columns[p], &columns[p]);
                let beta = dot(&columns[q], &columns[q]);
                let gamma = dot(&columns[p], &columns[q]);
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(columns, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

fn rotate(columns: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = columns.split_at_mut(q);
    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}
