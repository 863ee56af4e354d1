//! Feedforward baseline: `N -> 10 -> 10 -> 1` with ReLU hidden layers,
//! trained by full-batch gradient descent on mean squared error.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ExperimentRecord, SensorConfiguration};
use crate::error::{Error, Result};
use crate::rng;

pub const HIDDEN: usize = 10;

/// Central-difference step for [`gradient_check`].
pub const FD_STEP: f64 = 1e-5;
/// Pre-activations closer than this to zero count as sitting on a kink.
pub const KINK_TOLERANCE: f64 = 1e-6;
/// Absolute floor of the relative-error denominator.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct FnnModel {
    input_size: usize,
    /// `HIDDEN x input_size`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `HIDDEN x HIDDEN`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: f64,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    input_size: usize,
    seed: u64,
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
    w3: Vec<Vec<f64>>,
    b3: f64,
}

impl From<FnnModel> for ModelFile {
    fn from(m: FnnModel) -> Self {
        let rows = |w: &[f64], cols: usize| w.chunks(cols).map(<[f64]>::to_vec).collect();
        ModelFile {
            input_size: m.input_size,
            seed: m.seed,
            w1: rows(&m.w1, m.input_size),
            b1: m.b1,
            w2: rows(&m.w2, HIDDEN),
            b2: m.b2,
            w3: vec![m.w3],
            b3: m.b3,
        }
    }
}

impl TryFrom<ModelFile> for FnnModel {
    type Error = String;

    fn try_from(f: ModelFile) -> std::result::Result<Self, String> {
        let flat = |w: Vec<Vec<f64>>, rows: usize, cols: usize, name: &str| {
            if w.len() != rows || w.iter().any(|r| r.len() != cols) {
                return Err(format!("{name} must be {rows}x{cols}"));
            }
            Ok(w.into_iter().flatten().collect::<Vec<_>>())
        };
        let model = FnnModel {
            input_size: f.input_size,
            w1: flat(f.w1, HIDDEN, f.input_size, "w1")?,
            b1: f.b1,
            w2: flat(f.w2, HIDDEN, HIDDEN, "w2")?,
            b2: f.b2,
            w3: flat(f.w3, 1, HIDDEN, "w3")?,
            b3: f.b3,
            seed: f.seed,
        };
        if model.b1.len() != HIDDEN || model.b2.len() != HIDDEN {
            return Err("biases must have length 10".into());
        }
        if !model.is_finite() {
            return Err("parameters must be finite".into());
        }
        Ok(model)
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
struct Trace {
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    out: f64,
}

impl FnnModel {
    /// He-normal weights (variance `2 / fan_in`) from a seeded stream,
    /// zero biases.
    pub fn init(input_size: usize, seed: u64) -> Result<Self> {
        if input_size == 0 {
            return Err(Error::InvalidSetting("layout_size must be >= 1".into()));
        }
        let mut rng = rng::seeded(seed);
        let mut draw = |count: usize, fan_in: usize| {
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("valid std");
            (0..count)
                .map(|_| normal.sample(&mut rng))
                .collect::<Vec<f64>>()
        };
        Ok(FnnModel {
            input_size,
            w1: draw(HIDDEN * input_size, input_size),
            b1: vec![0.0; HIDDEN],
            w2: draw(HIDDEN * HIDDEN, HIDDEN),
            b2: vec![0.0; HIDDEN],
            w3: draw(HIDDEN, HIDDEN),
            b3: 0.0,
            seed,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn num_params(&self) -> usize {
        HIDDEN * self.input_size + HIDDEN + HIDDEN * HIDDEN + HIDDEN + HIDDEN + 1
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.is_finite())
    }

    /// All parameters in the order w1, b1, w2, b2, w3, b3.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        p.extend(&self.w1);
        p.extend(&self.b1);
        p.extend(&self.w2);
        p.extend(&self.b2);
        p.extend(&self.w3);
        p.push(self.b3);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.num_params());
        let mut rest = p;
        for target in [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.w3,
        ] {
            let (head, tail) = rest.split_at(target.len());
            target.copy_from_slice(head);
            rest = tail;
        }
        self.b3 = rest[0];
    }

    /// Layer a flat parameter index belongs to: 0 (w1, b1), 1 (w2, b2) or 2.
    fn param_layer(&self, k: usize) -> usize {
        let l1 = HIDDEN * self.input_size + HIDDEN;
        let l2 = l1 + HIDDEN * HIDDEN + HIDDEN;
        if k < l1 {
            0
        } else if k < l2 {
            1
        } else {
            2
        }
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let n = self.input_size;
        let z1: Vec<f64> = (0..HIDDEN)
            .map(|h| self.b1[h] + (0..n).map(|i| self.w1[h * n + i] * x[i]).sum::<f64>())
            .collect();
        let a1: Vec<f64> = z1.iter().map(|&z| z.max(0.0)).collect();
        let z2: Vec<f64> = (0..HIDDEN)
            .map(|h| {
                self.b2[h]
                    + (0..HIDDEN)
                        .map(|i| self.w2[h * HIDDEN + i] * a1[i])
                        .sum::<f64>()
            })
            .collect();
        let a2: Vec<f64> = z2.iter().map(|&z| z.max(0.0)).collect();
        let out = self.b3 + self.w3.iter().zip(&a2).map(|(w, a)| w * a).sum::<f64>();
        Trace {
            z1,
            a1,
            z2,
            a2,
            out,
        }
    }

    pub fn forward(&self, config: &SensorConfiguration) -> Result<f64> {
        Error::check_dim(self.input_size, config.len())?;
        Ok(self.trace(&config.as_f64()).out)
    }

    /// Mean squared error over `dataset`.
    pub fn mse(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Error::check_dim(self.input_size, dataset.num_sites())?;
        Ok(self.loss_and_grad(dataset.records(), false).0)
    }

    /// Mean squared error over `records` and, optionally, its gradient in
    /// [`FnnModel::params`] order.
    fn loss_and_grad(&self, records: &[ExperimentRecord], with_grad: bool) -> (f64, Vec<f64>) {
        let n = self.input_size;
        let m = records.len() as f64;
        let mut loss = 0.0;
        let mut g = if with_grad {
            vec![0.0; self.num_params()]
        } else {
            Vec::new()
        };
        let (o_b1, o_w2) = (HIDDEN * n, HIDDEN * n + HIDDEN);
        let (o_b2, o_w3) = (o_w2 + HIDDEN * HIDDEN, o_w2 + HIDDEN * HIDDEN + HIDDEN);
        let o_b3 = o_w3 + HIDDEN;

        for r in records {
            let x = r.config.as_f64();
            let t = self.trace(&x);
            let err = t.out - r.success_rate;
            loss += err * err / m;
            if !with_grad {
                continue;
            }
            let d_out = 2.0 * err / m;
            g[o_b3] += d_out;
            let mut dz2 = [0.0; HIDDEN];
            for h in 0..HIDDEN {
                g[o_w3 + h] += d_out * t.a2[h];
                dz2[h] = if t.z2[h] > 0.0 {
                    d_out * self.w3[h]
                } else {
                    0.0
                };
            }
            let mut dz1 = [0.0; HIDDEN];
            for h in 0..HIDDEN {
                g[o_b2 + h] += dz2[h];
                for i in 0..HIDDEN {
                    g[o_w2 + h * HIDDEN + i] += dz2[h] * t.a1[i];
                }
            }
            for (i, d) in dz1.iter_mut().enumerate() {
                let back: f64 = (0..HIDDEN).map(|h| self.w2[h * HIDDEN + i] * dz2[h]).sum();
                *d = if t.z1[i] > 0.0 { back } else { 0.0 };
            }
            for h in 0..HIDDEN {
                g[o_b1 + h] += dz1[h];
                for i in 0..n {
                    g[h * n + i] += dz1[h] * x[i];
                }
            }
        }
        (loss, g)
    }

    /// Analytic gradient of the mean squared error over `records`.
    pub fn gradient(&self, records: &[ExperimentRecord]) -> Vec<f64> {
        self.loss_and_grad(records, true).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            learning_rate: 0.01,
            epochs: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: FnnModel,
    /// Training MSE before each epoch's update.
    pub loss_trace: Vec<f64>,
    pub final_mse: f64,
}

impl TrainReport {
    /// Loss trace as `epoch,mse`.
    pub fn loss_csv(&self) -> String {
        let mut out = String::from("epoch,mse\n");
        for (e, l) in self.loss_trace.iter().enumerate() {
            out.push_str(&format!("{e},{l}\n"));
        }
        out
    }
}

pub fn train(model: &FnnModel, data: &Dataset, settings: &TrainSettings) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(settings.learning_rate > 0.0 && settings.learning_rate.is_finite()) {
        return Err(Error::InvalidSetting(format!(
            "learning_rate {} must be > 0",
            settings.learning_rate
        )));
    }
    if settings.epochs == 0 {
        return Err(Error::InvalidSetting("epochs must be >= 1".into()));
    }
    Error::check_dim(model.input_size, data.num_sites())?;

    let mut model = model.clone();
    let mut params = model.params();
    let mut loss_trace = Vec::with_capacity(settings.epochs);
    for epoch in 0..settings.epochs {
        let (loss, grad) = model.loss_and_grad(data.records(), true);
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        loss_trace.push(loss);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= settings.learning_rate * g;
        }
        model.set_params(&params);
    }
    let final_mse = model.loss_and_grad(data.records(), false).0;
    if !final_mse.is_finite() || !model.is_finite() {
        return Err(Error::Divergence {
            epoch: settings.epochs,
        });
    }
    Ok(TrainReport {
        model,
        loss_trace,
        final_mse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub checked: usize,
    pub excluded: usize,
}

/// Sign pattern of both hidden layers: 1 active, -1 inactive, 0 on a kink.
fn activation_pattern(model: &FnnModel, x: &[f64]) -> (Vec<i8>, Vec<i8>) {
    let t = model.trace(x);
    let classify = |z: &[f64]| {
        z.iter()
            .map(|&v| {
                if v.abs() < KINK_TOLERANCE {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect::<Vec<i8>>()
    };
    (classify(&t.z1), classify(&t.z2))
}

/// Compares the analytic gradient of the squared error on `record` with
/// central finite differences. Parameters whose ±`FD_STEP` perturbation
/// changes, or starts on, a downstream ReLU kink are left out.
pub fn gradient_check(model: &FnnModel, record: &ExperimentRecord) -> Result<GradientCheck> {
    Error::check_dim(model.input_size, record.config.len())?;
    let records = std::slice::from_ref(record);
    let x = record.config.as_f64();
    let analytic = model.gradient(records);
    let base_pattern = activation_pattern(model, &x);
    let base_params = model.params();

    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    let (mut checked, mut excluded) = (0, 0);
    for k in 0..base_params.len() {
        let layer = model.param_layer(k);
        let mut eval = |offset: f64| {
            let mut p = base_params.clone();
            p[k] += offset;
            probe.set_params(&p);
            let pattern = activation_pattern(&probe, &x);
            (probe.loss_and_grad(records, false).0, pattern)
        };
        let (plus, pat_plus) = eval(FD_STEP);
        let (minus, pat_minus) = eval(-FD_STEP);

        let touches_kink = |pat: &(Vec<i8>, Vec<i8>)| {
            (layer == 0 && pat.0.contains(&0)) || (layer <= 1 && pat.1.contains(&0))
        };
        let moved = |pat: &(Vec<i8>, Vec<i8>)| {
            (layer == 0 && pat.0 != base_pattern.0) || (layer <= 1 && pat.1 != base_pattern.1)
        };
        if touches_kink(&base_pattern) || moved(&pat_plus) || moved(&pat_minus) {
            excluded += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let a = analytic[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
        worst = worst.max(rel);
        checked += 1;
    }
    Ok(GradientCheck {
        max_relative_error: worst,
        checked,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::SensorLayout;

    fn record(bits: &str, y: f64) -> ExperimentRecord {
        ExperimentRecord::new("r", bits.parse().unwrap(), "t", y).unwrap()
    }

    fn single(bits: &str, y: f64) -> Dataset {
        Dataset::new(
            SensorLayout::generic(bits.len()).unwrap(),
            vec![record(bits, y)],
        )
        .unwrap()
    }

    fn zeroed(n: usize) -> FnnModel {
        let mut m = FnnModel::init(n, 0).unwrap();
        let zeros = vec![0.0; m.num_params()];
        m.set_params(&zeros);
        m
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = FnnModel::init(21, 7).unwrap();
        assert_eq!(a, FnnModel::init(21, 7).unwrap());
        assert_ne!(a.w1, FnnModel::init(21, 8).unwrap().w1);
        assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0) && a.b3 == 0.0);
        assert!(FnnModel::init(0, 1).is_err());
    }

    #[test]
    fn zero_input_gives_output_bias() {
        let m = FnnModel::init(21, 3).unwrap();
        assert_eq!(m.forward(&SensorConfiguration::zeros(21)).unwrap(), 0.0);
    }

    #[test]
    fn hand_composed_forward() {
        // Unit 0 of each layer carries the signal; everything else is zero.
        let mut m = zeroed(1);
        m.w1[0] = 2.0;
        m.b1[0] = 0.5;
        m.w2[0] = 3.0;
        m.b2[0] = -1.0;
        m.w3[0] = 0.25;
        m.b3 = 0.1;
        // relu(2*1 + 0.5) = 2.5; relu(3*2.5 - 1) = 6.5; 0.25*6.5 + 0.1 = 1.725
        let y = m.forward(&"1".parse().unwrap()).unwrap();
        assert!((y - 1.725).abs() < 1e-12);
        // x = 0: relu(0.5) = 0.5; relu(1.5 - 1) = 0.5; 0.125 + 0.1
        let y0 = m.forward(&"0".parse().unwrap()).unwrap();
        assert!((y0 - 0.225).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_or_dead_units_give_b3() {
        let mut m = zeroed(3);
        m.b3 = 0.42;
        assert_eq!(m.forward(&"101".parse().unwrap()).unwrap(), 0.42);

        let mut dead = FnnModel::init(3, 5).unwrap();
        dead.w1.iter_mut().for_each(|w| *w = -w.abs());
        dead.b1.iter_mut().for_each(|b| *b = -1.0);
        dead.b2.iter_mut().for_each(|b| *b = -1.0);
        dead.b3 = -0.3;
        assert_eq!(dead.forward(&"111".parse().unwrap()).unwrap(), -0.3);
    }

    #[test]
    fn forward_checks_dimension() {
        let m = FnnModel::init(3, 1).unwrap();
        assert!(matches!(
            m.forward(&"11".parse().unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn memorizes_single_record() {
        let data = single("1011010", 0.37);
        let m = FnnModel::init(7, 11).unwrap();
        let report = train(&m, &data, &TrainSettings::default()).unwrap();
        assert!(report.final_mse < 1e-6, "mse {}", report.final_mse);
        assert_eq!(report.loss_trace.len(), 5000);
        assert!(report.loss_csv().starts_with("epoch,mse\n0,"));
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let layout = SensorLayout::builtin_shadow21();
        let configs = crate::dataset::random_configurations(&layout, 8, 2);
        let records = configs
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                ExperimentRecord::new(format!("r{i}"), c, "t", 0.1 * (i % 7) as f64).unwrap()
            })
            .collect();
        let data = Dataset::new(layout, records).unwrap();
        let m = FnnModel::init(21, 1).unwrap();
        let settings = TrainSettings {
            learning_rate: 1e6,
            epochs: 200,
        };
        assert!(matches!(
            train(&m, &data, &settings),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let data = single("110", 0.5);
        let m = FnnModel::init(3, 4).unwrap();
        let s = TrainSettings {
            learning_rate: 0.01,
            epochs: 50,
        };
        assert_eq!(
            train(&m, &data, &s).unwrap().model,
            train(&m, &data, &s).unwrap().model
        );
    }

    #[test]
    fn gradient_check_random_model() {
        let m = FnnModel::init(21, 9).unwrap();
        let rec =
            ExperimentRecord::new("r", "101101011010110101101".parse().unwrap(), "t", 0.3).unwrap();
        let check = gradient_check(&m, &rec).unwrap();
        assert!(check.max_relative_error < 1e-4, "{check:?}");
        assert!(check.checked > 0);
    }

    #[test]
    fn gradient_check_at_perfect_prediction() {
        let m = FnnModel::init(5, 2).unwrap();
        let config: SensorConfiguration = "11010".parse().unwrap();
        let y = m.forward(&config).unwrap();
        if (0.0..=1.0).contains(&y) {
            let rec = ExperimentRecord::new("r", config, "t", y).unwrap();
            assert!(m
                .gradient(std::slice::from_ref(&rec))
                .iter()
                .all(|g| g.abs() < 1e-12));
            assert!(gradient_check(&m, &rec).unwrap().max_relative_error < 1e-4);
        }
    }

    #[test]
    fn kink_parameters_are_excluded() {
        let mut m = FnnModel::init(2, 6).unwrap();
        // Put hidden unit 0 of layer 1 exactly on its kink for x = [1, 1].
        m.b1[0] = -(m.w1[0] + m.w1[1]);
        let rec = record("11", 0.4);
        let check = gradient_check(&m, &rec).unwrap();
        // Every first-layer parameter feeds the kink; later layers do not.
        assert_eq!(check.excluded, HIDDEN * 2 + HIDDEN);
        assert_eq!(check.checked, m.num_params() - check.excluded);
        assert!(check.max_relative_error < 1e-4);
    }

    #[test]
    fn json_is_row_major() {
        let m = FnnModel::init(3, 1).unwrap();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["w1"].as_array().unwrap().len(), HIDDEN);
        assert_eq!(v["w1"][0].as_array().unwrap().len(), 3);
        assert_eq!(v["w1"][1][2], m.w1[5]);
        let back: FnnModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
