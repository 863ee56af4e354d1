//! Sensor configurations, experiment records and ablation datasets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::SensorLayout;
use crate::rng;

/// Binary presence vector over the sites of a layout (`true` = installed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorConfiguration(Vec<bool>);

impl SensorConfiguration {
    pub fn new(bits: Vec<bool>) -> Self {
        SensorConfiguration(bits)
    }

    pub fn zeros(n: usize) -> Self {
        SensorConfiguration(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        SensorConfiguration(vec![true; n])
    }

    /// Configuration with exactly the listed sites present.
    pub fn from_sites(n: usize, present: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; n];
        for i in present {
            bits[i] = true;
        }
        SensorConfiguration(bits)
    }

    /// Low `n` bits of `mask`, site `i` at bit `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        SensorConfiguration((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_all_ones(&self) -> bool {
        self.0.iter().all(|&b| b)
    }

    /// Entries as 0.0 / 1.0.
    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// Element-wise OR.
    pub fn union(&self, other: &SensorConfiguration) -> Result<SensorConfiguration> {
        Error::check_dim(self.len(), other.len())?;
        Ok(SensorConfiguration(
            self.0.iter().zip(&other.0).map(|(&a, &b)| a || b).collect(),
        ))
    }
}

impl fmt::Display for SensorConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SensorConfiguration {
    type Err = Error;

    /// Parses a `0`/`1` string in site order.
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SensorConfiguration)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub config_id: String,
    pub config: SensorConfiguration,
    pub task: String,
    pub success_rate: f64,
}

impl ExperimentRecord {
    pub fn new(
        config_id: impl Into<String>,
        config: SensorConfiguration,
        task: impl Into<String>,
        success_rate: f64,
    ) -> Result<Self> {
        let config_id = config_id.into();
        if !(0.0..=1.0).contains(&success_rate) {
            return Err(Error::Range(format!(
                "success_rate {success_rate} of {config_id} outside [0, 1]"
            )));
        }
        Ok(ExperimentRecord {
            config_id,
            config,
            task: task.into(),
            success_rate,
        })
    }
}

/// Records over one layout. Always holds at least one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    layout: SensorLayout,
    records: Vec<ExperimentRecord>,
}

impl Dataset {
    pub fn new(layout: SensorLayout, records: Vec<ExperimentRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for r in &records {
            Error::check_dim(layout.len(), r.config.len())?;
            if !(0.0..=1.0).contains(&r.success_rate) {
                return Err(Error::Range(format!(
                    "success_rate {} of {} outside [0, 1]",
                    r.success_rate, r.config_id
                )));
            }
        }
        Ok(Dataset { layout, records })
    }

    pub fn layout(&self) -> &SensorLayout {
        &self.layout
    }

    pub fn records(&self) -> &[ExperimentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_sites(&self) -> usize {
        self.layout.len()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.success_rate).collect()
    }

    /// Values of site `site` across records, as 0.0 / 1.0.
    pub fn column(&self, site: usize) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| if r.config.bits()[site] { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn load(path: impl AsRef<Path>, layout: &SensorLayout) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, layout)
    }

    /// Parses `config_id,task,success_rate,s0,...,s{N-1}`.
    pub fn from_csv(text: &str, layout: &SensorLayout) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(format!("dataset header: {e}")))?
            .clone();
        if headers.len() < 3
            || &headers[0] != "config_id"
            || &headers[1] != "task"
            || &headers[2] != "success_rate"
        {
            return Err(Error::Parse(
                "dataset header must start with config_id,task,success_rate".into(),
            ));
        }
        let bit_cols = headers.len() - 3;
        for (i, h) in headers.iter().skip(3).enumerate() {
            if h != format!("s{i}") {
                return Err(Error::Parse(format!("expected column s{i}, found {h:?}")));
            }
        }
        Error::check_dim(layout.len(), bit_cols)?;

        let mut records = Vec::new();
        for (line, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::Parse(format!("dataset row {}: {e}", line + 1)))?;
            if row.len() != headers.len() {
                return Err(Error::Parse(format!(
                    "dataset row {} has {} fields, expected {}",
                    line + 1,
                    row.len(),
                    headers.len()
                )));
            }
            let success_rate: f64 = row[2].trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "dataset row {}: bad success_rate {:?}",
                    line + 1,
                    &row[2]
                ))
            })?;
            let bits = row
                .iter()
                .skip(3)
                .map(|f| match f.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Parse(format!(
                        "dataset row {}: bit must be 0 or 1, got {other:?}",
                        line + 1
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(ExperimentRecord::new(
                &row[0],
                SensorConfiguration::new(bits),
                &row[1],
                success_rate,
            )?);
        }
        if records.is_empty() {
            return Err(Error::Parse("dataset has no records".into()));
        }
        Dataset::new(layout.clone(), records)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("config_id,task,success_rate");
        for i in 0..self.num_sites() {
            out.push_str(&format!(",s{i}"));
        }
        out.push('\n');
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for r in &self.records {
            let mut row = vec![
                r.config_id.clone(),
                r.task.clone(),
                format!("{}", r.success_rate),
            ];
            row.extend(
                r.config
                    .bits()
                    .iter()
                    .map(|&b| if b { "1" } else { "0" }.to_string()),
            );
            writer.write_record(&row).expect("in-memory csv write");
        }
        let body = writer.into_inner().expect("in-memory csv flush");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 csv"));
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Deterministic shuffled split into `(train, validation)`. The
    /// validation part holds `max(1, round(fraction * n))` records; both
    /// parts keep the original relative record order.
    pub fn split(&self, validation_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooFewRecords { needed: 2, have: n });
        }
        if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
            return Err(Error::InvalidSetting(format!(
                "validation_fraction {validation_fraction} not in (0, 1)"
            )));
        }
        let n_val = ((validation_fraction * n as f64).round() as usize).clamp(1, n - 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::seeded(seed));
        let mut val_idx = order[..n_val].to_vec();
        let mut train_idx = order[n_val..].to_vec();
        val_idx.sort_unstable();
        train_idx.sort_unstable();
        let pick = |idx: &[usize]| {
            Dataset::new(
                self.layout.clone(),
                idx.iter().map(|&i| self.records[i].clone()).collect(),
            )
        };
        Ok((pick(&train_idx)?, pick(&val_idx)?))
    }
}

/// `count` configurations with every bit an independent fair coin flip.
pub fn random_configurations(
    layout: &SensorLayout,
    count: usize,
    seed: u64,
) -> Vec<SensorConfiguration> {
    let mut rng = rng::seeded(seed);
    (0..count)
        .map(|_| random_configuration(layout.len(), &mut rng))
        .collect()
}

pub(crate) fn random_configuration(n: usize, rng: &mut rng::Rng) -> SensorConfiguration {
    SensorConfiguration((0..n).map(|_| rng.random::<bool>()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dataset(n: usize) -> Dataset {
        let layout = SensorLayout::builtin_shadow21();
        let configs = random_configurations(&layout, n, 3);
        let records = configs
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                ExperimentRecord::new(format!("B_{i}"), c, "block", 0.3 + 0.001 * i as f64).unwrap()
            })
            .collect();
        Dataset::new(layout, records).unwrap()
    }

    #[test]
    fn csv_round_trip_preserves_rows() {
        let ds = small_dataset(15);
        let back = Dataset::from_csv(&ds.to_csv(), ds.layout()).unwrap();
        assert_eq!(back.len(), 15);
        assert_eq!(back, ds);
    }

    #[test]
    fn out_of_range_success_is_range_error() {
        let text = "config_id,task,success_rate,s0,s1\nA,block,1.2,1,0\n";
        let layout = two_site_layout();
        assert!(matches!(
            Dataset::from_csv(text, &layout),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn empty_file_is_parse_error() {
        let layout = two_site_layout();
        assert!(matches!(
            Dataset::from_csv("", &layout),
            Err(Error::Parse(_))
        ));
        let header_only = "config_id,task,success_rate,s0,s1\n";
        assert!(matches!(
            Dataset::from_csv(header_only, &layout),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn wrong_bit_count_is_dimension_mismatch() {
        let text = "config_id,task,success_rate,s0,s1,s2\nA,block,0.2,1,0,1\n";
        assert!(matches!(
            Dataset::from_csv(text, &two_site_layout()),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        ));
    }

    #[test]
    fn bad_bit_is_parse_error() {
        let text = "config_id,task,success_rate,s0,s1\nA,block,0.2,1,2\n";
        assert!(matches!(
            Dataset::from_csv(text, &two_site_layout()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = small_dataset(15);
        let (train, val) = ds.split(0.2, 7).unwrap();
        assert_eq!((train.len(), val.len()), (12, 3));
        let ids = |d: &Dataset| {
            d.records()
                .iter()
                .map(|r| r.config_id.clone())
                .collect::<Vec<_>>()
        };
        let (train2, val2) = ds.split(0.2, 7).unwrap();
        assert_eq!(ids(&train), ids(&train2));
        assert_eq!(ids(&val), ids(&val2));
        for id in ids(&val) {
            assert!(!ids(&train).contains(&id));
        }
    }

    #[test]
    fn split_needs_two_records() {
        let ds = small_dataset(1);
        assert!(matches!(ds.split(0.5, 1), Err(Error::TooFewRecords { .. })));
    }

    #[test]
    fn random_configurations_are_reproducible() {
        let layout = SensorLayout::builtin_shadow21();
        let a = random_configurations(&layout, 5, 11);
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|c| c.len() == 21));
        assert_eq!(a, random_configurations(&layout, 5, 11));
        assert_eq!(random_configurations(&layout, 1, 0)[0].len(), 21);
    }

    #[test]
    fn bit_string_parse_and_display() {
        let c: SensorConfiguration = "0110".parse().unwrap();
        assert_eq!(c.bits(), &[false, true, true, false]);
        assert_eq!(c.to_string(), "0110");
        assert!("01x".parse::<SensorConfiguration>().is_err());
    }

    fn two_site_layout() -> SensorLayout {
        use crate::layout::{Finger, Region, SensorSite};
        SensorLayout::new(
            "two",
            vec![
                SensorSite {
                    id: 0,
                    name: "a".into(),
                    finger: Finger::Thumb,
                    region: Region::K1,
                    cost: 1.0,
                },
                SensorSite {
                    id: 1,
                    name: "b".into(),
                    finger: Finger::Thumb,
                    region: Region::K2,
                    cost: 1.0,
                },
            ],
        )
        .unwrap()
    }
}
