//! Sensor-site universe: names, anatomical groups and per-site costs.
//!
//! A [`SensorLayout`] fixes the bit order of every [`SensorConfiguration`]
//! built over it. Layouts are immutable once constructed.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::SensorConfiguration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
    Palm,
}

impl Finger {
    pub const DIGITS: [Finger; 5] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Little,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Finger::Thumb => "thumb",
            Finger::Index => "index",
            Finger::Middle => "middle",
            Finger::Ring => "ring",
            Finger::Little => "little",
            Finger::Palm => "palm",
        }
    }
}

impl fmt::Display for Finger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    K1,
    K2,
    K3,
    #[serde(rename = "fingertip")]
    Fingertip,
    #[serde(rename = "palm")]
    Palm,
}

impl Region {
    pub const DIGIT_REGIONS: [Region; 4] = [Region::K1, Region::K2, Region::K3, Region::Fingertip];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::K1 => "K1",
            Region::K2 => "K2",
            Region::K3 => "K3",
            Region::Fingertip => "fingertip",
            Region::Palm => "palm",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSite {
    pub id: usize,
    pub name: String,
    pub finger: Finger,
    pub region: Region,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct SensorLayout {
    pub name: String,
    sites: Vec<SensorSite>,
}

#[derive(Deserialize)]
struct RawLayout {
    name: String,
    sites: Vec<SensorSite>,
}

impl TryFrom<RawLayout> for SensorLayout {
    type Error = Error;

    fn try_from(raw: RawLayout) -> Result<Self> {
        SensorLayout::new(raw.name, raw.sites)
    }
}

impl SensorLayout {
    /// Validates ids (contiguous, ascending from 0), unique (finger, region)
    /// pairs and finite nonnegative costs.
    pub fn new(name: impl Into<String>, sites: Vec<SensorSite>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (pos, site) in sites.iter().enumerate() {
            if site.id != pos {
                return Err(Error::Invariant(format!(
                    "site at position {pos} has id {}; ids must be 0..N in ascending order",
                    site.id
                )));
            }
            if !site.cost.is_finite() || site.cost < 0.0 {
                return Err(Error::Invariant(format!(
                    "site {} has invalid cost {}",
                    site.id, site.cost
                )));
            }
            if !seen.insert((site.finger, site.region)) {
                return Err(Error::Invariant(format!(
                    "duplicate (finger, region) = ({}, {}) at site {}",
                    site.finger, site.region, site.id
                )));
            }
        }
        Ok(SensorLayout {
            name: name.into(),
            sites,
        })
    }

    /// The canonical 21-site hand: four sites (K1, K2, K3, fingertip) on
    /// each of the five digits, thumb first, then one palm unit.
    pub fn builtin_shadow21() -> Self {
        let mut sites = Vec::with_capacity(21);
        for finger in Finger::DIGITS {
            for region in Region::DIGIT_REGIONS {
                sites.push(SensorSite {
                    id: sites.len(),
                    name: format!("{finger}.{region}"),
                    finger,
                    region,
                    cost: 1.0,
                });
            }
        }
        sites.push(SensorSite {
            id: sites.len(),
            name: "palm".to_string(),
            finger: Finger::Palm,
            region: Region::Palm,
            cost: 1.0,
        });
        SensorLayout::new("shadow21", sites).expect("builtin layout is valid")
    }

    /// Generic unit-cost layout of `n` sites named `s0..`, drawing distinct
    /// (finger, region) pairs in a fixed order. At most 30 sites.
    pub fn generic(n: usize) -> Result<Self> {
        const FINGERS: [Finger; 6] = [
            Finger::Thumb,
            Finger::Index,
            Finger::Middle,
            Finger::Ring,
            Finger::Little,
            Finger::Palm,
        ];
        const REGIONS: [Region; 5] = [
            Region::K1,
            Region::K2,
            Region::K3,
            Region::Fingertip,
            Region::Palm,
        ];
        if n > FINGERS.len() * REGIONS.len() {
            return Err(Error::InvalidSetting(format!(
                "generic layouts hold at most 30 sites, asked for {n}"
            )));
        }
        let sites = FINGERS
            .iter()
            .flat_map(|&f| REGIONS.iter().map(move |&r| (f, r)))
            .take(n)
            .enumerate()
            .map(|(id, (finger, region))| SensorSite {
                id,
                name: format!("s{id}"),
                finger,
                region,
                cost: 1.0,
            })
            .collect();
        SensorLayout::new(format!("generic{n}"), sites)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // Deserialize the raw form first so invariant failures keep their class.
        let raw: RawLayout =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("layout: {e}")))?;
        SensorLayout::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn sites(&self) -> &[SensorSite] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.sites.iter().map(|s| s.cost).collect()
    }

    /// True when every site carries the same cost.
    pub fn has_uniform_costs(&self) -> bool {
        self.sites.windows(2).all(|w| w[0].cost == w[1].cost)
    }

    /// Copy of this layout with every site cost set to `cost`.
    pub fn with_uniform_cost(&self, cost: f64) -> Result<Self> {
        let sites = self
            .sites
            .iter()
            .map(|s| SensorSite { cost, ..s.clone() })
            .collect();
        SensorLayout::new(self.name.clone(), sites)
    }

    /// Sum of the costs of sites present in `config`.
    pub fn total_cost(&self, config: &SensorConfiguration) -> Result<f64> {
        Error::check_dim(self.len(), config.len())?;
        Ok(self
            .sites
            .iter()
            .zip(config.bits())
            .filter(|(_, &b)| b)
            .map(|(s, _)| s.cost)
            .sum())
    }

    pub fn site_by_name(&self, name: &str) -> Option<&SensorSite> {
        self.sites.iter().find(|s| s.name == name)
    }
}
