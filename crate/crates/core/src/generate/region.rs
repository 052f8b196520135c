use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Instance;

/// Critical clause density of random 3-SAT.
pub const ALPHA_C: f64 = 4.267;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    EasyUnder,
    Hard,
    EasyOver,
}

impl Region {
    pub fn is_hard(self) -> bool {
        self == Region::Hard
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::EasyUnder => "easy_under",
            Region::Hard => "hard",
            Region::EasyOver => "easy_over",
        }
    }
}

/// Inclusive α interval of the hard region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardBand {
    pub lo: f64,
    pub hi: f64,
}

impl Default for HardBand {
    fn default() -> Self {
        HardBand { lo: 3.0, hi: 5.5 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("hard band ({lo}, {hi}) must satisfy lo < {ALPHA_C} < hi")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("α = {alpha} has {found} samples, at least {required} required")]
    InsufficientSamples {
        alpha: f64,
        found: usize,
        required: usize,
    },
    #[error("no grid α with P(SAT) {0}")]
    BoundNotFound(&'static str),
}

impl HardBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self, RegionError> {
        if lo < ALPHA_C && ALPHA_C < hi {
            Ok(HardBand { lo, hi })
        } else {
            Err(RegionError::InvalidBounds { lo, hi })
        }
    }

    pub fn classify(&self, alpha: f64) -> Region {
        if alpha < self.lo {
            Region::EasyUnder
        } else if alpha <= self.hi {
            Region::Hard
        } else {
            Region::EasyOver
        }
    }
}

pub fn classify_region(alpha: f64, bounds: (f64, f64)) -> Result<Region, RegionError> {
    Ok(HardBand::new(bounds.0, bounds.1)?.classify(alpha))
}

pub const MIN_SAMPLES_PER_ALPHA: usize = 30;

/// Empirical hard band: `lo` is the largest grid α whose SAT fraction is at
/// least 0.99, `hi` the smallest whose SAT fraction is at most 0.01.
pub fn estimate_bounds(samples: &[Instance]) -> Result<HardBand, RegionError> {
    let table = sat_fraction_by_alpha(samples);
    if table.is_empty() {
        return Err(RegionError::InsufficientSamples {
            alpha: f64::NAN,
            found: 0,
            required: MIN_SAMPLES_PER_ALPHA,
        });
    }
    if let Some(&(alpha, _, total)) = table.iter().find(|(_, _, t)| *t < MIN_SAMPLES_PER_ALPHA) {
        return Err(RegionError::InsufficientSamples {
            alpha,
            found: total,
            required: MIN_SAMPLES_PER_ALPHA,
        });
    }
    let frac = |sat: usize, total: usize| sat as f64 / total as f64;
    let lo = table
        .iter()
        .rev()
        .find(|&&(_, s, t)| frac(s, t) >= 0.99)
        .map(|&(a, _, _)| a)
        .ok_or(RegionError::BoundNotFound(">= 0.99"))?;
    let hi = table
        .iter()
        .find(|&&(_, s, t)| frac(s, t) <= 0.01)
        .map(|&(a, _, _)| a)
        .ok_or(RegionError::BoundNotFound("<= 0.01"))?;
    if lo < hi {
        Ok(HardBand { lo, hi })
    } else {
        Err(RegionError::InvalidBounds { lo, hi })
    }
}

/// (α, SAT count, total) per distinct α, ascending.
pub fn sat_fraction_by_alpha(samples: &[Instance]) -> Vec<(f64, usize, usize)> {
    let mut groups: BTreeMap<AlphaKey, (usize, usize)> = BTreeMap::new();
    for inst in samples {
        let entry = groups.entry(AlphaKey(inst.alpha)).or_default();
        entry.1 += 1;
        if inst.label.is_sat() {
            entry.0 += 1;
        }
    }
    groups.into_iter().map(|(k, (s, t))| (k.0, s, t)).collect()
}

/// Total order over finite α values for use as a map key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaKey(pub f64);

impl Eq for AlphaKey {}

impl PartialOrd for AlphaKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlphaKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
