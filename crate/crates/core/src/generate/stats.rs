use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AlphaKey, Instance};

/// Clause-count and α distributions for one label.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub count: usize,
    pub m_min: Option<u32>,
    pub m_max: Option<u32>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub m_histogram: BTreeMap<u32, usize>,
    /// (α, count), ascending α.
    pub alpha_histogram: Vec<(f64, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub sat_fraction: f64,
    pub mean_n: f64,
    pub mean_m: f64,
    pub mean_alpha: f64,
    pub per_n: BTreeMap<u32, usize>,
    pub sat: LabelStats,
    pub unsat: LabelStats,
}

impl DatasetStats {
    pub fn compute(instances: &[Instance]) -> Self {
        let total = instances.len();
        let mut stats = DatasetStats {
            total,
            ..Default::default()
        };
        if total == 0 {
            return stats;
        }
        let mut alpha_hist: [BTreeMap<AlphaKey, usize>; 2] = Default::default();
        for inst in instances {
            *stats.per_n.entry(inst.n).or_default() += 1;
            stats.mean_n += f64::from(inst.n);
            stats.mean_m += f64::from(inst.m);
            stats.mean_alpha += inst.alpha;
            let (slot, hist) = if inst.label.is_sat() {
                (&mut stats.sat, &mut alpha_hist[0])
            } else {
                (&mut stats.unsat, &mut alpha_hist[1])
            };
            slot.count += 1;
            slot.m_min = Some(slot.m_min.map_or(inst.m, |v| v.min(inst.m)));
            slot.m_max = Some(slot.m_max.map_or(inst.m, |v| v.max(inst.m)));
            slot.alpha_min = Some(slot.alpha_min.map_or(inst.alpha, |v| v.min(inst.alpha)));
            slot.alpha_max = Some(slot.alpha_max.map_or(inst.alpha, |v| v.max(inst.alpha)));
            *slot.m_histogram.entry(inst.m).or_default() += 1;
            *hist.entry(AlphaKey(inst.alpha)).or_default() += 1;
        }
        let t = total as f64;
        stats.mean_n /= t;
        stats.mean_m /= t;
        stats.mean_alpha /= t;
        stats.sat_fraction = stats.sat.count as f64 / t;
        let [sat_hist, unsat_hist] = alpha_hist;
        stats.sat.alpha_histogram = sat_hist.into_iter().map(|(k, c)| (k.0, c)).collect();
        stats.unsat.alpha_histogram = unsat_hist.into_iter().map(|(k, c)| (k.0, c)).collect();
        stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_grid, paper_grid_row, HardBand};

    #[test]
    fn counts_add_up() {
        let cells = paper_grid_row(5).unwrap();
        let insts = generate_grid(&cells, 10, 2, HardBand::default()).unwrap();
        let s = DatasetStats::compute(&insts);
        assert_eq!(s.total, 310);
        assert_eq!(s.sat.count + s.unsat.count, 310);
        assert_eq!(s.per_n[&5], 310);
        assert_eq!(s.sat.m_histogram.values().sum::<usize>(), s.sat.count);
        assert_eq!(s.mean_n, 5.0);
        assert!(s.unsat.alpha_min.unwrap() > 1.0);
        assert_eq!(DatasetStats::compute(&[]).total, 0);
    }
}
