use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{windowed, Group, MetricSeries, MetricsError, Point};
use crate::count::{log2_edges, ratio_bins};
use crate::eval::EvalRecord;
use crate::generate::{AlphaKey, Instance};

/// Records paired with their instances, in record order. Records whose
/// instance is not in the dataset are dropped.
fn join<'a>(
    records: &'a [EvalRecord],
    dataset: &'a [Instance],
) -> Result<Vec<(&'a EvalRecord, &'a Instance)>, MetricsError> {
    let by_id: HashMap<&str, &Instance> = dataset.iter().map(|i| (i.id.as_str(), i)).collect();
    let joined: Vec<_> = records
        .iter()
        .filter_map(|r| by_id.get(r.instance_id.as_str()).map(|&i| (r, i)))
        .collect();
    if joined.is_empty() {
        return Err(MetricsError::EmptyJoin);
    }
    Ok(joined)
}

fn label(records: &[(&EvalRecord, &Instance)], metric: &str) -> String {
    let r = records[0].0;
    format!("{}/{}/{}/{metric}", r.adapter, r.format, r.variant)
}

fn groups_by_alpha<'a>(
    joined: &[(&'a EvalRecord, &'a Instance)],
    value: impl Fn(&EvalRecord) -> f64,
) -> Vec<Group> {
    let mut by_alpha: BTreeMap<AlphaKey, (f64, usize)> = BTreeMap::new();
    for (r, inst) in joined {
        let slot = by_alpha.entry(AlphaKey(inst.alpha)).or_default();
        slot.0 += value(r);
        slot.1 += 1;
    }
    by_alpha
        .into_iter()
        .map(|(a, (sum, count))| Group { x: a.0, sum, count })
        .collect()
}

fn correctness(r: &EvalRecord) -> f64 {
    f64::from(u8::from(r.verdict.is_correct()))
}

/// Accuracy against the instances' grid α, pooled over sliding windows of
/// `window` consecutive α values. Anything but a correct verdict counts as
/// wrong.
pub fn accuracy_vs_alpha(
    records: &[EvalRecord],
    dataset: &[Instance],
    window: usize,
) -> Result<MetricSeries, MetricsError> {
    let joined = join(records, dataset)?;
    Ok(MetricSeries {
        label: label(&joined, "accuracy_alpha"),
        window,
        points: windowed(&groups_by_alpha(&joined, correctness), window)?,
    })
}

/// Mean completion tokens against α, windowed like [`accuracy_vs_alpha`].
pub fn tokens_vs_alpha(
    records: &[EvalRecord],
    dataset: &[Instance],
    window: usize,
) -> Result<MetricSeries, MetricsError> {
    let joined = join(records, dataset)?;
    Ok(MetricSeries {
        label: label(&joined, "tokens_alpha"),
        window,
        points: windowed(&groups_by_alpha(&joined, |r| r.completion_tokens as f64), window)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionFilter {
    /// One series over every SAT instance.
    All,
    /// One series for the easy regions and one for the hard region.
    Split,
}

/// Accuracy on SAT instances against their satisfiability ratio, in
/// power-of-two ratio bins. x is the geometric centre of each non-empty bin.
pub fn accuracy_vs_ratio(
    records: &[EvalRecord],
    dataset: &[Instance],
    filter: RegionFilter,
) -> Result<Vec<MetricSeries>, MetricsError> {
    let joined = join(records, dataset)?;
    let sat: Vec<_> = joined.into_iter().filter(|(_, i)| i.label.is_sat()).collect();
    if sat.is_empty() {
        return Err(MetricsError::EmptyJoin);
    }
    if let Some((_, i)) = sat.iter().find(|(_, i)| i.model_count.is_none()) {
        return Err(MetricsError::MissingCounts(i.id.clone()));
    }
    let depth = sat.iter().map(|(_, i)| i.n).max().expect("non-empty");
    let edges = log2_edges(depth);
    let subsets: Vec<(String, Vec<_>)> = match filter {
        RegionFilter::All => vec![(label(&sat, "accuracy_ratio"), sat)],
        RegionFilter::Split => {
            let base = label(&sat, "accuracy_ratio");
            let (hard, easy): (Vec<_>, Vec<_>) = sat.into_iter().partition(|(_, i)| i.region.is_hard());
            vec![(format!("{base}/easy"), easy), (format!("{base}/hard"), hard)]
        }
    };
    let mut out = Vec::new();
    for (series_label, members) in subsets {
        if members.is_empty() {
            continue;
        }
        let correct: HashMap<&str, bool> = members
            .iter()
            .map(|(r, i)| (i.id.as_str(), r.verdict.is_correct()))
            .collect();
        let instances: Vec<Instance> = members.iter().map(|(_, i)| (*i).clone()).collect();
        let bins = ratio_bins(&instances, &edges)?;
        let points = bins
            .iter()
            .filter(|b| !b.members.is_empty())
            .map(|b| {
                let hits = b.members.iter().filter(|i| correct[i.id.as_str()]).count();
                Point {
                    x: b.center(),
                    y: hits as f64 / b.members.len() as f64,
                    support: b.members.len(),
                }
            })
            .collect();
        out.push(MetricSeries {
            label: series_label,
            window: 1,
            points,
        });
    }
    Ok(out)
}

/// What an answer claimed, for confusion purposes. Transport failures count
/// as unparseable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    Sat,
    Unsat,
    Unparseable,
}

/// Counts indexed `[true class][predicted]`, true class 0 = SAT, 1 = UNSAT,
/// predicted in [`Predicted`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 2],
}

impl ConfusionMatrix {
    /// Each true class's counts divided by that class's total; empty classes
    /// stay all-zero.
    pub fn normalized(&self) -> [[f64; 3]; 2] {
        self.counts.map(|row| {
            let total: u64 = row.iter().sum();
            row.map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        })
    }

    /// Share of UNSAT instances answered UNSAT.
    pub fn unsat_accuracy(&self) -> Option<f64> {
        let total: u64 = self.counts[1].iter().sum();
        (total > 0).then(|| self.normalized()[1][1])
    }

    pub fn sat_accuracy(&self) -> Option<f64> {
        let total: u64 = self.counts[0].iter().sum();
        (total > 0).then(|| self.normalized()[0][0])
    }

    pub fn to_csv(&self) -> String {
        let n = self.normalized();
        let mut out = String::from("true,predicted,count,normalized\n");
        for (t, tname) in ["sat", "unsat"].iter().enumerate() {
            for (p, pname) in ["sat", "unsat", "unparseable"].iter().enumerate() {
                out.push_str(&format!("{tname},{pname},{},{}\n", self.counts[t][p], n[t][p]));
            }
        }
        out
    }
}

pub fn confusion(records: &[EvalRecord], dataset: &[Instance]) -> Result<ConfusionMatrix, MetricsError> {
    let mut counts = [[0u64; 3]; 2];
    for (r, inst) in join(records, dataset)? {
        let truth = usize::from(!inst.label.is_sat());
        let predicted = match (r.verdict, r.parsed.claims_sat()) {
            (crate::eval::Outcome::TransportError, _) | (_, None) => Predicted::Unparseable,
            (_, Some(true)) => Predicted::Sat,
            (_, Some(false)) => Predicted::Unsat,
        };
        counts[truth][predicted as usize] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{Format, ParsedAnswer, Variant};
    use crate::eval::{Outcome, EVAL_SCHEMA_VERSION};
    use crate::generate::{generate, GenSpec};

    fn record(inst: &Instance, correct: bool, tokens: u64) -> EvalRecord {
        EvalRecord {
            schema_version: EVAL_SCHEMA_VERSION,
            instance_id: inst.id.clone(),
            adapter: "fixture".into(),
            format: Format::SatCnf,
            variant: Variant::Decision,
            shots: 0,
            prompt_text: String::new(),
            raw_response: String::new(),
            parsed: if correct == inst.label.is_sat() {
                ParsedAnswer::DecisionYes
            } else {
                ParsedAnswer::DecisionNo
            },
            verdict: if correct { Outcome::Correct } else { Outcome::Incorrect },
            prompt_tokens: 0,
            completion_tokens: tokens,
            tokens_approximate: true,
            latency: 0.0,
            error: None,
        }
    }

    /// Five instances at each of α = 1, 2, 3, 4 with n = 10.
    fn four_alphas() -> Vec<Instance> {
        (1..=4)
            .flat_map(|a| generate(&GenSpec::new(10, a as f64, 5, a)).unwrap())
            .collect()
    }

    #[test]
    fn accuracy_fixture_pools_to_half() {
        let data = four_alphas();
        let records: Vec<_> = data.iter().map(|i| record(i, i.alpha <= 2.0, 0)).collect();
        let s = accuracy_vs_alpha(&records, &data, 4).unwrap();
        assert_eq!(s.points, vec![Point { x: 2.5, y: 0.5, support: 20 }]);
        let raw = accuracy_vs_alpha(&records, &data, 1).unwrap();
        assert_eq!(raw.points.iter().map(|p| p.y).collect::<Vec<_>>(), vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(raw.points.iter().map(|p| p.support).sum::<usize>(), 20);
    }

    #[test]
    fn token_fixture_averages_to_25() {
        let data = four_alphas();
        let records: Vec<_> = data.iter().map(|i| record(i, true, 10 * i.alpha as u64)).collect();
        assert_eq!(
            tokens_vs_alpha(&records, &data, 4).unwrap().points,
            vec![Point { x: 2.5, y: 25.0, support: 20 }]
        );
        let raw = tokens_vs_alpha(&records, &data, 1).unwrap();
        assert_eq!(raw.points.iter().map(|p| p.y).collect::<Vec<_>>(), vec![10.0, 20.0, 30.0, 40.0]);
    }

    #[test]
    fn empty_join() {
        let data = four_alphas();
        let other = generate(&GenSpec::new(5, 2.0, 1, 99)).unwrap();
        let records = vec![record(&other[0], true, 0)];
        assert!(matches!(accuracy_vs_alpha(&records, &data, 4), Err(MetricsError::EmptyJoin)));
        assert!(matches!(confusion(&records, &data), Err(MetricsError::EmptyJoin)));
    }

    #[test]
    fn ratio_requires_counts_and_splits_regions() {
        let mut data: Vec<Instance> = [2.0, 4.0, 6.0]
            .iter()
            .enumerate()
            .flat_map(|(k, &a)| generate(&GenSpec::new(8, a, 30, k as u64)).unwrap())
            .collect();
        let records: Vec<_> = data.iter().map(|i| record(i, true, 0)).collect();
        assert!(matches!(
            accuracy_vs_ratio(&records, &data, RegionFilter::All),
            Err(MetricsError::MissingCounts(_))
        ));
        crate::count::count_instances(&mut data).unwrap();
        let all = accuracy_vs_ratio(&records, &data, RegionFilter::All).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].points.iter().all(|p| p.y == 1.0));
        let sat = data.iter().filter(|i| i.label.is_sat()).count();
        assert_eq!(all[0].points.iter().map(|p| p.support).sum::<usize>(), sat);
        assert!(all[0].points.windows(2).all(|w| w[0].x < w[1].x));
        let split = accuracy_vs_ratio(&records, &data, RegionFilter::Split).unwrap();
        assert_eq!(split.len(), 2);
        assert!(split[0].label.ends_with("/easy") && split[1].label.ends_with("/hard"));
    }

    #[test]
    fn confusion_counts_and_normalization() {
        let data: Vec<Instance> = [3.0, 8.0]
            .iter()
            .flat_map(|&a| generate(&GenSpec::new(6, a, 20, a as u64)).unwrap())
            .collect();
        let mut records: Vec<_> = data.iter().map(|i| record(i, true, 0)).collect();
        let oracle = confusion(&records, &data).unwrap();
        assert_eq!(oracle.unsat_accuracy(), Some(1.0));
        assert_eq!(oracle.counts[0][1] + oracle.counts[1][0], 0);
        records[0].parsed = ParsedAnswer::Unparseable("x".into());
        records[0].verdict = Outcome::Unparseable;
        let m = confusion(&records, &data).unwrap();
        for row in m.normalized() {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        assert_eq!(m.counts.iter().flatten().sum::<u64>(), data.len() as u64);
        assert!(m.to_csv().starts_with("true,predicted,count,normalized\nsat,sat,"));
    }
}
