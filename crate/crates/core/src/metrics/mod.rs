//! Aggregations of evaluation records and solver profiles.
//!
//! Every analysis produces one or more [`MetricSeries`], which are written as
//! CSV files with the columns `label,window,x,y,support` (one row per point)
//! and drawn as standalone SVG charts.

mod analysis;
mod svg;

pub use analysis::{
    accuracy_vs_alpha, accuracy_vs_ratio, confusion, tokens_vs_alpha, ConfusionMatrix, Predicted,
    RegionFilter,
};
pub use svg::{line_chart, phase_chart, PhaseChart, Secondary};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no record matches an instance of the dataset")]
    EmptyJoin,
    #[error("instance {0} has no model count")]
    MissingCounts(String),
    #[error("window must be at least 1")]
    InvalidWindow,
    #[error("profile has no rows")]
    EmptyProfile,
    #[error("profile mixes variable counts {0} and {1}")]
    MixedSizes(u32, u32),
    #[error(transparent)]
    Count(#[from] crate::count::CountError),
    #[error("series CSV: {0}")]
    Csv(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub label: String,
    /// Number of consecutive x groups pooled per point; 1 means none.
    pub window: usize,
    pub points: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    label: String,
    window: usize,
    x: f64,
    y: f64,
    support: usize,
}

impl MetricSeries {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(["label", "window", "x", "y", "support"])
            .expect("in-memory write");
        for p in &self.points {
            w.serialize(Row {
                label: self.label.clone(),
                window: self.window,
                x: p.x,
                y: p.y,
                support: p.support,
            })
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }

    /// Inverse of [`MetricSeries::to_csv`] for non-empty series.
    pub fn from_csv(text: &str) -> Result<Self, MetricsError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<Row> = r
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| MetricsError::Csv(e.to_string()))?;
        let first = rows.first().ok_or_else(|| MetricsError::Csv("no data rows".into()))?;
        let (label, window) = (first.label.clone(), first.window);
        if rows.iter().any(|row| row.label != label || row.window != window) {
            return Err(MetricsError::Csv("rows of more than one series".into()));
        }
        Ok(MetricSeries {
            label,
            window,
            points: rows
                .into_iter()
                .map(|row| Point {
                    x: row.x,
                    y: row.y,
                    support: row.support,
                })
                .collect(),
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), MetricsError> {
        std::fs::write(path, self.to_csv()).map_err(|source| MetricsError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv(&text)
    }

    /// The x at which the series first falls from at least `level` to below
    /// it, by linear interpolation between the two bracketing points.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            (a.y >= level && b.y < level).then(|| a.x + (a.y - level) / (a.y - b.y) * (b.x - a.x))
        })
    }
}

/// A group of outcomes sharing one x value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Group {
    pub x: f64,
    pub sum: f64,
    pub count: usize,
}

/// Pools consecutive groups into sliding windows of `window` groups, moving by
/// one group. Each point's x is the mean of its groups' x values and y the
/// pooled mean `sum / count` over every outcome in the window. With fewer
/// groups than `window`, a single point covers all of them.
pub(crate) fn windowed(groups: &[Group], window: usize) -> Result<Vec<Point>, MetricsError> {
    if window == 0 {
        return Err(MetricsError::InvalidWindow);
    }
    if groups.is_empty() {
        return Err(MetricsError::EmptyJoin);
    }
    let span = window.min(groups.len());
    Ok(groups
        .windows(span)
        .map(|w| {
            let count: usize = w.iter().map(|g| g.count).sum();
            Point {
                x: w.iter().map(|g| g.x).sum::<f64>() / w.len() as f64,
                y: w.iter().map(|g| g.sum).sum::<f64>() / count as f64,
                support: count,
            }
        })
        .collect())
}

/// `{adapter}_{format}_{variant}_{metric}.csv` with characters outside
/// `[A-Za-z0-9._-]` replaced by `-`.
pub fn series_file_name(adapter: &str, format: &str, variant: &str, metric: &str, ext: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
            .collect()
    };
    format!("{}_{}_{}_{}.{ext}", clean(adapter), clean(format), clean(variant), clean(metric))
}
