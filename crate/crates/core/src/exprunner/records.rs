//! Per-trial rows and run summaries, with their file formats.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::stats::{histogram, mean_var_se, Regression};
use crate::treecore::OutdegreeProfile;

/// One trial. Rejected trials carry a reason and no profile.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub degree: usize,
    pub seed: u64,
    /// Substream of `seed` this trial drew from.
    pub stream: u64,
    pub reason: Option<String>,
    pub profile: Option<OutdegreeProfile>,
    pub paired_fraction: Option<f64>,
    pub small_petal_fraction: Option<f64>,
    /// Kept in memory only; files stay byte-identical across runs.
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn rejected(&self) -> bool {
        self.reason.is_some()
    }
}

/// CSV row layout:
/// `trial,degree,seed,stream,rejected,reason,n0,n1,n2,paired_fraction,small_petal_fraction`.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    trial: u64,
    degree: usize,
    seed: u64,
    stream: u64,
    rejected: bool,
    reason: String,
    n0: Option<usize>,
    n1: Option<usize>,
    n2: Option<usize>,
    paired_fraction: Option<f64>,
    small_petal_fraction: Option<f64>,
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            trial: r.trial,
            degree: r.degree,
            seed: r.seed,
            stream: r.stream,
            rejected: r.rejected(),
            reason: r.reason.clone().unwrap_or_default(),
            n0: r.profile.map(|p| p.n0),
            n1: r.profile.map(|p| p.n1),
            n2: r.profile.map(|p| p.n2),
            paired_fraction: r.paired_fraction,
            small_petal_fraction: r.small_petal_fraction,
        })
        .expect("in-memory write");
    }
    if records.is_empty() {
        return "trial,degree,seed,stream,rejected,reason,n0,n1,n2,paired_fraction,small_petal_fraction\n".into();
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

/// Statistics of one group of trials (one degree or size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub degree: usize,
    pub trials: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub rejection_rate: f64,
    pub rejection_reasons: BTreeMap<String, usize>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub std_error: Option<f64>,
    pub histogram: Vec<(i64, usize)>,
}

impl GroupStats {
    /// Statistics of `value(record)` over the accepted records.
    pub fn from_records(degree: usize, records: &[TrialRecord], value: impl Fn(&TrialRecord) -> Option<f64>) -> Self {
        let mut reasons = BTreeMap::new();
        for r in records {
            if let Some(reason) = &r.reason {
                *reasons.entry(reason.clone()).or_insert(0) += 1;
            }
        }
        let values: Vec<f64> = records.iter().filter(|r| !r.rejected()).filter_map(&value).collect();
        let accepted = records.iter().filter(|r| !r.rejected()).count();
        let rejected = records.len() - accepted;
        let mvs = mean_var_se(&values);
        let hist = if values.iter().all(|v| v.fract() == 0.0) {
            histogram(values.iter().map(|&v| v as i64))
        } else {
            Vec::new()
        };
        Self {
            degree,
            trials: records.len(),
            accepted,
            rejected,
            rejection_rate: if records.is_empty() {
                0.0
            } else {
                rejected as f64 / records.len() as f64
            },
            rejection_reasons: reasons,
            mean: mvs.map(|t| t.0),
            variance: mvs.map(|t| t.1),
            std_error: mvs.map(|t| t.2),
            histogram: hist,
        }
    }
}

/// Per-degree row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub degree: usize,
    pub stats: GroupStats,
    /// `mean / (degree - 1)`.
    pub fraction: Option<f64>,
    /// Uniform trees of size `degree`; `control_fraction` divides by
    /// `degree - 1` as well.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<GroupStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_mean: Option<f64>,
}

/// Summary of a run, written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub seed: u64,
    /// Name of the per-trial quantity summarised.
    pub statistic: String,
    /// Over all trials of the run.
    pub overall: GroupStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regression: Option<Regression>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub rows: Vec<SweepRow>,
    /// Extra named values, e.g. the exact moments used for standardising.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, f64>,
}

impl SummaryStats {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serialises");
        s.push('\n');
        s
    }

    pub fn rejection_rate(&self) -> f64 {
        self.overall.rejection_rate
    }
}
