//! The individual experiments.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::records::{GroupStats, SummaryStats, SweepRow, TrialRecord};
use super::stats::{ks_statistic_normal, linear_regression};
use super::{run_group, ExperimentError, RunOutput, TrialData, MAX_REJECTION_RATE};
use crate::exactcomb::{MomentJets, UniformSampler};
use crate::lemgeo::{
    analyze, component_export, critical_points, genericity_check, paired_fraction, pairing_from_analysis,
    real_rooted_permutation, trace_component_log, GeoError, PetalExport, PolynomialRep, SingularComponent,
    DEFAULT_PAIRING_RADIUS,
};
use crate::polymodels::{perturbed_chebyshev, ModelKind, ModelSpec};
use crate::treecore::{count_valleys, tree_from_permutation};

/// Smallest per-degree budget for the Chebyshev table.
pub const CHEBYSHEV_MIN_TRIALS: u64 = 30;

const ARM_MAIN: u64 = 0;
const ARM_CONTROL: u64 = 1;

fn n2_of(r: &TrialRecord) -> Option<f64> {
    r.profile.map(|p| p.n2 as f64)
}

fn model_spec(model: ModelKind, degree: usize) -> Result<ModelSpec, ExperimentError> {
    if model == ModelKind::IidCustomDensity {
        return Err(ExperimentError::Config(
            "iid_custom_density needs a density; use simulate_with".into(),
        ));
    }
    ModelSpec::new(model, degree).map_err(|e| ExperimentError::Config(e.to_string()))
}

/// Full geometric trial: tree profile, pairing and petal census.
fn geometric_trial(p: &PolynomialRep) -> Result<TrialData, String> {
    let a = analyze(p).map_err(|e| e.reason().to_string())?;
    let pairing = pairing_from_analysis(&a, DEFAULT_PAIRING_RADIUS);
    let profile = a.tree.outdegree_profile();
    Ok(TrialData {
        profile: Some(profile),
        paired_fraction: Some(pairing.paired_fraction),
        small_petal_fraction: pairing.small_petal_fraction,
        value: Some(profile.n2 as f64),
    })
}

fn split(out: Vec<(TrialRecord, Option<f64>)>) -> (Vec<TrialRecord>, Vec<Option<f64>>) {
    out.into_iter().unzip()
}

/// Lemniscate trees of `trials` polynomials drawn by `sampler`; the
/// statistic is the number of outdegree-2 vertices.
pub fn simulate_with(
    label: &str,
    degree: usize,
    trials: u64,
    seed: u64,
    jobs: usize,
    sampler: impl Fn(&mut ChaCha8Rng) -> Result<PolynomialRep, String> + Sync + Send,
) -> RunOutput {
    let (records, _) = split(run_group(seed, ARM_MAIN, 0, degree, trials, jobs, |rng| {
        geometric_trial(&sampler(rng)?)
    }));
    let overall = GroupStats::from_records(degree, &records, n2_of);
    let summary = SummaryStats {
        experiment: "simulate".into(),
        model: Some(label.to_string()),
        seed,
        statistic: "n2".into(),
        overall,
        ks_statistic: None,
        regression: None,
        rows: Vec::new(),
        extra: BTreeMap::new(),
    };
    RunOutput { records, summary }
}

pub fn simulate(
    model: ModelKind,
    degree: usize,
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<RunOutput, ExperimentError> {
    let spec = model_spec(model, degree)?;
    Ok(simulate_with(model.name(), degree, trials, seed, jobs, |rng| {
        spec.sample(rng).map_err(|_| "model_error".to_string())
    }))
}

/// Outdegree-2 counts of uniform trees of size `n`, standardised by the
/// exact moments and compared with the standard normal.
///
/// The count is integer valued, so its empirical CDF has jumps of order
/// `1/σ` and the raw KS distance cannot fall below half the largest atom.
/// Each value is therefore smoothed by an independent `U(-1/2, 1/2)` draw
/// from the same trial stream before standardising with `σ² + 1/12`; the raw
/// distance is kept in `extra.ks_statistic_raw`.
pub fn clt_experiment(n: usize, trials: u64, seed: u64, jobs: usize) -> Result<RunOutput, ExperimentError> {
    if n < 2 {
        return Err(ExperimentError::Config(format!(
            "size {n}: the outdegree-2 count is constant, cannot standardise"
        )));
    }
    if trials == 0 {
        return Err(ExperimentError::Config("trials must be at least 1".into()));
    }
    let moments = MomentJets::expand(n - 1)
        .moments(n)
        .map_err(|e| ExperimentError::Numeric(e.to_string()))?;
    let (mu, var) = (moments.mean_f64(), moments.variance_f64());
    if !(var > 0.0) {
        return Err(ExperimentError::Numeric(format!("variance {var} at size {n}")));
    }
    let sampler = UniformSampler::new(n);
    let (records, jitter) = split(run_group(seed, ARM_MAIN, 0, n, trials, jobs, |rng| {
        let profile = sampler.sample(rng).outdegree_profile();
        let u: f64 = rng.random::<f64>() - 0.5;
        Ok(TrialData {
            profile: Some(profile),
            value: Some(u),
            ..TrialData::default()
        })
    }));
    let sd = var.sqrt();
    let sd_smooth = (var + 1.0 / 12.0).sqrt();
    let raw: Vec<f64> = records.iter().filter_map(n2_of).map(|x| (x - mu) / sd).collect();
    let smooth: Vec<f64> = records
        .iter()
        .zip(&jitter)
        .filter_map(|(r, u)| Some((n2_of(r)? + u.unwrap_or(0.0) - mu) / sd_smooth))
        .collect();
    let mut extra = BTreeMap::new();
    extra.insert("exact_mean".into(), mu);
    extra.insert("exact_variance".into(), var);
    extra.insert("ks_statistic_raw".into(), ks_statistic_normal(&raw));
    let summary = SummaryStats {
        experiment: "clt".into(),
        model: Some("uniform_tree".into()),
        seed,
        statistic: "n2".into(),
        overall: GroupStats::from_records(n, &records, n2_of),
        ks_statistic: Some(ks_statistic_normal(&smooth)),
        regression: None,
        rows: Vec::new(),
        extra,
    };
    Ok(RunOutput { records, summary })
}

fn abort_if_excessive(row: &SweepRow, partial: impl FnOnce() -> RunOutput) -> Result<(), ExperimentError> {
    if row.stats.rejection_rate > MAX_REJECTION_RATE {
        return Err(ExperimentError::ExcessiveRejection {
            degree: row.degree,
            rate: row.stats.rejection_rate,
            reasons: format!("{:?}", row.stats.rejection_reasons),
            partial: Box::new(partial()),
        });
    }
    Ok(())
}

/// Degree sweep of the outdegree-2 count `Y_N`, with a log-log fit of the
/// mean. The control arm draws uniform trees of size `N`; both fractions
/// divide by `N - 1`.
pub fn sweep_experiment(
    model: ModelKind,
    degrees: &[usize],
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<RunOutput, ExperimentError> {
    if degrees.is_empty() || degrees[0] < 2 || degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::Config(
            "degrees must be strictly increasing and at least 2".into(),
        ));
    }
    let jets = MomentJets::expand(degrees[degrees.len() - 1] - 1);
    let mut all = Vec::new();
    let mut rows: Vec<SweepRow> = Vec::new();
    for (g, &n) in degrees.iter().enumerate() {
        let spec = model_spec(model, n)?;
        let (records, _) = split(run_group(seed, ARM_MAIN, g as u64, n, trials, jobs, |rng| {
            geometric_trial(&spec.sample(rng).map_err(|_| "model_error".to_string())?)
        }));
        let sampler = UniformSampler::new(n);
        let (control, _) = split(run_group(seed, ARM_CONTROL, g as u64, n, trials, jobs, |rng| {
            let profile = sampler.sample(rng).outdegree_profile();
            Ok(TrialData {
                profile: Some(profile),
                ..TrialData::default()
            })
        }));
        let stats = GroupStats::from_records(n, &records, n2_of);
        let control = GroupStats::from_records(n, &control, n2_of);
        let denom = (n - 1) as f64;
        let row = SweepRow {
            degree: n,
            fraction: stats.mean.map(|m| m / denom),
            control_fraction: control.mean.map(|m| m / denom),
            exact_mean: jets.moments(n).ok().map(|m| m.mean_f64()),
            stats,
            control: Some(control),
        };
        all.extend(records);
        rows.push(row);
        let last = rows.last().unwrap();
        abort_if_excessive(last, || {
            sweep_output("sweep", model.name(), seed, &all, rows.clone(), true)
        })?;
    }
    Ok(sweep_output("sweep", model.name(), seed, &all, rows, true))
}

fn sweep_output(
    experiment: &str,
    model: &str,
    seed: u64,
    records: &[TrialRecord],
    rows: Vec<SweepRow>,
    log_log: bool,
) -> RunOutput {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let m = r.stats.mean?;
            let n = r.degree as f64;
            if log_log {
                (m > 0.0).then(|| (n.ln(), m.ln()))
            } else {
                Some((n, m))
            }
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let overall = GroupStats::from_records(rows.last().map_or(0, |r| r.degree), records, n2_of);
    RunOutput {
        records: records.to_vec(),
        summary: SummaryStats {
            experiment: experiment.into(),
            model: Some(model.into()),
            seed,
            statistic: "n2".into(),
            overall,
            ks_statistic: None,
            regression: linear_regression(&x, &y),
            rows,
            extra: BTreeMap::new(),
        },
    }
}

/// One perturbed Chebyshev draw through the permutation pipeline. Draws
/// without `n` simple real zeros in `[-1.05, 1.05]` are rejected.
fn chebyshev_trial(n: usize, rng: &mut ChaCha8Rng) -> Result<TrialData, String> {
    let s = perturbed_chebyshev(n, rng);
    let roots = s
        .real_roots(-1.05, 1.05, None)
        .map_err(|_| "root_finding".to_string())?;
    if roots.len() != n {
        return Err("not_real_rooted".into());
    }
    let p = PolynomialRep::from_cheb(s).map_err(|e| e.reason().to_string())?;
    let sigma = real_rooted_permutation(&p).map_err(|e| e.reason().to_string())?;
    let profile = tree_from_permutation(&sigma)
        .expect("nonempty permutation")
        .outdegree_profile();
    debug_assert_eq!(profile.n2, count_valleys(&sigma));
    Ok(TrialData {
        profile: Some(profile),
        value: Some(profile.n2 as f64),
        ..TrialData::default()
    })
}

/// Mean valley count of perturbed Chebyshev polynomials for
/// `n = step, 2·step, ..., max_degree`, and the linear fit of the mean on
/// `n`.
pub fn chebyshev_table(
    max_degree: usize,
    step: usize,
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<RunOutput, ExperimentError> {
    if step < 2 || max_degree < step {
        return Err(ExperimentError::Config("need 2 <= step <= max-degree".into()));
    }
    if trials < CHEBYSHEV_MIN_TRIALS {
        return Err(ExperimentError::Config(format!(
            "chebyshev-table needs at least {CHEBYSHEV_MIN_TRIALS} trials"
        )));
    }
    let mut all = Vec::new();
    let mut rows = Vec::new();
    for (g, n) in (step..=max_degree).step_by(step).enumerate() {
        let (records, _) = split(run_group(seed, ARM_MAIN, g as u64, n, trials, jobs, |rng| {
            chebyshev_trial(n, rng)
        }));
        let stats = GroupStats::from_records(n, &records, n2_of);
        rows.push(SweepRow {
            degree: n,
            fraction: stats.mean.map(|m| m / (n - 1) as f64),
            stats,
            control: None,
            control_fraction: None,
            exact_mean: None,
        });
        all.extend(records);
        let last = rows.last().unwrap();
        abort_if_excessive(last, || {
            sweep_output(
                "chebyshev-table",
                "perturbed_chebyshev",
                seed,
                &all,
                rows.clone(),
                false,
            )
        })?;
    }
    Ok(sweep_output(
        "chebyshev-table",
        "perturbed_chebyshev",
        seed,
        &all,
        rows,
        false,
    ))
}

/// Pairing census of zeros and critical points. With `trace_petals` every
/// singular component is traced as well, which adds the small-petal
/// fraction and the tree profile.
#[allow(clippy::too_many_arguments)]
pub fn pairing_experiment(
    model: ModelKind,
    degree: usize,
    trials: u64,
    r: f64,
    trace_petals: bool,
    seed: u64,
    jobs: usize,
) -> Result<RunOutput, ExperimentError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(ExperimentError::Config("r must be positive".into()));
    }
    let spec = model_spec(model, degree)?;
    let (records, _) = split(run_group(seed, ARM_MAIN, 0, degree, trials, jobs, |rng| {
        let p = spec.sample(rng).map_err(|_| "model_error".to_string())?;
        let reason = |e: GeoError| e.reason().to_string();
        if trace_petals {
            let a = analyze(&p).map_err(reason)?;
            let s = pairing_from_analysis(&a, r);
            return Ok(TrialData {
                profile: Some(a.tree.outdegree_profile()),
                paired_fraction: Some(s.paired_fraction),
                small_petal_fraction: s.small_petal_fraction,
                value: Some(s.paired_fraction),
            });
        }
        let p = p.with_zeros().map_err(reason)?;
        let crit = critical_points(&p).map_err(reason)?;
        if !genericity_check(&p, &crit).map_err(reason)?.generic {
            return Err("not_generic".into());
        }
        let s = paired_fraction(p.zeros().expect("zero form"), &crit, r);
        Ok(TrialData {
            paired_fraction: Some(s.paired_fraction),
            value: Some(s.paired_fraction),
            ..TrialData::default()
        })
    }));
    let overall = GroupStats::from_records(degree, &records, |rec| rec.paired_fraction);
    let mut extra = BTreeMap::new();
    extra.insert("r".into(), r);
    let small: Vec<f64> = records.iter().filter_map(|x| x.small_petal_fraction).collect();
    if !small.is_empty() {
        extra.insert(
            "mean_small_petal_fraction".into(),
            super::compensated_sum(small.iter().copied()) / small.len() as f64,
        );
    }
    Ok(RunOutput {
        records,
        summary: SummaryStats {
            experiment: "pairing".into(),
            model: Some(model.name().into()),
            seed,
            statistic: "paired_fraction".into(),
            overall,
            ks_statistic: None,
            regression: None,
            rows: Vec::new(),
            extra,
        },
    })
}

/// Petal polylines of every singular component, in rank order. When
/// tracing stops early the components traced so far are kept and
/// `complete` is false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemniscatePlot {
    pub degree: usize,
    pub zeros: Vec<[f64; 2]>,
    pub components: Vec<PetalExport>,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn lemniscate_plot(p: &PolynomialRep) -> LemniscatePlot {
    let mut plot = LemniscatePlot {
        degree: p.degree(),
        zeros: Vec::new(),
        components: Vec::new(),
        complete: false,
        error: None,
    };
    if let Err(e) = fill_plot(p, &mut plot) {
        plot.error = Some(e.to_string());
    } else {
        plot.complete = true;
    }
    plot
}

fn fill_plot(p: &PolynomialRep, plot: &mut LemniscatePlot) -> Result<(), GeoError> {
    let p = p.with_zeros()?;
    let zf = p.to_zero_form()?;
    plot.zeros = zf.zeros.iter().map(|z: &Complex64| [z.re, z.im]).collect();
    let crit = critical_points(&p)?;
    let gen = genericity_check(&p, &crit)?;
    if !gen.generic {
        return Err(GeoError::NotGeneric(gen));
    }
    for (r, &i) in crit.order.iter().enumerate() {
        let w = crit.points[i];
        let petals = trace_component_log(&zf, w, crit.log_values[i])?;
        plot.components.push(component_export(&SingularComponent {
            critical_point: w,
            rank: r + 1,
            petals,
        }));
    }
    Ok(())
}

/// Writes the plot JSON to `out`, partial or not, and returns it.
pub fn emit_lemniscate_plot(p: &PolynomialRep, out: &Path) -> Result<LemniscatePlot, ExperimentError> {
    let plot = lemniscate_plot(p);
    let mut s = serde_json::to_string(&plot).expect("plot serialises");
    s.push('\n');
    std::fs::write(out, s)?;
    Ok(plot)
}
