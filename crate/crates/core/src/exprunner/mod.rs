//! Seeded Monte Carlo experiments and their output files.
//!
//! Trial `i` of group `g` in arm `a` draws from the ChaCha8 stream
//! `(a << 48) | (g << 32) | i` of the master seed, so every trial sees the
//! same random numbers whatever the thread count. Results are collected and
//! reduced in trial order.

mod experiments;
mod records;
mod stats;

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use experiments::{
    chebyshev_table, clt_experiment, emit_lemniscate_plot, lemniscate_plot, pairing_experiment, simulate,
    simulate_with, sweep_experiment, LemniscatePlot, CHEBYSHEV_MIN_TRIALS,
};
pub use records::{records_to_csv, GroupStats, SummaryStats, SweepRow, TrialRecord};
pub use stats::{
    compensated_sum, histogram, ks_statistic_normal, linear_regression, mean_var_se, normal_cdf, Regression,
};

use crate::polymodels::ModelKind;
use crate::treecore::OutdegreeProfile;

/// Runs with a larger rejection rate fail.
pub const MAX_REJECTION_RATE: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("rejection rate {rate:.3} at degree {degree} exceeds the limit ({reasons})")]
    ExcessiveRejection {
        degree: usize,
        rate: f64,
        reasons: String,
        partial: Box<RunOutput>,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code: 2 configuration or I/O, 3 excessive rejection,
    /// 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io(_) => 2,
            ExperimentError::ExcessiveRejection { .. } => 3,
            ExperimentError::Numeric(_) => 4,
        }
    }
}

/// The ChaCha8 stream of one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn stream_id(arm: u64, group: u64, trial: u64) -> u64 {
    debug_assert!(group < 1 << 16 && trial < 1 << 32);
    (arm << 48) | (group << 32) | trial
}

/// What one trial produced.
#[derive(Debug, Clone, Default)]
pub struct TrialData {
    pub profile: Option<OutdegreeProfile>,
    pub paired_fraction: Option<f64>,
    pub small_petal_fraction: Option<f64>,
    /// Scalar used by experiments that summarise something other than the
    /// profile.
    pub value: Option<f64>,
}

/// Maps `f` over `0..n` on `jobs` threads, keeping index order.
pub fn map_trials<T: Send>(n: u64, jobs: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        return pool.install(|| (0..n).into_par_iter().map(&f).collect());
    }
    let _ = jobs;
    (0..n).map(f).collect()
}

/// Runs `trials` trials of one group and returns their records alongside
/// the raw per-trial data.
pub fn run_group(
    seed: u64,
    arm: u64,
    group: u64,
    degree: usize,
    trials: u64,
    jobs: usize,
    f: impl Fn(&mut ChaCha8Rng) -> Result<TrialData, String> + Sync + Send,
) -> Vec<(TrialRecord, Option<f64>)> {
    map_trials(trials, jobs, |i| {
        let stream = stream_id(arm, group, i);
        let mut rng = trial_rng(seed, stream);
        let t0 = Instant::now();
        let out = f(&mut rng);
        let wall_time = t0.elapsed();
        let (reason, data) = match out {
            Ok(d) => (None, d),
            Err(r) => (Some(r), TrialData::default()),
        };
        (
            TrialRecord {
                trial: i,
                degree,
                seed,
                stream,
                reason,
                profile: data.profile,
                paired_fraction: data.paired_fraction,
                small_petal_fraction: data.small_petal_fraction,
                wall_time,
            },
            data.value,
        )
    })
}

/// Records plus summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
}

impl RunOutput {
    pub fn trials_csv(&self) -> String {
        records_to_csv(&self.records)
    }

    pub fn summary_json(&self) -> String {
        self.summary.to_json()
    }

    /// Writes `trials.csv` and `summary.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trials.csv"), self.trials_csv())?;
        std::fs::write(dir.join("summary.json"), self.summary_json())
    }

    pub fn check_rejection(&self) -> Result<(), ExperimentError> {
        let groups: Vec<&GroupStats> = if self.summary.rows.is_empty() {
            vec![&self.summary.overall]
        } else {
            self.summary.rows.iter().map(|r| &r.stats).collect()
        };
        for g in groups {
            if g.rejection_rate > MAX_REJECTION_RATE {
                return Err(ExperimentError::ExcessiveRejection {
                    degree: g.degree,
                    rate: g.rejection_rate,
                    reasons: format!("{:?}", g.rejection_reasons),
                    partial: Box::new(self.clone()),
                });
            }
        }
        Ok(())
    }
}

/// Settings shared by the trial-based experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Simulate {
        model: ModelKind,
        degree: usize,
        trials: u64,
    },
    Sweep {
        model: ModelKind,
        degrees: Vec<usize>,
        trials: u64,
    },
    Clt {
        size: usize,
        trials: u64,
    },
    ChebyshevTable {
        max_degree: usize,
        step: usize,
        trials: u64,
    },
    Pairing {
        model: ModelKind,
        degree: usize,
        trials: u64,
        r: f64,
        trace_petals: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub master_seed: u64,
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        let model_ok = |m: ModelKind| {
            if m == ModelKind::IidCustomDensity {
                Err(ExperimentError::Config(
                    "iid_custom_density needs a density and is library-only".into(),
                ))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::Simulate { model, degree, trials }
            | Experiment::Pairing {
                model, degree, trials, ..
            } => {
                model_ok(*model)?;
                if *degree < 2 {
                    return bad("degree must be at least 2");
                }
                if *trials == 0 {
                    return bad("trials must be at least 1");
                }
                if let Experiment::Pairing { r, .. } = &self.experiment {
                    if !(*r > 0.0 && r.is_finite()) {
                        return bad("r must be positive");
                    }
                }
            }
            Experiment::Sweep { model, degrees, trials } => {
                model_ok(*model)?;
                if degrees.is_empty() || degrees[0] < 2 {
                    return bad("degrees must be at least 2");
                }
                if degrees.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("degree sweep must be strictly increasing");
                }
                if *trials == 0 {
                    return bad("trials must be at least 1");
                }
            }
            Experiment::Clt { size, trials } => {
                if *size < 2 {
                    return bad("size must be at least 2 (X_1 has zero variance)");
                }
                if *trials == 0 {
                    return bad("trials must be at least 1");
                }
            }
            Experiment::ChebyshevTable {
                max_degree,
                step,
                trials,
            } => {
                if *step < 2 || *max_degree < *step {
                    return bad("need 2 <= step <= max-degree");
                }
                if *trials < CHEBYSHEV_MIN_TRIALS {
                    return bad("chebyshev-table needs at least 30 trials");
                }
            }
        }
        Ok(())
    }
}

/// Validates and runs a configuration. Rejection-rate limits are checked by
/// the experiments that define them.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    cfg.validate()?;
    let (seed, jobs) = (cfg.master_seed, cfg.jobs);
    match &cfg.experiment {
        Experiment::Simulate { model, degree, trials } => simulate(*model, *degree, *trials, seed, jobs),
        Experiment::Sweep { model, degrees, trials } => sweep_experiment(*model, degrees, *trials, seed, jobs),
        Experiment::Clt { size, trials } => clt_experiment(*size, *trials, seed, jobs),
        Experiment::ChebyshevTable {
            max_degree,
            step,
            trials,
        } => chebyshev_table(*max_degree, *step, *trials, seed, jobs),
        Experiment::Pairing {
            model,
            degree,
            trials,
            r,
            trace_petals,
        } => pairing_experiment(*model, *degree, *trials, *r, *trace_petals, seed, jobs),
    }
}
