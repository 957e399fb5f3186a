//! Parameter sweeps, complexity timing and CSV reports.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use super::{run_trial, Algorithm, EstimatorSettings, TrialResult};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "axis,axis_value,algorithm,nmse_mean,nmse_stderr,trials,runtime_ms_mean,iters_mean";

/// Environment variable capping the worker pool used for trials.
const THREADS_ENV: &str = "RIS_EST_THREADS";

/// Configuration parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Pilots,
    SnrDb,
    Users,
    /// Side length of a square RIS.
    RisSize,
    /// Side length of a square BS array.
    BsSize,
    CommonColumns,
    PathsPerUser,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::Pilots,
        Axis::SnrDb,
        Axis::Users,
        Axis::RisSize,
        Axis::BsSize,
        Axis::CommonColumns,
        Axis::PathsPerUser,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Pilots => "pilots",
            Axis::SnrDb => "snr_db",
            Axis::Users => "users",
            Axis::RisSize => "ris_size",
            Axis::BsSize => "bs_size",
            Axis::CommonColumns => "common_columns",
            Axis::PathsPerUser => "paths_per_user",
        }
    }

    /// `cfg` with this axis set to `value`.
    pub fn apply(self, cfg: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut c = cfg.clone();
        if self == Axis::SnrDb {
            c.snr_db = value;
            return Ok(c);
        }
        if !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
            return Err(Error::InvalidConfig {
                field: "values",
                reason: format!("axis {} needs nonnegative integers, got {value}", self.name()),
            });
        }
        let v = value as usize;
        match self {
            Axis::Pilots => c.pilots = v,
            Axis::Users => c.users = v,
            Axis::RisSize => (c.ris_rows, c.ris_cols) = (v, v),
            Axis::BsSize => (c.bs_rows, c.bs_cols) = (v, v),
            Axis::CommonColumns => c.common_columns = v,
            Axis::PathsPerUser => c.paths_ris_user = v,
            Axis::SnrDb => unreachable!(),
        }
        Ok(c)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig {
                field: "axis",
                reason: format!("unknown axis `{s}`"),
            })
    }
}

/// Statistics for one (axis value, algorithm) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub nmse_mean: f64,
    /// Sample standard deviation over `√trials`; zero for a single trial.
    pub nmse_stderr: f64,
    pub trials: usize,
    pub runtime_ms_mean: f64,
    pub iters_mean: f64,
    /// Per-trial NMSE in ascending trial order.
    pub nmse_samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Value-major, algorithms in request order.
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn row(&self, axis_value: f64, algorithm: Algorithm) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.algorithm == algorithm)
    }

    /// CSV with the measured runtimes.
    pub fn to_csv(&self) -> String {
        self.render(true)
    }

    /// CSV with the runtime column zeroed, so that identical runs give identical bytes.
    pub fn to_csv_without_timing(&self) -> String {
        self.render(false)
    }

    fn render(&self, timing: bool) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let runtime = if timing { r.runtime_ms_mean } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{:.9e},{:.9e},{},{:.9e},{:.9e}",
                self.axis.name(),
                r.axis_value,
                r.algorithm,
                r.nmse_mean,
                r.nmse_stderr,
                r.trials,
                runtime,
                r.iters_mean
            );
        }
        out
    }
}

/// Mean and standard error, summed in slice order.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(axis_value: f64, algorithms: &[Algorithm], results: &[TrialResult]) -> Vec<SweepRow> {
    algorithms
        .iter()
        .enumerate()
        .map(|(k, &algorithm)| {
            let samples: Vec<f64> = results.iter().map(|r| r.outcomes[k].nmse).collect();
            let ms: Vec<f64> = results.iter().map(|r| r.outcomes[k].seconds * 1e3).collect();
            let iters: Vec<f64> = results.iter().map(|r| r.outcomes[k].mean_iterations).collect();
            let (nmse_mean, nmse_stderr) = mean_stderr(&samples);
            SweepRow {
                axis_value,
                algorithm,
                nmse_mean,
                nmse_stderr,
                trials: results.len(),
                runtime_ms_mean: mean_stderr(&ms).0,
                iters_mean: mean_stderr(&iters).0,
                nmse_samples: samples,
            }
        })
        .collect()
}

/// Runs `f` inside a pool capped by `RIS_EST_THREADS` when set.
fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn check_request(values: &[f64], trials: usize, algorithms: &[Algorithm]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidConfig {
            field: "values",
            reason: "at least one axis value is required".into(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidConfig {
            field: "trials",
            reason: "must be at least 1".into(),
        });
    }
    if algorithms.is_empty() {
        return Err(Error::InvalidConfig {
            field: "algorithms",
            reason: "empty algorithm list".into(),
        });
    }
    Ok(())
}

/// Runs `trials` trials per axis value, in parallel, and aggregates in trial order.
///
/// Trial `t` at every axis value uses the same seed streams, so neighbouring axis
/// values are compared on paired draws wherever the dimensions allow.
pub fn sweep(
    cfg: &SystemConfig,
    settings: &EstimatorSettings,
    axis: Axis,
    values: &[f64],
    trials: usize,
    algorithms: &[Algorithm],
) -> Result<SweepReport> {
    check_request(values, trials, algorithms)?;
    let configs = values
        .iter()
        .map(|&v| {
            let c = axis.apply(cfg, v)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(values.len() * algorithms.len());
    for (c, &v) in configs.iter().zip(values) {
        let results = with_worker_pool(|| {
            (0..trials as u64)
                .into_par_iter()
                .map(|t| run_trial(c, settings, algorithms, t))
                .collect::<Result<Vec<_>>>()
        })??;
        rows.extend(aggregate(v, algorithms, &results));
    }
    Ok(SweepReport {
        axis,
        values: values.to_vec(),
        rows,
    })
}

/// Mean estimator wall time of `pci` and `omp` against the number of RIS-user paths.
///
/// Trials run one after another so that timings are not distorted by contention.
pub fn bench_complexity(
    cfg: &SystemConfig,
    settings: &EstimatorSettings,
    path_counts: &[usize],
    trials: usize,
) -> Result<SweepReport> {
    let algorithms = [Algorithm::Pci, Algorithm::Omp];
    let values: Vec<f64> = path_counts.iter().map(|&p| p as f64).collect();
    check_request(&values, trials, &algorithms)?;
    let mut rows = Vec::new();
    for &v in &values {
        let c = Axis::PathsPerUser.apply(cfg, v)?;
        c.validate()?;
        let results = (0..trials as u64)
            .map(|t| run_trial(&c, settings, &algorithms, t))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(aggregate(v, &algorithms, &results));
    }
    Ok(SweepReport {
        axis: Axis::PathsPerUser,
        values,
        rows,
    })
}
