//! Seeded Monte-Carlo trials: data generation, estimator runs, NMSE and timing.

mod sweep;

pub use sweep::{bench_complexity, sweep, Axis, SweepReport, SweepRow, CSV_HEADER};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::channel::{assemble_channels, sample_paths, ChannelRealization, Dictionaries, Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    acquire_row_support, omp_baseline, oracle_ls, uamp_sbl_channels, uampsbl_pci, CommonColumnMode, EstimateResult,
    SblHyperparams,
};
use crate::measurement::{calibrate_noise, make_ris_schedule, observe, to_cs_model, MeasurementSet, RisSchedule};
use crate::numerics::ComplexMatrix;
use crate::rng::{stream, Purpose};

/// Estimators the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// UAMPSBL-PCI with the mode matching the scenario: fixed `P_c` in scenario one,
    /// auto-clustering in scenario two.
    Pci,
    /// UAMPSBL-PCI forced to fixed coupling with the given number of common columns.
    PciFixed(usize),
    /// UAMPSBL-PCI forced to auto-clustering.
    PciCluster,
    UampSbl,
    Omp,
    OracleLs,
}

impl Algorithm {
    pub fn name(&self) -> String {
        match self {
            Algorithm::Pci => "pci".into(),
            Algorithm::PciFixed(pc) => format!("pci_fixed:{pc}"),
            Algorithm::PciCluster => "pci_cluster".into(),
            Algorithm::UampSbl => "uamp_sbl".into(),
            Algorithm::Omp => "omp".into(),
            Algorithm::OracleLs => "oracle_ls".into(),
        }
    }

    /// The four estimators compared in the ordering experiments.
    pub fn standard_set() -> Vec<Algorithm> {
        vec![Algorithm::Pci, Algorithm::UampSbl, Algorithm::Omp, Algorithm::OracleLs]
    }

    /// Parses a comma-separated list such as `pci,uamp_sbl,omp`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        let list: Vec<Algorithm> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if list.is_empty() {
            return Err(Error::InvalidConfig {
                field: "algorithms",
                reason: "empty algorithm list".into(),
            });
        }
        Ok(list)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "pci" => return Ok(Algorithm::Pci),
            "pci_cluster" => return Ok(Algorithm::PciCluster),
            "uamp_sbl" | "uamp" => return Ok(Algorithm::UampSbl),
            "omp" => return Ok(Algorithm::Omp),
            "oracle_ls" | "oracle" => return Ok(Algorithm::OracleLs),
            _ => {}
        }
        if let Some(pc) = s.strip_prefix("pci_fixed:") {
            if let Ok(pc) = pc.parse() {
                return Ok(Algorithm::PciFixed(pc));
            }
        }
        Err(Error::InvalidConfig {
            field: "algorithms",
            reason: format!("unknown algorithm `{s}`"),
        })
    }
}

/// Hyperparameters of every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSettings {
    pub pci: SblHyperparams,
    pub uamp: SblHyperparams,
    /// OMP atoms per column; `None` uses `P_j`.
    pub omp_sparsity: Option<usize>,
    pub omp_residual_tol: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            pci: SblHyperparams::pci_default(),
            uamp: SblHyperparams::uamp_default(),
            omp_sparsity: None,
            omp_residual_tol: 1e-3,
        }
    }
}

impl EstimatorSettings {
    pub const KEYS: [&'static str; 9] = [
        "pci_initial_shape",
        "uamp_initial_shape",
        "threshold",
        "max_iterations",
        "fast_scan_iteration",
        "cluster_skip",
        "cluster_grow",
        "omp_sparsity",
        "omp_residual_tol",
    ];

    /// Sets one knob from text; shared SBL knobs apply to both SBL estimators.
    /// Returns `Ok(false)` for an unknown key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let Some(&field) = Self::KEYS.iter().find(|k| **k == key) else {
            return Ok(false);
        };
        let v = value.trim();
        let real = || -> Result<f64> {
            v.parse().map_err(|_| Error::InvalidConfig {
                field,
                reason: format!("expected a number, got `{v}`"),
            })
        };
        let int = || -> Result<usize> {
            v.parse().map_err(|_| Error::InvalidConfig {
                field,
                reason: format!("expected a nonnegative integer, got `{v}`"),
            })
        };
        match field {
            "pci_initial_shape" => self.pci.initial_shape = real()?,
            "uamp_initial_shape" => self.uamp.initial_shape = real()?,
            "threshold" => {
                let x = real()?;
                self.pci.threshold = x;
                self.uamp.threshold = x;
            }
            "max_iterations" => {
                let x = int()?;
                self.pci.max_iterations = x;
                self.uamp.max_iterations = x;
            }
            "fast_scan_iteration" => {
                let x = int()?;
                self.pci.fast_scan_iteration = x;
                self.uamp.fast_scan_iteration = x;
            }
            "cluster_skip" => self.pci.cluster_skip = real()?,
            "cluster_grow" => self.pci.cluster_grow = real()?,
            "omp_sparsity" if v == "paths_ris_user" => self.omp_sparsity = None,
            "omp_sparsity" => self.omp_sparsity = Some(int()?),
            "omp_residual_tol" => self.omp_residual_tol = real()?,
            _ => unreachable!("key list and match arms disagree"),
        }
        Ok(true)
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("pci_initial_shape", self.pci.initial_shape.to_string()),
            ("uamp_initial_shape", self.uamp.initial_shape.to_string()),
            ("threshold", self.pci.threshold.to_string()),
            ("max_iterations", self.pci.max_iterations.to_string()),
            ("fast_scan_iteration", self.pci.fast_scan_iteration.to_string()),
            ("cluster_skip", self.pci.cluster_skip.to_string()),
            ("cluster_grow", self.pci.cluster_grow.to_string()),
            (
                "omp_sparsity",
                self.omp_sparsity.map_or_else(|| "paths_ris_user".into(), |s| s.to_string()),
            ),
            ("omp_residual_tol", self.omp_residual_tol.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.pci.validate()?;
        self.uamp.validate()?;
        if !(self.omp_residual_tol >= 0.0) {
            return Err(Error::InvalidConfig {
                field: "omp_residual_tol",
                reason: "must be nonnegative".into(),
            });
        }
        Ok(())
    }
}

/// Everything drawn for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub realization: ChannelRealization,
    pub schedule: RisSchedule,
    /// Received pilots `Y_j`, M × T.
    pub raw: Vec<ComplexMatrix>,
    pub measurement: MeasurementSet,
}

/// Draws the channel, RIS schedule and noisy observations of trial `trial`.
///
/// `snr_db = +inf` gives noiseless observations.
pub fn generate_trial(cfg: &SystemConfig, trial: u64) -> Result<TrialData> {
    cfg.validate()?;
    let dicts = Dictionaries::for_config(cfg)?;
    let paths = sample_paths(cfg, &mut stream(cfg.seed, trial, Purpose::Paths))?;
    let realization = assemble_channels(&paths, cfg, &dicts)?;
    let schedule = make_ris_schedule(
        cfg.ris_elements(),
        cfg.pilots,
        &mut stream(cfg.seed, trial, Purpose::Schedule),
    )?;
    let noise_variance = calibrate_noise(cfg.snr_db, &realization, &schedule)?;
    let raw = observe(
        &realization,
        &schedule,
        noise_variance,
        &mut stream(cfg.seed, trial, Purpose::Noise),
    )?;
    let measurement = to_cs_model(&raw, &schedule, &dicts, noise_variance)?;
    Ok(TrialData {
        realization,
        schedule,
        raw,
        measurement,
    })
}

/// Mean over users of `‖Ĥ_j − H_j‖²_F / ‖H_j‖²_F` on the angular channels.
pub fn nmse(estimate: &[ComplexMatrix], truth: &ChannelRealization) -> Result<f64> {
    if estimate.len() != truth.angular.len() || estimate.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimated users, {} true users",
            estimate.len(),
            truth.angular.len()
        )));
    }
    let mut total = 0.0;
    for (j, (e, t)) in estimate.iter().zip(&truth.angular).enumerate() {
        if e.shape() != t.shape() {
            return Err(Error::DimensionMismatch(format!(
                "user {j}: estimate {:?}, truth {:?}",
                e.shape(),
                t.shape()
            )));
        }
        let denom = t.frobenius_norm_sqr();
        if !(denom > 0.0) {
            return Err(Error::UndefinedMetric(format!("user {j} has a zero channel")));
        }
        total += e.sub(t).frobenius_norm_sqr() / denom;
    }
    Ok(total / estimate.len() as f64)
}

/// Runs one estimator on prepared data.
pub fn run_algorithm(
    algorithm: Algorithm,
    cfg: &SystemConfig,
    settings: &EstimatorSettings,
    data: &TrialData,
) -> Result<EstimateResult> {
    let meas = &data.measurement;
    let pci = |mode| {
        let rows = acquire_row_support(&meas.observations, cfg.paths_bs_ris);
        uampsbl_pci(meas, cfg, &settings.pci, &rows, mode)
    };
    match algorithm {
        Algorithm::Pci => match cfg.scenario {
            Scenario::One => pci(CommonColumnMode::FixedPc(cfg.common_columns)),
            Scenario::Two => pci(CommonColumnMode::AutoCluster),
        },
        Algorithm::PciFixed(pc) => pci(CommonColumnMode::FixedPc(pc)),
        Algorithm::PciCluster => pci(CommonColumnMode::AutoCluster),
        Algorithm::UampSbl => uamp_sbl_channels(meas, &settings.uamp),
        Algorithm::Omp => omp_baseline(
            meas,
            settings.omp_sparsity.unwrap_or(cfg.paths_ris_user),
            settings.omp_residual_tol,
        ),
        Algorithm::OracleLs => oracle_ls(
            meas,
            &data.realization.row_support,
            &data.realization.column_supports,
        ),
    }
}

/// Score of one estimator in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOutcome {
    pub algorithm: Algorithm,
    pub nmse: f64,
    /// Estimator wall time only; data generation is excluded.
    pub seconds: f64,
    pub mean_iterations: f64,
    pub iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub trial: u64,
    /// In the order the algorithms were requested.
    pub outcomes: Vec<AlgorithmOutcome>,
}

impl TrialResult {
    pub fn outcome(&self, algorithm: Algorithm) -> Option<&AlgorithmOutcome> {
        self.outcomes.iter().find(|o| o.algorithm == algorithm)
    }
}

/// Generates trial `trial` and runs every requested estimator on the same data.
pub fn run_trial(
    cfg: &SystemConfig,
    settings: &EstimatorSettings,
    algorithms: &[Algorithm],
    trial: u64,
) -> Result<TrialResult> {
    let with_context = |e: Error| Error::Trial {
        trial,
        source: Box::new(e),
    };
    settings.validate().map_err(with_context)?;
    let data = generate_trial(cfg, trial).map_err(with_context)?;
    let outcomes = algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let est = run_algorithm(algorithm, cfg, settings, &data)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(AlgorithmOutcome {
                algorithm,
                nmse: nmse(&est.angular, &data.realization)?,
                seconds,
                mean_iterations: est.mean_iterations(),
                iterations: est.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(with_context)?;
    Ok(TrialResult {
        seed: cfg.seed,
        trial,
        outcomes,
    })
}
