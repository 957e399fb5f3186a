//! Channel estimators.
//!
//! [`uampsbl_pci`] is the structured estimator: it acquires the shared row support,
//! then runs a joint multi-user UAMP-SBL per row and couples the users' precisions
//! once a fast scan has located (partially) common columns. The remaining estimators
//! are reference points: per-column [`uamp_sbl`], greedy [`omp_baseline`], the
//! support-aware [`oracle_ls`] bound and the dense [`classic_sbl_oracle`].

mod classic;
mod engine;
mod omp;
mod oracle;
mod pci;
mod support;

pub use classic::{classic_sbl_oracle, CLASSIC_SHAPE};
pub use engine::{uamp_sbl, uamp_sbl_channels, Coupling, MmvOutcome, SmvOutcome, UampSbl};
pub use omp::{omp_baseline, omp_column};
pub use oracle::oracle_ls;
pub use pci::{uampsbl_pci, CommonColumnMode};
pub use support::{acquire_row_support, auto_cluster, identify_common_columns_fixed};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Ridge added to rank-deficient normal equations (scaled by the largest diagonal entry).
pub const LS_RIDGE: f64 = 1e-12;

/// Tuning knobs shared by the SBL family.
#[derive(Debug, Clone, PartialEq)]
pub struct SblHyperparams {
    /// Gamma shape `ε` at iteration zero; later iterations auto-tune it.
    pub initial_shape: f64,
    /// Relative-change threshold `δ_th` on the estimate.
    pub threshold: f64,
    /// Iteration cap `I`.
    pub max_iterations: usize,
    /// Iteration `I_fs` at which common columns are identified.
    pub fast_scan_iteration: usize,
    /// `V₁`: rows whose smallest precision exceeds `V₁·min γ` are not clustered.
    pub cluster_skip: f64,
    /// `V₂`: a cluster grows while the next precision is below `V₂` times the running mean.
    pub cluster_grow: f64,
}

impl SblHyperparams {
    /// Plain UAMP-SBL: `ε⁰ = 0.01`.
    pub fn uamp_default() -> Self {
        Self {
            initial_shape: 0.01,
            threshold: 1e-4,
            max_iterations: 200,
            fast_scan_iteration: 10,
            cluster_skip: 5.0,
            cluster_grow: 5.0,
        }
    }

    /// UAMPSBL-PCI: `ε⁰ = 1`.
    pub fn pci_default() -> Self {
        Self {
            initial_shape: 1.0,
            ..Self::uamp_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(Error::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.initial_shape >= 0.0 && self.initial_shape.is_finite()) {
            return bad("initial_shape", "must be finite and nonnegative");
        }
        if !(self.threshold > 0.0) {
            return bad("threshold", "must be positive");
        }
        if self.fast_scan_iteration < 1 {
            return bad("fast_scan_iteration", "must be at least 1");
        }
        if self.max_iterations < self.fast_scan_iteration {
            return bad("max_iterations", "must be at least fast_scan_iteration");
        }
        if !(self.cluster_skip > 1.0) {
            return bad("cluster_skip", "must exceed 1");
        }
        if !(self.cluster_grow > 1.0) {
            return bad("cluster_grow", "must exceed 1");
        }
        Ok(())
    }
}

/// Dense real matrix of precisions, row-major, one column per user.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PrecisionMatrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Common-column knowledge gathered for one processed row.
#[derive(Debug, Clone, PartialEq)]
pub enum CommonSupport {
    /// Fast scan never ran (converged earlier, or coupling disabled).
    None,
    /// Columns shared by all users.
    Fixed(Vec<usize>),
    /// Nonzero entries give the coupled precision of `(column, user)`.
    Clustered(PrecisionMatrix),
}

/// Output of every channel estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Estimated angular channel `Ȟ_j` of each user, M × N.
    pub angular: Vec<ComplexMatrix>,
    /// Iterations (SBL) or selected atoms (OMP) per solved subproblem.
    pub iterations: Vec<usize>,
    /// Rows that were estimated; all others are zero.
    pub row_support: Vec<usize>,
    /// Per processed row, in `row_support` order (PCI only).
    pub common: Vec<CommonSupport>,
}

impl EstimateResult {
    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        }
    }
}

/// Writes `x` (a column of `Ȟᴴ`) into row `row` of `Ȟ`.
pub(crate) fn store_conjugated_row(target: &mut ComplexMatrix, row: usize, x: &[num_complex::Complex64]) {
    for (dst, v) in target.row_mut(row).iter_mut().zip(x) {
        *dst = v.conj();
    }
}
