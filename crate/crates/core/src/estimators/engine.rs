//! UAMP-SBL iterations in multiple-measurement form.
//!
//! The sensing matrix is factored once as `S = U diag(s) Vᴴ`; every solve then works
//! on `z = Uᴴ y = ψ x + n` with `ψ = Uᴴ S`. Each column of the measurement matrix
//! carries its own noise precision, shape parameter and message variances, so a
//! single column reproduces the single-vector algorithm exactly, and several
//! columns advance in lock step so that their precisions can be coupled.
//!
//! The data are divided by their RMS value before iterating and the outputs are
//! mapped back, which makes the result independent of the overall signal scale.

use num_complex::Complex64;

use super::support::{auto_cluster, identify_common_columns_fixed};
use super::{store_conjugated_row, CommonSupport, EstimateResult, PrecisionMatrix, SblHyperparams};
use crate::error::{Error, Result};
use crate::measurement::MeasurementSet;
use crate::numerics::{economy_svd, norm_sqr, ComplexMatrix};

/// How per-user precisions interact after the fast scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Users are solved independently.
    None,
    /// Pool precisions over users on the `common` columns that appear most often
    /// among each user's `paths` smallest precisions.
    Fixed { paths: usize, common: usize },
    /// Freeze precisions of auto-detected user clusters at their cluster mean.
    Cluster { skip: f64, grow: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmvOutcome {
    /// N × J estimates, one column per measurement vector.
    pub x: ComplexMatrix,
    pub gamma: PrecisionMatrix,
    pub beta: Vec<f64>,
    pub shape: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub common: CommonSupport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmvOutcome {
    pub x: Vec<Complex64>,
    pub gamma: Vec<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// UAMP-SBL solver bound to one sensing matrix.
#[derive(Debug, Clone)]
pub struct UampSbl {
    measurements: usize,
    unknowns: usize,
    /// T × k left singular vectors.
    u: ComplexMatrix,
    /// k × N.
    psi: ComplexMatrix,
    /// N × k.
    psi_h: ComplexMatrix,
    /// Squared singular values.
    varpi: Vec<f64>,
}

impl UampSbl {
    pub fn new(sensing: &ComplexMatrix) -> Result<Self> {
        let (t, n) = sensing.shape();
        if t == 0 || n == 0 {
            return Err(Error::InvalidDimension("empty sensing matrix".into()));
        }
        let svd = economy_svd(sensing)?;
        if svd.singular_values[0] == 0.0 {
            return Err(Error::InvalidDimension("sensing matrix is zero".into()));
        }
        let psi = svd.u.adjoint_matmul(sensing);
        let psi_h = psi.adjoint();
        let varpi = svd.singular_values.iter().map(|s| s * s).collect();
        Ok(Self {
            measurements: t,
            unknowns: n,
            u: svd.u,
            psi,
            psi_h,
            varpi,
        })
    }

    pub fn measurements(&self) -> usize {
        self.measurements
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// `z = Uᴴ y` per column, plus the energy of `y` outside the range of `U`.
    ///
    /// When `T > N` the economy factor drops `T − N` coordinates on which `ψ`
    /// vanishes; their only contribution to the algorithm is this residual energy
    /// in the noise-precision update.
    fn transform(&self, y: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>) {
        let z = self.u.adjoint_matmul(y);
        let k = self.varpi.len();
        let tail = (0..y.cols())
            .map(|j| {
                if k < self.measurements {
                    (norm_sqr(&y.column(j)) - norm_sqr(&z.column(j))).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        (z, tail)
    }

    /// Joint solve for a T × J measurement matrix.
    pub fn solve(&self, y: &ComplexMatrix, hp: &SblHyperparams, coupling: Coupling) -> Result<MmvOutcome> {
        if y.rows() != self.measurements {
            return Err(Error::DimensionMismatch(format!(
                "measurement has {} rows, sensing matrix has {}",
                y.rows(),
                self.measurements
            )));
        }
        let j_count = y.cols();
        let n = self.unknowns;
        let k = self.varpi.len();
        let t_f = self.measurements as f64;
        let n_f = n as f64;
        // One common scale per problem so the unit initialization of γ and t_x
        // matches the data; a shared factor leaves the coupling rules unaffected.
        let scale = (y.frobenius_norm_sqr() / (y.rows() * j_count.max(1)) as f64).sqrt();
        let unit = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
        let (z, tail) = self.transform(&y.scale(Complex64::new(1.0 / unit, 0.0)));

        let mut x = ComplexMatrix::zeros(n, j_count);
        let mut e = ComplexMatrix::zeros(k, j_count);
        let mut p = ComplexMatrix::zeros(k, j_count);
        let mut gamma = PrecisionMatrix::filled(n, j_count, 1.0);
        let mut beta = vec![1.0; j_count];
        let mut shape = vec![hp.initial_shape; j_count];
        let mut tx = vec![1.0; j_count];
        let mut common = CommonSupport::None;
        let mut iterations = 0;
        let mut converged = false;

        let mut resid = vec![0.0; j_count];
        let mut vr_sum = vec![0.0; j_count];
        let mut tq_den = vec![0.0; j_count];
        let mut x_new = ComplexMatrix::zeros(n, j_count);
        let mut tx_new = vec![0.0; j_count];

        while iterations < hp.max_iterations {
            let i = iterations;
            let psi_x = self.psi.matmul(&x);

            resid.iter_mut().for_each(|v| *v = 0.0);
            vr_sum.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..k {
                for jj in 0..j_count {
                    let tp = self.varpi[r] * tx[jj];
                    let pv = psi_x[(r, jj)] - e[(r, jj)] * tp;
                    p[(r, jj)] = pv;
                    let denom = 1.0 + beta[jj] * tp;
                    let zr = z[(r, jj)];
                    let rv = (zr * (beta[jj] * tp) + pv) / denom;
                    resid[jj] += (zr - rv).norm_sqr();
                    vr_sum[jj] += tp / denom;
                }
            }
            for jj in 0..j_count {
                beta[jj] = t_f / (resid[jj] + tail[jj] + vr_sum[jj]);
            }

            tq_den.iter_mut().for_each(|v| *v = 0.0);
            for r in 0..k {
                for jj in 0..j_count {
                    let tp = self.varpi[r] * tx[jj];
                    let ts = 1.0 / (tp + 1.0 / beta[jj]);
                    e[(r, jj)] = (z[(r, jj)] - p[(r, jj)]) * ts;
                    tq_den[jj] += self.varpi[r] * ts;
                }
            }
            let tq: Vec<f64> = tq_den.iter().map(|d| n_f / d).collect();

            let back = self.psi_h.matmul(&e);
            tx_new.iter_mut().for_each(|v| *v = 0.0);
            for row in 0..n {
                for jj in 0..j_count {
                    let shrink = 1.0 / (1.0 + tq[jj] * gamma.get(row, jj));
                    let q = x[(row, jj)] + back[(row, jj)] * tq[jj];
                    x_new[(row, jj)] = q * shrink;
                    tx_new[jj] += shrink;
                }
            }
            for jj in 0..j_count {
                tx_new[jj] *= tq[jj] / n_f;
            }
            for row in 0..n {
                for jj in 0..j_count {
                    let g = (2.0 * shape[jj] + 1.0) / (x_new[(row, jj)].norm_sqr() + tx_new[jj]);
                    gamma.set(row, jj, g);
                }
            }

            match coupling {
                Coupling::None => {}
                Coupling::Fixed { paths, common: pc } => {
                    if i == hp.fast_scan_iteration {
                        common = CommonSupport::Fixed(identify_common_columns_fixed(&gamma, paths, pc));
                    } else if i > hp.fast_scan_iteration {
                        if let CommonSupport::Fixed(cols) = &common {
                            for &c in cols {
                                let row = gamma.row_mut(c);
                                let pooled = pooled_precision(row);
                                row.iter_mut().for_each(|g| *g = pooled);
                            }
                        }
                    }
                }
                Coupling::Cluster { skip, grow } => {
                    if i == hp.fast_scan_iteration {
                        common = CommonSupport::Clustered(auto_cluster(&gamma, skip, grow));
                    } else if i > hp.fast_scan_iteration {
                        if let CommonSupport::Clustered(map) = &common {
                            for (g, &c) in gamma.data.iter_mut().zip(map.as_slice()) {
                                if c != 0.0 {
                                    *g = c;
                                }
                            }
                        }
                    }
                }
            }

            for jj in 0..j_count {
                shape[jj] = auto_shape(&gamma, jj);
            }

            if !x_new.is_finite()
                || gamma.as_slice().iter().any(|g| !(g.is_finite() && *g > 0.0))
                || beta.iter().any(|b| !(b.is_finite() && *b > 0.0))
            {
                return Err(Error::Divergence {
                    iteration: i,
                    detail: "non-finite or non-positive solver state".into(),
                });
            }

            let diff = x_new.sub(&x).frobenius_norm_sqr();
            let size = x_new.frobenius_norm_sqr();
            std::mem::swap(&mut x, &mut x_new);
            std::mem::swap(&mut tx, &mut tx_new);
            iterations += 1;
            let done = if size == 0.0 { diff == 0.0 } else { diff / size <= hp.threshold };
            if done {
                converged = true;
                break;
            }
        }

        let unit2 = unit * unit;
        let x = x.scale(Complex64::new(unit, 0.0));
        let gamma = PrecisionMatrix::from_fn(n, j_count, |r, c| gamma.get(r, c) / unit2);
        let beta = beta.into_iter().map(|b| b / unit2).collect();
        if let CommonSupport::Clustered(map) = &mut common {
            *map = PrecisionMatrix::from_fn(n, j_count, |r, c| map.get(r, c) / unit2);
        }
        Ok(MmvOutcome {
            x,
            gamma,
            beta,
            shape,
            iterations,
            converged,
            common,
        })
    }

    pub fn solve_single(&self, y: &[Complex64], hp: &SblHyperparams) -> Result<SmvOutcome> {
        let out = self.solve(&ComplexMatrix::from_column(y), hp, Coupling::None)?;
        Ok(SmvOutcome {
            x: out.x.into_vec(),
            gamma: out.gamma.as_slice().to_vec(),
            beta: out.beta[0],
            iterations: out.iterations,
            converged: out.converged,
        })
    }
}

/// Precision of the averaged variance, `J / Σ_j γ_j⁻¹`.
///
/// Users see the same column through independently faded gains, so their
/// precisions can differ by orders of magnitude. An arithmetic mean of precisions
/// follows the weakest user and shrinks everyone else's entry towards zero; the
/// pooled variance keeps the common prior on the scale of the typical user.
fn pooled_precision(gamma: &[f64]) -> f64 {
    gamma.len() as f64 / gamma.iter().map(|g| 1.0 / g).sum::<f64>()
}

/// `ε = ½ √(log mean γ − mean log γ)`, clamped at zero.
fn auto_shape(gamma: &PrecisionMatrix, col: usize) -> f64 {
    let n = gamma.rows() as f64;
    let (sum, log_sum) = (0..gamma.rows())
        .map(|r| gamma.get(r, col))
        .fold((0.0, 0.0), |(s, l), g| (s + g, l + g.ln()));
    let mean_log = log_sum / n;
    let arg = (sum / n).ln() - mean_log;
    debug_assert!(
        arg >= -1e-12 * (1.0 + mean_log.abs()) || !arg.is_finite(),
        "Jensen gap negative: {arg}"
    );
    0.5 * arg.max(0.0).sqrt()
}

/// Single-vector UAMP-SBL for `y = S x + n`.
pub fn uamp_sbl(y: &[Complex64], sensing: &ComplexMatrix, hp: &SblHyperparams) -> Result<SmvOutcome> {
    hp.validate()?;
    UampSbl::new(sensing)?.solve_single(y, hp)
}

/// Plain UAMP-SBL applied to every column of every user's observation, ignoring
/// all shared structure.
pub fn uamp_sbl_channels(meas: &MeasurementSet, hp: &SblHyperparams) -> Result<EstimateResult> {
    hp.validate()?;
    let solver = UampSbl::new(&meas.sensing)?;
    let n = meas.sensing.cols();
    let m = meas.observations.first().map_or(0, |y| y.cols());
    let mut angular = Vec::with_capacity(meas.users());
    let mut iterations = Vec::with_capacity(meas.users() * m);
    for y in &meas.observations {
        if y.cols() != m {
            return Err(Error::DimensionMismatch("users disagree on BS antenna count".into()));
        }
        let mut h = ComplexMatrix::zeros(m, n);
        for col in 0..m {
            let out = solver.solve_single(&y.column(col), hp)?;
            store_conjugated_row(&mut h, col, &out.x);
            iterations.push(out.iterations);
        }
        angular.push(h);
    }
    Ok(EstimateResult {
        angular,
        iterations,
        row_support: (0..m).collect(),
        common: Vec::new(),
    })
}
