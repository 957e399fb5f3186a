//! Orthogonal matching pursuit over every observation column.

use num_complex::Complex64;

use super::{store_conjugated_row, EstimateResult, LS_RIDGE};
use crate::error::{Error, Result};
use crate::measurement::MeasurementSet;
use crate::numerics::{inner, least_squares, norm_sqr, ComplexMatrix};

/// Greedy recovery of one column. Returns the estimate and the number of atoms used.
///
/// Atoms are chosen by normalized correlation with the residual, ties to the lower
/// index. Stops after `sparsity` atoms or once `‖r‖ ≤ residual_tol·‖y‖`.
pub fn omp_column(
    y: &[Complex64],
    sensing: &ComplexMatrix,
    sparsity: usize,
    residual_tol: f64,
) -> Result<(Vec<Complex64>, usize)> {
    let (t, n) = sensing.shape();
    if y.len() != t {
        return Err(Error::DimensionMismatch(format!("y has {} entries, sensing has {t} rows", y.len())));
    }
    let norms: Vec<f64> = (0..n).map(|c| norm_sqr(&sensing.column(c)).sqrt()).collect();
    let columns: Vec<Vec<Complex64>> = (0..n).map(|c| sensing.column(c)).collect();
    let stop = residual_tol * norm_sqr(y).sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut chosen: Vec<usize> = Vec::new();
    let mut resid = y.to_vec();
    while chosen.len() < sparsity.min(n) && norm_sqr(&resid).sqrt() > stop {
        let mut best = None;
        let mut best_score = -1.0;
        for c in (0..n).filter(|c| !chosen.contains(c) && norms[*c] > 0.0) {
            let score = inner(&columns[c], &resid).norm() / norms[c];
            if score > best_score {
                best_score = score;
                best = Some(c);
            }
        }
        let Some(c) = best else { break };
        chosen.push(c);
        let a = sensing.select_columns(&chosen);
        let coef = least_squares(&a, y, LS_RIDGE)?;
        let fit = a.matvec(&coef);
        resid = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (&idx, v) in chosen.iter().zip(coef) {
            x[idx] = v;
        }
    }
    Ok((x, chosen.len()))
}

/// Conventional OMP on each of the M observation columns of every user.
pub fn omp_baseline(meas: &MeasurementSet, sparsity: usize, residual_tol: f64) -> Result<EstimateResult> {
    let (t, n) = meas.sensing.shape();
    if sparsity > t {
        return Err(Error::InvalidConfig {
            field: "sparsity",
            reason: format!("{sparsity} atoms exceed {t} pilots"),
        });
    }
    let m = meas.observations.first().map_or(0, |y| y.cols());
    let mut angular = Vec::with_capacity(meas.users());
    let mut iterations = Vec::with_capacity(meas.users() * m);
    for y in &meas.observations {
        if y.shape() != (t, m) {
            return Err(Error::DimensionMismatch("observation shapes differ across users".into()));
        }
        let mut h = ComplexMatrix::zeros(m, n);
        for col in 0..m {
            let (x, atoms) = omp_column(&y.column(col), &meas.sensing, sparsity, residual_tol)?;
            store_conjugated_row(&mut h, col, &x);
            iterations.push(atoms);
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
