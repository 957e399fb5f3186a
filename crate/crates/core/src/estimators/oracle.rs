//! Support-aware least squares.

use super::{store_conjugated_row, EstimateResult, LS_RIDGE};
use crate::error::{Error, Result};
use crate::measurement::MeasurementSet;
use crate::numerics::{least_squares, ComplexMatrix};

/// Least squares restricted to the true supports.
///
/// `column_supports[j][k]` lists the nonzero columns of user `j` in row `row_support[k]`.
pub fn oracle_ls(
    meas: &MeasurementSet,
    row_support: &[usize],
    column_supports: &[Vec<Vec<usize>>],
) -> Result<EstimateResult> {
    let n = meas.sensing.cols();
    let m = meas.observations.first().map_or(0, |y| y.cols());
    if column_supports.len() != meas.users() {
        return Err(Error::DimensionMismatch(format!(
            "{} support lists for {} users",
            column_supports.len(),
            meas.users()
        )));
    }
    let mut angular = Vec::with_capacity(meas.users());
    for (y, supports) in meas.observations.iter().zip(column_supports) {
        if supports.len() != row_support.len() {
            return Err(Error::DimensionMismatch("column supports do not match row support".into()));
        }
        let mut h = ComplexMatrix::zeros(m, n);
        for (&row, cols) in row_support.iter().zip(supports) {
            if row >= m || cols.iter().any(|&c| c >= n) {
                return Err(Error::DimensionMismatch(format!("support index outside {m}x{n}")));
            }
            if cols.is_empty() {
                continue;
            }
            let a = meas.sensing.select_columns(cols);
            let coef = least_squares(&a, &y.column(row), LS_RIDGE)?;
            let mut x = vec![num_complex::Complex64::new(0.0, 0.0); n];
            for (&c, v) in cols.iter().zip(coef) {
                x[c] = v;
            }
            store_conjugated_row(&mut h, row, &x);
        }
        angular.push(h);
    }
    Ok(EstimateResult {
        angular,
        iterations: Vec::new(),
        row_support: row_support.to_vec(),
        common: Vec::new(),
    })
}
