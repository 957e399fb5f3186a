//! Angular dictionaries for uniform planar arrays with half-wavelength spacing.
//!
//! A UPA with `rows_factor × cols_factor` elements has a steering vector that factors
//! as a Kronecker product of two complex exponentials. Restricting the spatial
//! frequencies to the DFT grid makes each steering vector coincide with one column
//! of the Kronecker-factored normalized DFT matrix.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::matrix::{kron, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// On-grid spatial-frequency pair of a planar array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridAngle {
    pub row_index: usize,
    pub col_index: usize,
}

impl GridAngle {
    pub fn new(row_index: usize, col_index: usize) -> Self {
        Self {
            row_index,
            col_index,
        }
    }

    /// Dictionary column holding this angle's steering vector.
    pub fn flat_index(self, cols_factor: usize) -> usize {
        self.row_index * cols_factor + self.col_index
    }

    pub fn from_flat(index: usize, cols_factor: usize) -> Self {
        Self::new(index / cols_factor, index % cols_factor)
    }

    /// Per-axis modular sum; this is the frequency of the elementwise product of
    /// two on-grid steering vectors.
    pub fn wrapping_add(self, other: GridAngle, rows_factor: usize, cols_factor: usize) -> Self {
        Self::new(
            (self.row_index + other.row_index) % rows_factor,
            (self.col_index + other.col_index) % cols_factor,
        )
    }
}

/// Unitary `L × L` dictionary `F_{L_r} ⊗ F_{L_c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryDictionary {
    rows_factor: usize,
    cols_factor: usize,
    matrix: ComplexMatrix,
}

impl UnitaryDictionary {
    pub fn size(&self) -> usize {
        self.rows_factor * self.cols_factor
    }

    pub fn rows_factor(&self) -> usize {
        self.rows_factor
    }

    pub fn cols_factor(&self) -> usize {
        self.cols_factor
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn grid(&self, column: usize) -> GridAngle {
        GridAngle::from_flat(column, self.cols_factor)
    }
}

/// Normalized DFT matrix with entries `e^{-j2π l k / n} / √n`.
fn dft_matrix(n: usize) -> ComplexMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |l, k| unit_phase((l * k) % n, n) * norm)
}

fn unit_phase(numerator: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * numerator as f64 / n as f64)
}

pub fn dft_dictionary(rows_factor: usize, cols_factor: usize) -> Result<UnitaryDictionary> {
    if rows_factor == 0 || cols_factor == 0 {
        return Err(Error::InvalidDimension(format!(
            "dictionary factors must be positive, got {rows_factor}x{cols_factor}"
        )));
    }
    Ok(UnitaryDictionary {
        rows_factor,
        cols_factor,
        matrix: kron(&dft_matrix(rows_factor), &dft_matrix(cols_factor)),
    })
}

/// Unit-norm UPA steering vector for an on-grid angle.
pub fn steering_vector(grid: GridAngle, rows_factor: usize, cols_factor: usize) -> Result<ComplexVector> {
    if grid.row_index >= rows_factor || grid.col_index >= cols_factor {
        return Err(Error::InvalidAngle {
            row: grid.row_index,
            col: grid.col_index,
            rows_factor,
            cols_factor,
        });
    }
    let norm = 1.0 / ((rows_factor * cols_factor) as f64).sqrt();
    let mut v = Vec::with_capacity(rows_factor * cols_factor);
    for lr in 0..rows_factor {
        let a = unit_phase((lr * grid.row_index) % rows_factor, rows_factor);
        for lc in 0..cols_factor {
            let b = unit_phase((lc * grid.col_index) % cols_factor, cols_factor);
            v.push(a * b * norm);
        }
    }
    Ok(v)
}
