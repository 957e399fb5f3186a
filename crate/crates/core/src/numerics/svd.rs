//! Economy SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The tall orientation is factored directly; a wide matrix is factored through its
//! adjoint and the factors swapped. Rotations stop once every column pair satisfies
//! `|w_pᴴ w_q| <= tol * ‖w_p‖ ‖w_q‖`.

use num_complex::Complex64;

use super::matrix::{inner, norm_sqr, ComplexMatrix};
use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

/// `m = u · diag(singular_values) · vᴴ` with `k = min(rows, cols)` retained triplets.
#[derive(Debug, Clone)]
pub struct Svd {
    /// rows × k, orthonormal columns.
    pub u: ComplexMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// cols × k, orthonormal columns.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (z, &s) in us.row_mut(i).iter_mut().zip(&self.singular_values) {
                *z *= s;
            }
        }
        us.matmul(&self.v.adjoint())
    }
}

pub fn economy_svd(m: &ComplexMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimension("SVD of an empty matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::Numerical("SVD input has non-finite entries".into()));
    }
    if rows >= cols {
        let (u, s, v) = jacobi_tall(m)?;
        Ok(Svd {
            u,
            singular_values: s,
            v,
        })
    } else {
        let (u, s, v) = jacobi_tall(&m.adjoint())?;
        Ok(Svd {
            u: v,
            singular_values: s,
            v: u,
        })
    }
}

fn jacobi_tall(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut norms: Vec<f64> = w.iter().map(|c| norm_sqr(c)).collect();
    let floor = norms.iter().cloned().fold(0.0, f64::max) * f64::EPSILON * f64::EPSILON;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = inner(&w[p], &w[q]);
                let g = gamma.norm();
                if g <= TOLERANCE * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
                norms[p] = norm_sqr(&w[p]);
                norms[q] = norm_sqr(&w[q]);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let sigma_max = norms[order[0]].sqrt();
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j].sqrt();
        if sigma > sigma_max * 1e-14 && sigma > 0.0 {
            u_cols.push(w[j].iter().map(|z| z / sigma).collect());
            s.push(sigma);
        } else {
            u_cols.push(vec![Complex64::new(0.0, 0.0); m]);
            s.push(0.0);
            deficient.push(k);
        }
    }
    complete_basis(&mut u_cols, &deficient, m);

    let u = ComplexMatrix::from_fn(m, n, |i, k| u_cols[k][i]);
    let vm = ComplexMatrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok((u, s, vm))
}

fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (head, tail) = cols.split_at_mut(q);
    let wp = &mut head[p];
    let wq = &mut tail[0];
    let ph_conj = phase.conj();
    for (a, b) in wp.iter_mut().zip(wq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = x * c - y * ph_conj * s;
        *b = x * phase * s + y * c;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to all others.
fn complete_basis(cols: &mut [Vec<Complex64>], slots: &[usize], m: usize) {
    let mut candidate = 0;
    for &slot in slots {
        while candidate < m {
            let mut e = vec![Complex64::new(0.0, 0.0); m];
            e[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if k == slot {
                        continue;
                    }
                    let proj = inner(col, &e);
                    for (x, c) in e.iter_mut().zip(col) {
                        *x -= proj * c;
                    }
                }
            }
            let nrm = norm_sqr(&e).sqrt();
            if nrm > 1e-6 {
                cols[slot] = e.iter().map(|z| z / nrm).collect();
                break;
            }
        }
    }
}
