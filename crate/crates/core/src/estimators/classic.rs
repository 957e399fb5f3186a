//! Dense SBL re-estimation, used as a reference on small instances.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{solve_hermitian, ComplexMatrix};

/// Fixed Gamma shape of the reference iteration.
pub const CLASSIC_SHAPE: f64 = 0.001;

const CLASSIC_RIDGE: f64 = 1e-12;

/// EM-style SBL with known noise precision `beta`, run for exactly `iterations` sweeps.
///
/// Each sweep forms `Σ = (β SᴴS + diag γ)⁻¹`, `μ = β Σ Sᴴ y` and sets
/// `γ_n = (2ε + 1) / (|μ_n|² + Σ_nn)`. Costs O(N³) per sweep.
pub fn classic_sbl_oracle(
    y: &[Complex64],
    sensing: &ComplexMatrix,
    beta: f64,
    iterations: usize,
) -> Result<Vec<Complex64>> {
    let (t, n) = sensing.shape();
    if y.len() != t {
        return Err(Error::DimensionMismatch(format!("y has {} entries, sensing has {t} rows", y.len())));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidDimension(format!("noise precision must be positive, got {beta}")));
    }
    let gram = sensing.adjoint_matmul(sensing);
    let sy = sensing.adjoint_matvec(y);
    let mut gamma = vec![1.0; n];
    let mut mu = vec![Complex64::new(0.0, 0.0); n];
    let identity = ComplexMatrix::identity(n);
    for _ in 0..iterations {
        let a = ComplexMatrix::from_fn(n, n, |i, k| {
            let v = gram[(i, k)] * beta;
            if i == k {
                v + gamma[i]
            } else {
                v
            }
        });
        let sigma = solve_hermitian(&a, &identity, CLASSIC_RIDGE)?;
        mu = sigma.matvec(&sy).into_iter().map(|v| v * beta).collect();
        for (i, g) in gamma.iter_mut().enumerate() {
            *g = (2.0 * CLASSIC_SHAPE + 1.0) / (mu[i].norm_sqr() + sigma[(i, i)].re);
        }
    }
    Ok(mu)
}
