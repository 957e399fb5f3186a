//! RIS phase schedules, noisy pilot observations and the angular compressed-sensing model.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{ChannelRealization, Dictionaries};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::rng::complex_gaussian;

/// Unit-modulus RIS reflection coefficients, one column per pilot slot (N × T).
#[derive(Debug, Clone, PartialEq)]
pub struct RisSchedule {
    pub phases: ComplexMatrix,
}

impl RisSchedule {
    pub fn elements(&self) -> usize {
        self.phases.rows()
    }

    pub fn slots(&self) -> usize {
        self.phases.cols()
    }
}

/// Transformed observations `Y̌_j = Ω̌ Ȟ_jᴴ + W̌_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// One T × M matrix per user.
    pub observations: Vec<ComplexMatrix>,
    /// T × N.
    pub sensing: ComplexMatrix,
    pub noise_variance: f64,
}

impl MeasurementSet {
    pub fn pilots(&self) -> usize {
        self.sensing.rows()
    }

    pub fn users(&self) -> usize {
        self.observations.len()
    }
}

/// Phases drawn i.i.d. uniform on `[0, 2π)`.
pub fn make_ris_schedule<R: Rng + ?Sized>(elements: usize, slots: usize, rng: &mut R) -> Result<RisSchedule> {
    if elements == 0 || slots == 0 {
        return Err(Error::InvalidDimension(format!(
            "RIS schedule needs N, T >= 1, got {elements}x{slots}"
        )));
    }
    let phases = ComplexMatrix::from_fn(elements, slots, |_, _| {
        Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
    });
    Ok(RisSchedule { phases })
}

/// Noiseless received pilots `H_j Ω` for every user.
pub fn noiseless_observations(realization: &ChannelRealization, schedule: &RisSchedule) -> Result<Vec<ComplexMatrix>> {
    realization
        .cascaded
        .iter()
        .map(|h| {
            if h.cols() != schedule.elements() {
                return Err(Error::DimensionMismatch(format!(
                    "cascaded channel has {} RIS columns, schedule has {} elements",
                    h.cols(),
                    schedule.elements()
                )));
            }
            Ok(h.matmul(&schedule.phases))
        })
        .collect()
}

/// `Y_j = H_j Ω + W_j`, with `W_j` circular Gaussian of per-entry variance `noise_variance`.
pub fn observe<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    schedule: &RisSchedule,
    noise_variance: f64,
    rng: &mut R,
) -> Result<Vec<ComplexMatrix>> {
    if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
        return Err(Error::InvalidDimension(format!(
            "noise variance must be finite and nonnegative, got {noise_variance}"
        )));
    }
    let mut ys = noiseless_observations(realization, schedule)?;
    if noise_variance > 0.0 {
        for y in &mut ys {
            for z in y.as_mut_slice() {
                *z += complex_gaussian(rng, noise_variance);
            }
        }
    }
    Ok(ys)
}

/// Maps raw M × T observations into the angular CS model: `Y̌_j = (Uᴴ Y_j)ᴴ`, `Ω̌ = (Vᴴ Ω)ᴴ`.
pub fn to_cs_model(
    raw: &[ComplexMatrix],
    schedule: &RisSchedule,
    dicts: &Dictionaries,
    noise_variance: f64,
) -> Result<MeasurementSet> {
    let u = dicts.bs.matrix();
    let v = dicts.ris.matrix();
    if v.rows() != schedule.elements() {
        return Err(Error::DimensionMismatch(format!(
            "RIS dictionary is {0}x{0}, schedule has {1} elements",
            v.rows(),
            schedule.elements()
        )));
    }
    let observations = raw
        .iter()
        .map(|y| {
            if y.rows() != u.rows() || y.cols() != schedule.slots() {
                return Err(Error::DimensionMismatch(format!(
                    "observation is {}x{}, expected {}x{}",
                    y.rows(),
                    y.cols(),
                    u.rows(),
                    schedule.slots()
                )));
            }
            // (Uᴴ Y)ᴴ = Yᴴ U
            Ok(y.adjoint_matmul(u))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementSet {
        observations,
        sensing: schedule.phases.adjoint_matmul(v),
        noise_variance,
    })
}

/// Noise variance giving `snr_db` relative to the mean per-entry power of the
/// noiseless observations, averaged over users.
pub fn calibrate_noise(snr_db: f64, realization: &ChannelRealization, schedule: &RisSchedule) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::Calibration("SNR is NaN".into()));
    }
    let ys = noiseless_observations(realization, schedule)?;
    let entries: usize = ys.iter().map(|y| y.rows() * y.cols()).sum();
    let energy: f64 = ys.iter().map(|y| y.frobenius_norm_sqr()).sum();
    if entries == 0 || !(energy > 0.0) {
        return Err(Error::Calibration("received signal has zero power".into()));
    }
    let power = energy / entries as f64;
    Ok(power * 10f64.powf(-snr_db / 10.0))
}
