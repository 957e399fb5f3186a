//! UAMPSBL-PCI: row-wise joint estimation with common-column coupling.

use super::engine::{Coupling, UampSbl};
use super::{store_conjugated_row, EstimateResult, SblHyperparams};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::measurement::MeasurementSet;
use crate::numerics::ComplexMatrix;

/// How common columns are located after the fast scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommonColumnMode {
    /// All users share the given number of columns; their precisions there are pooled.
    FixedPc(usize),
    /// Users are grouped per column by sort-and-grow clustering.
    AutoCluster,
    /// No coupling; every user is an independent single-vector problem.
    Disabled,
}

impl CommonColumnMode {
    fn coupling(self, cfg: &SystemConfig, hp: &SblHyperparams) -> Coupling {
        match self {
            Self::FixedPc(common) if common > 0 => Coupling::Fixed {
                paths: cfg.paths_ris_user,
                common,
            },
            Self::FixedPc(_) | Self::Disabled => Coupling::None,
            Self::AutoCluster => Coupling::Cluster {
                skip: hp.cluster_skip,
                grow: hp.cluster_grow,
            },
        }
    }
}

/// Estimates every user's angular channel on the given rows.
///
/// For each row `α` the users' observation columns `Y̌_j(:, α)` form one T × J
/// measurement matrix that is solved jointly against the transformed sensing matrix.
pub fn uampsbl_pci(
    meas: &MeasurementSet,
    cfg: &SystemConfig,
    hp: &SblHyperparams,
    row_support: &[usize],
    mode: CommonColumnMode,
) -> Result<EstimateResult> {
    hp.validate()?;
    let users = meas.users();
    if users == 0 {
        return Err(Error::DimensionMismatch("no user observations".into()));
    }
    let (t, n) = meas.sensing.shape();
    let m = meas.observations[0].cols();
    for y in &meas.observations {
        if y.shape() != (t, m) {
            return Err(Error::DimensionMismatch(format!(
                "observation is {}x{}, expected {t}x{m}",
                y.rows(),
                y.cols()
            )));
        }
    }
    if let Some(&bad) = row_support.iter().find(|&&r| r >= m) {
        return Err(Error::DimensionMismatch(format!("row {bad} outside 0..{m}")));
    }
    if let CommonColumnMode::FixedPc(pc) = mode {
        if pc > cfg.paths_ris_user {
            return Err(Error::InvalidConfig {
                field: "common_columns",
                reason: format!("{pc} exceeds paths_ris_user = {}", cfg.paths_ris_user),
            });
        }
    }

    let solver = UampSbl::new(&meas.sensing)?;
    let coupling = mode.coupling(cfg, hp);
    let mut angular = vec![ComplexMatrix::zeros(m, n); users];
    let mut iterations = Vec::with_capacity(row_support.len());
    let mut common = Vec::with_capacity(row_support.len());
    for &row in row_support {
        let z = ComplexMatrix::from_fn(t, users, |r, j| meas.observations[j][(r, row)]);
        let out = solver.solve(&z, hp, coupling)?;
        for (j, h) in angular.iter_mut().enumerate() {
            store_conjugated_row(h, row, &out.x.column(j));
        }
        iterations.push(out.iterations);
        common.push(out.common);
    }
    Ok(EstimateResult {
        angular,
        iterations,
        row_support: row_support.to_vec(),
        common,
    })
}
