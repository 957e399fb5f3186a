//! Ground-truth cascaded channels with shared row and partially shared column support.

mod config;
mod paths;

pub use config::{Scenario, SystemConfig};
pub use paths::{
    sample_paths, sample_paths_scenario1, sample_paths_scenario2, BsRisPath, ClusterLayout, PathEnsemble,
    RisUserPath,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{steering_vector, ComplexMatrix, ComplexVector, UnitaryDictionary};

/// BS-side and RIS-side dictionaries for one configuration.
#[derive(Debug, Clone)]
pub struct Dictionaries {
    pub bs: UnitaryDictionary,
    pub ris: UnitaryDictionary,
}

impl Dictionaries {
    pub fn for_config(cfg: &SystemConfig) -> Result<Self> {
        Ok(Self {
            bs: crate::numerics::dft_dictionary(cfg.bs_rows, cfg.bs_cols)?,
            ris: crate::numerics::dft_dictionary(cfg.ris_rows, cfg.ris_cols)?,
        })
    }
}

/// Spatial and angular channels plus their exact supports.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// M × N.
    pub h_bs_ris: ComplexMatrix,
    /// One length-N vector per user.
    pub h_ris_user: Vec<ComplexVector>,
    /// `H_j = H_BR diag(h_j)`, M × N.
    pub cascaded: Vec<ComplexMatrix>,
    /// `Uᴴ H_j V`, M × N.
    pub angular: Vec<ComplexMatrix>,
    /// Angular rows carrying energy, ascending.
    pub row_support: Vec<usize>,
    /// `column_supports[j][k]`: sorted nonzero columns of user `j` in row `row_support[k]`.
    pub column_supports: Vec<Vec<Vec<usize>>>,
}

impl ChannelRealization {
    pub fn users(&self) -> usize {
        self.cascaded.len()
    }

    /// Number of angular entries of user `j` above `rel_tol` times the largest one.
    pub fn angular_nonzeros(&self, user: usize, rel_tol: f64) -> usize {
        let a = &self.angular[user];
        let cut = a.max_abs() * rel_tol;
        a.as_slice().iter().filter(|z| z.norm() > cut).count()
    }

    /// Rows of user `j`'s angular channel that hold an entry above `rel_tol` of its peak.
    pub fn angular_rows(&self, user: usize, rel_tol: f64) -> Vec<usize> {
        let a = &self.angular[user];
        let cut = a.max_abs() * rel_tol;
        (0..a.rows()).filter(|&i| a.row(i).iter().any(|z| z.norm() > cut)).collect()
    }
}

/// Builds `H_BR`, `h_j`, the cascades and their angular representation.
///
/// RIS-side terms use conjugated steering vectors, so that the product of a
/// departure and an arrival term lands on dictionary column
/// `departure ⊕ arrival` (per-axis modular sum) of `V`.
pub fn assemble_channels(
    paths: &PathEnsemble,
    cfg: &SystemConfig,
    dicts: &Dictionaries,
) -> Result<ChannelRealization> {
    let m = cfg.bs_antennas();
    let n = cfg.ris_elements();
    if dicts.bs.size() != m || dicts.ris.size() != n {
        return Err(Error::Assembly(format!(
            "dictionaries {}x{} do not match M={m}, N={n}",
            dicts.bs.size(),
            dicts.ris.size()
        )));
    }
    if paths.bs_ris.len() != cfg.paths_bs_ris {
        return Err(Error::Assembly(format!(
            "{} BS-RIS paths, config says {}",
            paths.bs_ris.len(),
            cfg.paths_bs_ris
        )));
    }
    if paths.ris_user.len() != cfg.users {
        return Err(Error::Assembly(format!(
            "{} users in ensemble, config says {}",
            paths.ris_user.len(),
            cfg.users
        )));
    }
    if let Some(j) = paths.ris_user.iter().position(|p| p.len() != cfg.paths_ris_user) {
        return Err(Error::Assembly(format!(
            "user {j} has {} paths, config says {}",
            paths.ris_user[j].len(),
            cfg.paths_ris_user
        )));
    }

    let ris_conj = |g| -> Result<ComplexVector> {
        Ok(steering_vector(g, cfg.ris_rows, cfg.ris_cols)?
            .into_iter()
            .map(|z| z.conj())
            .collect())
    };

    let br_scale = ((m * n) as f64 / cfg.paths_bs_ris as f64).sqrt();
    let mut h_bs_ris = ComplexMatrix::zeros(m, n);
    for path in &paths.bs_ris {
        let b = steering_vector(path.bs_angle, cfg.bs_rows, cfg.bs_cols)?;
        let r = ris_conj(path.ris_departure)?;
        let g = path.gain * br_scale;
        for (i, bi) in b.iter().enumerate() {
            let gb = g * bi;
            for (h, rk) in h_bs_ris.row_mut(i).iter_mut().zip(&r) {
                *h += gb * rk;
            }
        }
    }

    let ru_scale = (n as f64 / cfg.paths_ris_user as f64).sqrt();
    let u = dicts.bs.matrix();
    let v = dicts.ris.matrix();
    let mut h_ris_user = Vec::with_capacity(cfg.users);
    let mut cascaded = Vec::with_capacity(cfg.users);
    let mut angular = Vec::with_capacity(cfg.users);
    for user_paths in &paths.ris_user {
        let mut h = vec![Complex64::new(0.0, 0.0); n];
        for p in user_paths {
            let r = ris_conj(p.ris_arrival)?;
            for (hk, rk) in h.iter_mut().zip(&r) {
                *hk += p.gain * ru_scale * rk;
            }
        }
        let mut c = h_bs_ris.clone();
        for i in 0..m {
            for (z, hk) in c.row_mut(i).iter_mut().zip(&h) {
                *z *= hk;
            }
        }
        angular.push(u.adjoint_matmul(&c).matmul(v));
        cascaded.push(c);
        h_ris_user.push(h);
    }

    let mut rows: Vec<(usize, &BsRisPath)> = paths
        .bs_ris
        .iter()
        .map(|p| (p.bs_angle.flat_index(cfg.bs_cols), p))
        .collect();
    rows.sort_by_key(|r| r.0);
    let row_support: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let column_supports = paths
        .ris_user
        .iter()
        .map(|user_paths| {
            rows.iter()
                .map(|(_, br)| {
                    let mut cols: Vec<usize> = user_paths
                        .iter()
                        .map(|p| {
                            br.ris_departure
                                .wrapping_add(p.ris_arrival, cfg.ris_rows, cfg.ris_cols)
                                .flat_index(cfg.ris_cols)
                        })
                        .collect();
                    cols.sort_unstable();
                    cols
                })
                .collect()
        })
        .collect();

    Ok(ChannelRealization {
        h_bs_ris,
        h_ris_user,
        cascaded,
        angular,
        row_support,
        column_supports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GridAngle;
    use crate::rng::{stream, Purpose};

    fn draw(cfg: &SystemConfig, trial: u64) -> (PathEnsemble, ChannelRealization) {
        let dicts = Dictionaries::for_config(cfg).unwrap();
        let p = sample_paths(cfg, &mut stream(cfg.seed, trial, Purpose::Paths)).unwrap();
        let r = assemble_channels(&p, cfg, &dicts).unwrap();
        (p, r)
    }

    #[test]
    fn single_path_closed_form() {
        let mut cfg = SystemConfig::desk();
        cfg.paths_bs_ris = 1;
        cfg.paths_ris_user = 1;
        cfg.common_columns = 0;
        cfg.users = 1;
        let dicts = Dictionaries::for_config(&cfg).unwrap();
        let dep = GridAngle::new(5, 6);
        let arr = GridAngle::new(4, 3);
        let paths = PathEnsemble {
            bs_ris: vec![BsRisPath {
                gain: Complex64::new(1.0, 0.0),
                bs_angle: GridAngle::new(2, 1),
                ris_departure: dep,
            }],
            ris_user: vec![vec![RisUserPath {
                gain: Complex64::new(1.0, 0.0),
                ris_arrival: arr,
                shared: false,
            }]],
            clusters: None,
        };
        let r = assemble_channels(&paths, &cfg, &dicts).unwrap();
        // Element-wise product of two unit-norm steering vectors carries 1/√N, so the
        // single entry has magnitude √(MN/P_BR)·√(N/P_j)/√N = √(MN).
        let m = cfg.bs_antennas() as f64;
        let n = cfg.ris_elements() as f64;
        let row = 2 * 4 + 1;
        let col = GridAngle::new((5 + 4) % 8, (6 + 3) % 8).flat_index(8);
        assert_eq!(r.row_support, vec![row]);
        assert_eq!(r.column_supports[0][0], vec![col]);
        let a = &r.angular[0];
        assert!((a[(row, col)].norm() - (m * n).sqrt()).abs() < 1e-9);
        let rest: f64 = a.frobenius_norm_sqr() - a[(row, col)].norm_sqr();
        assert!(rest.abs() < 1e-18 * m * n + 1e-12);
    }

    #[test]
    fn zero_gains_give_zero_channels() {
        let cfg = SystemConfig::desk();
        let (mut p, _) = draw(&cfg, 0);
        p.bs_ris.iter_mut().for_each(|b| b.gain = Complex64::new(0.0, 0.0));
        p.ris_user.iter_mut().flatten().for_each(|q| q.gain = Complex64::new(0.0, 0.0));
        let r = assemble_channels(&p, &cfg, &Dictionaries::for_config(&cfg).unwrap()).unwrap();
        assert!(r.cascaded.iter().chain(&r.angular).all(|h| h.frobenius_norm() == 0.0));
    }

    #[test]
    fn default_nonzero_count_is_fifty() {
        let cfg = SystemConfig::default();
        let (_, r) = draw(&cfg, 0);
        for j in 0..cfg.users {
            assert_eq!(r.angular_nonzeros(j, 1e-9), 50);
            assert_eq!(r.angular_rows(j, 1e-9), r.row_support);
        }
    }

    #[test]
    fn realization_identities() {
        let cfg = SystemConfig::desk();
        let dicts = Dictionaries::for_config(&cfg).unwrap();
        let (_, r) = draw(&cfg, 3);
        let u = dicts.bs.matrix();
        let v = dicts.ris.matrix();
        for j in 0..cfg.users {
            let scale = r.cascaded[j].frobenius_norm();
            let direct = r.h_bs_ris.matmul(&ComplexMatrix::from_diag(&r.h_ris_user[j]));
            assert!(direct.sub(&r.cascaded[j]).frobenius_norm() <= 1e-10 * scale);
            let back = u.matmul(&r.angular[j]).matmul(&v.adjoint());
            assert!(back.sub(&r.cascaded[j]).frobenius_norm() <= 1e-10 * scale);
            // Support entries are exactly the listed ones.
            let a = &r.angular[j];
            let cut = a.max_abs() * 1e-9;
            for (k, &row) in r.row_support.iter().enumerate() {
                let cols: Vec<usize> = (0..a.cols()).filter(|&c| a[(row, c)].norm() > cut).collect();
                assert_eq!(cols, r.column_supports[j][k]);
            }
        }
    }

    #[test]
    fn mismatched_dictionary_rejected() {
        let cfg = SystemConfig::desk();
        let (p, _) = draw(&cfg, 0);
        let mut other = cfg.clone();
        other.ris_rows = 4;
        let dicts = Dictionaries::for_config(&other).unwrap();
        assert!(matches!(assemble_channels(&p, &cfg, &dicts), Err(Error::Assembly(_))));
    }
}
