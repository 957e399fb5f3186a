use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use super::config::{Scenario, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::GridAngle;
use crate::rng::complex_gaussian;

#[derive(Debug, Clone, PartialEq)]
pub struct BsRisPath {
    pub gain: Complex64,
    pub bs_angle: GridAngle,
    pub ris_departure: GridAngle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisUserPath {
    pub gain: Complex64,
    pub ris_arrival: GridAngle,
    /// Arrival frequency is shared with at least one other user by construction.
    pub shared: bool,
}

/// Scenario-two sharing layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLayout {
    /// Cluster index of every user.
    pub assignment: Vec<usize>,
    /// Frequencies common to all members of each cluster.
    pub cluster_shared: Vec<Vec<GridAngle>>,
    /// `(k, k + 1, frequencies)` shared by members of two neighbouring clusters.
    pub cross_shared: Vec<(usize, usize, Vec<GridAngle>)>,
}

/// All propagation paths of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub bs_ris: Vec<BsRisPath>,
    /// Per user, exactly `paths_ris_user` paths with distinct arrival frequencies.
    pub ris_user: Vec<Vec<RisUserPath>>,
    pub clusters: Option<ClusterLayout>,
}

impl PathEnsemble {
    pub fn arrival_frequencies(&self, user: usize) -> Vec<GridAngle> {
        self.ris_user[user].iter().map(|p| p.ris_arrival).collect()
    }
}

fn draw_distinct<R: Rng + ?Sized>(
    rng: &mut R,
    universe: usize,
    count: usize,
    what: &str,
) -> Result<Vec<usize>> {
    if count > universe {
        return Err(Error::Generation(format!(
            "cannot draw {count} distinct {what} from {universe}"
        )));
    }
    Ok(sample(rng, universe, count).into_vec())
}

/// Draws `count` indices of `0..universe` avoiding `excluded`.
fn draw_distinct_excluding<R: Rng + ?Sized>(
    rng: &mut R,
    universe: usize,
    count: usize,
    excluded: &[usize],
    what: &str,
) -> Result<Vec<usize>> {
    let allowed: Vec<usize> = (0..universe).filter(|i| !excluded.contains(i)).collect();
    let picks = draw_distinct(rng, allowed.len(), count, what)?;
    Ok(picks.into_iter().map(|k| allowed[k]).collect())
}

fn sample_bs_ris<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Vec<BsRisPath>> {
    let bs = draw_distinct(rng, cfg.bs_antennas(), cfg.paths_bs_ris, "BS angles")?;
    let dep = draw_distinct(rng, cfg.ris_elements(), cfg.paths_bs_ris, "RIS departure frequencies")?;
    let var = cfg.bs_ris_gain_variance();
    Ok(bs
        .into_iter()
        .zip(dep)
        .map(|(b, d)| BsRisPath {
            gain: complex_gaussian(rng, var),
            bs_angle: GridAngle::from_flat(b, cfg.bs_cols),
            ris_departure: GridAngle::from_flat(d, cfg.ris_cols),
        })
        .collect())
}

fn user_paths<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    rng: &mut R,
    shared: &[usize],
    reserved: &[usize],
) -> Result<Vec<RisUserPath>> {
    let unique_count = cfg.paths_ris_user - shared.len();
    let unique = draw_distinct_excluding(
        rng,
        cfg.ris_elements(),
        unique_count,
        reserved,
        "unique arrival frequencies",
    )?;
    let var = cfg.ris_user_gain_variance();
    let mut paths: Vec<RisUserPath> = shared
        .iter()
        .map(|&f| (f, true))
        .chain(unique.into_iter().map(|f| (f, false)))
        .map(|(f, is_shared)| RisUserPath {
            gain: Complex64::new(0.0, 0.0),
            ris_arrival: GridAngle::from_flat(f, cfg.ris_cols),
            shared: is_shared,
        })
        .collect();
    for p in &mut paths {
        p.gain = complex_gaussian(rng, var);
    }
    Ok(paths)
}

/// All users share `common_columns` arrival frequencies; the rest are drawn per user.
pub fn sample_paths_scenario1<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<PathEnsemble> {
    if cfg.scenario != Scenario::One {
        return Err(Error::Generation("scenario-one sampler called for scenario two".into()));
    }
    cfg.validate()?;
    let bs_ris = sample_bs_ris(cfg, rng)?;
    let common = draw_distinct(rng, cfg.ris_elements(), cfg.common_columns, "common arrival frequencies")?;
    let ris_user = (0..cfg.users)
        .map(|_| user_paths(cfg, rng, &common, &common))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathEnsemble {
        bs_ris,
        ris_user,
        clusters: None,
    })
}

fn assign_clusters<R: Rng + ?Sized>(rng: &mut R, users: usize, clusters: usize) -> Vec<usize> {
    for _ in 0..64 {
        let a: Vec<usize> = (0..users).map(|_| rng.random_range(0..clusters)).collect();
        let mut seen = vec![false; clusters];
        a.iter().for_each(|&k| seen[k] = true);
        if seen.iter().all(|&s| s) {
            return a;
        }
    }
    // Rejection is hopeless when clusters ≈ users: seed each cluster with one
    // randomly chosen user, then place the remainder uniformly.
    let order = sample(rng, users, users).into_vec();
    let mut a = vec![0; users];
    for (pos, &u) in order.iter().enumerate() {
        a[u] = if pos < clusters { pos } else { rng.random_range(0..clusters) };
    }
    a
}

/// Users are split into random clusters. Each cluster shares `v ∈ [1, P_j]` frequencies;
/// neighbouring clusters additionally share some with probability `cross_share_prob`.
pub fn sample_paths_scenario2<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<PathEnsemble> {
    if cfg.scenario != Scenario::Two {
        return Err(Error::Generation("scenario-two sampler called for scenario one".into()));
    }
    cfg.validate()?;
    let k = cfg.clusters;
    let pj = cfg.paths_ris_user;
    let n = cfg.ris_elements();
    let bs_ris = sample_bs_ris(cfg, rng)?;
    let assignment = assign_clusters(rng, cfg.users, k);

    let cluster_counts: Vec<usize> = (0..k).map(|_| rng.random_range(1..=pj)).collect();
    let mut load = cluster_counts.clone();
    let mut cross_counts = Vec::new();
    for a in 0..k.saturating_sub(1) {
        if rng.random_bool(cfg.cross_share_prob) {
            let room = (pj - load[a]).min(pj - load[a + 1]);
            if room > 0 {
                let c = rng.random_range(1..=room);
                load[a] += c;
                load[a + 1] += c;
                cross_counts.push((a, c));
            }
        }
    }

    let total: usize = cluster_counts.iter().sum::<usize>() + cross_counts.iter().map(|x| x.1).sum::<usize>();
    let pool = draw_distinct(rng, n, total, "shared arrival frequencies")?;
    let mut cursor = 0;
    let mut take = |c: usize| {
        let s = pool[cursor..cursor + c].to_vec();
        cursor += c;
        s
    };
    let cluster_sets: Vec<Vec<usize>> = cluster_counts.iter().map(|&c| take(c)).collect();
    let cross_sets: Vec<(usize, Vec<usize>)> = cross_counts.iter().map(|&(a, c)| (a, take(c))).collect();

    let mut ris_user = Vec::with_capacity(cfg.users);
    for &cl in &assignment {
        let mut shared = cluster_sets[cl].clone();
        for (a, set) in &cross_sets {
            if cl == *a || cl == a + 1 {
                shared.extend(set);
            }
        }
        // Keep private frequencies off every shared set when the grid allows it.
        let reserved = if n - pool.len() >= pj - shared.len() { &pool } else { &shared };
        ris_user.push(user_paths(cfg, rng, &shared, reserved)?);
    }

    let to_grid = |v: &[usize]| v.iter().map(|&f| GridAngle::from_flat(f, cfg.ris_cols)).collect::<Vec<_>>();
    Ok(PathEnsemble {
        bs_ris,
        ris_user,
        clusters: Some(ClusterLayout {
            assignment,
            cluster_shared: cluster_sets.iter().map(|s| to_grid(s)).collect(),
            cross_shared: cross_sets.iter().map(|(a, s)| (*a, a + 1, to_grid(s))).collect(),
        }),
    })
}

/// Dispatches on `cfg.scenario`.
pub fn sample_paths<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<PathEnsemble> {
    match cfg.scenario {
        Scenario::One => sample_paths_scenario1(cfg, rng),
        Scenario::Two => sample_paths_scenario2(cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::rng::{stream, Purpose};

    fn freq_sets(p: &PathEnsemble) -> Vec<BTreeSet<GridAngle>> {
        (0..p.ris_user.len()).map(|j| p.arrival_frequencies(j).into_iter().collect()).collect()
    }

    fn common_to_all(sets: &[BTreeSet<GridAngle>]) -> BTreeSet<GridAngle> {
        sets.iter().skip(1).fold(sets[0].clone(), |acc, s| &acc & s)
    }

    #[test]
    fn full_sharing_gives_identical_sets() {
        let mut cfg = SystemConfig::desk();
        cfg.common_columns = cfg.paths_ris_user;
        let p = sample_paths_scenario1(&cfg, &mut stream(1, 0, Purpose::Paths)).unwrap();
        let sets = freq_sets(&p);
        assert!(sets.iter().all(|s| s == &sets[0]));
    }

    #[test]
    fn exact_common_count_scenario1() {
        for pc in [2, 6] {
            let mut cfg = SystemConfig::default();
            cfg.common_columns = pc;
            for trial in 0..5 {
                let p = sample_paths_scenario1(&cfg, &mut stream(3, trial, Purpose::Paths)).unwrap();
                assert_eq!(p.bs_ris.len(), 5);
                let bs: BTreeSet<_> = p.bs_ris.iter().map(|b| b.bs_angle).collect();
                assert_eq!(bs.len(), 5);
                let sets = freq_sets(&p);
                assert!(sets.iter().all(|s| s.len() == 10));
                // Unique draws avoid the common set, so forced sharing is exactly pc
                // unless unique frequencies collide across all 16 users by chance.
                let flagged: BTreeSet<_> = p.ris_user[0].iter().filter(|q| q.shared).map(|q| q.ris_arrival).collect();
                assert_eq!(flagged.len(), pc);
                assert!(flagged.is_subset(&common_to_all(&sets)));
            }
        }
    }

    #[test]
    fn wrong_scenario_rejected() {
        let cfg = SystemConfig::desk();
        assert!(sample_paths_scenario2(&cfg, &mut stream(0, 0, Purpose::Paths)).is_err());
    }

    #[test]
    fn infeasible_distinctness_is_generation_error() {
        let mut cfg = SystemConfig::desk();
        cfg.scenario = Scenario::Two;
        cfg.ris_rows = 2;
        cfg.ris_cols = 5;
        cfg.paths_ris_user = 10;
        cfg.common_columns = 0;
        cfg.clusters = 3;
        // 3 clusters share at least 3 frequencies, leaving too few unique ones.
        let err = (0..20)
            .map(|t| sample_paths_scenario2(&cfg, &mut stream(0, t, Purpose::Paths)))
            .find(|r| r.is_err());
        assert!(matches!(err, Some(Err(Error::Generation(_)))));
    }

    #[test]
    fn single_cluster_is_scenario_one_like() {
        let mut cfg = SystemConfig::desk();
        cfg.scenario = Scenario::Two;
        cfg.clusters = 1;
        let p = sample_paths_scenario2(&cfg, &mut stream(5, 0, Purpose::Paths)).unwrap();
        let layout = p.clusters.as_ref().unwrap();
        let v = layout.cluster_shared[0].len();
        assert!((1..=cfg.paths_ris_user).contains(&v));
        assert!(layout.cross_shared.is_empty());
        let common = common_to_all(&freq_sets(&p));
        assert!(layout.cluster_shared[0].iter().all(|f| common.contains(f)));
    }

    #[test]
    fn singleton_clusters() {
        let mut cfg = SystemConfig::desk();
        cfg.scenario = Scenario::Two;
        cfg.clusters = cfg.users;
        let p = sample_paths_scenario2(&cfg, &mut stream(2, 0, Purpose::Paths)).unwrap();
        for j in 0..cfg.users {
            assert_eq!(freq_sets(&p)[j].len(), cfg.paths_ris_user);
        }
        let mut a = p.clusters.unwrap().assignment;
        a.sort();
        assert_eq!(a, (0..cfg.users).collect::<Vec<_>>());
    }

    #[test]
    fn three_clusters_have_no_global_common_set() {
        let mut cfg = SystemConfig::default();
        cfg.scenario = Scenario::Two;
        cfg.common_columns = 0;
        let mut empty = 0;
        for t in 0..50 {
            let p = sample_paths_scenario2(&cfg, &mut stream(11, t, Purpose::Paths)).unwrap();
            let sets = freq_sets(&p);
            assert!(sets.iter().all(|s| s.len() == cfg.paths_ris_user));
            let layout = p.clusters.unwrap();
            let mut seen = vec![false; 3];
            layout.assignment.iter().for_each(|&k| seen[k] = true);
            assert!(seen.iter().all(|&s| s));
            if common_to_all(&sets).is_empty() {
                empty += 1;
            }
        }
        assert!(empty >= 49, "{empty}/50 ensembles lacked a global common set");
    }

    #[test]
    fn deterministic_for_seed() {
        let mut cfg = SystemConfig::desk();
        let a = sample_paths(&cfg, &mut stream(9, 1, Purpose::Paths)).unwrap();
        let b = sample_paths(&cfg, &mut stream(9, 1, Purpose::Paths)).unwrap();
        assert_eq!(a, b);
        cfg.scenario = Scenario::Two;
        let a = sample_paths(&cfg, &mut stream(9, 1, Purpose::Paths)).unwrap();
        let b = sample_paths(&cfg, &mut stream(9, 1, Purpose::Paths)).unwrap();
        assert_eq!(a, b);
    }
}
