//! Support identification: shared rows, fixed common columns and auto-clustering.

use std::cmp::Ordering;

use super::PrecisionMatrix;
use crate::numerics::ComplexMatrix;

/// The `P_BR` observation columns with the largest power summed over users, ascending.
///
/// Ties prefer the lower index.
pub fn acquire_row_support(observations: &[ComplexMatrix], paths_bs_ris: usize) -> Vec<usize> {
    let Some(first) = observations.first() else {
        return Vec::new();
    };
    let m = first.cols();
    let mut power = vec![0.0; m];
    for y in observations {
        assert_eq!(y.shape(), first.shape(), "observation shapes differ across users");
        for i in 0..y.rows() {
            for (p, z) in power.iter_mut().zip(y.row(i)) {
                *p += z.norm_sqr();
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    let mut picked: Vec<usize> = order.into_iter().take(paths_bs_ris.min(m)).collect();
    picked.sort_unstable();
    picked
}

/// Indices of the `count` smallest entries, ties to the lower index.
fn smallest_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

/// Fast-scan common columns for the all-users-share case.
///
/// Each user nominates its `paths` smallest-precision columns; the `common` columns
/// nominated most often win. Frequency ties go to the smaller precision sum across
/// users, then to the lower index. The result is ascending.
pub fn identify_common_columns_fixed(gamma: &PrecisionMatrix, paths: usize, common: usize) -> Vec<usize> {
    if common == 0 {
        return Vec::new();
    }
    let n = gamma.rows();
    let mut votes = vec![0usize; n];
    for j in 0..gamma.cols() {
        for idx in smallest_indices(&gamma.column(j), paths.min(n)) {
            votes[idx] += 1;
        }
    }
    let aggregate: Vec<f64> = (0..n).map(|r| gamma.row(r).iter().sum()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        votes[b]
            .cmp(&votes[a])
            .then(aggregate[a].total_cmp(&aggregate[b]))
            .then(a.cmp(&b))
    });
    let mut out: Vec<usize> = order.into_iter().take(common.min(n)).collect();
    out.sort_unstable();
    out
}

/// Sort-and-grow clustering of per-user precisions.
///
/// With `δ = min γ`, a row is considered only if its smallest entry is at most
/// `skip·δ`. Starting from that entry, users are added in ascending order while the
/// next precision is below `grow` times the running mean. Members of the resulting
/// cluster receive the cluster mean; every other entry of the map is zero.
pub fn auto_cluster(gamma: &PrecisionMatrix, skip: f64, grow: f64) -> PrecisionMatrix {
    let (n, users) = (gamma.rows(), gamma.cols());
    let mut map = PrecisionMatrix::filled(n, users, 0.0);
    if users == 0 {
        return map;
    }
    let delta = gamma.min();
    for row in 0..n {
        let values = gamma.row(row);
        let mut order: Vec<usize> = (0..users).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let q: Vec<f64> = order.iter().map(|&u| values[u]).collect();
        if q[0] > skip * delta {
            continue;
        }
        let mut total = q[0];
        let mut mean = q[0];
        let mut size = 1;
        while size < users && q[size] < grow * mean {
            total += q[size];
            size += 1;
            mean = total / size as f64;
        }
        for &u in &order[..size] {
            map.set(row, u, total / size as f64);
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn single_user_single_row() {
        let mut y = ComplexMatrix::zeros(6, 5);
        for t in 0..6 {
            y[(t, 3)] = Complex64::new(1.0, t as f64);
        }
        assert_eq!(acquire_row_support(&[y], 1), vec![3]);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let y = ComplexMatrix::from_fn(2, 4, |_, _| Complex64::new(1.0, 0.0));
        assert_eq!(acquire_row_support(&[y], 2), vec![0, 1]);
    }

    #[test]
    fn identical_columns_give_smallest() {
        let base = [5.0, 0.1, 3.0, 0.2, 9.0, 0.05];
        let g = PrecisionMatrix::from_fn(6, 3, |i, _| base[i]);
        assert_eq!(identify_common_columns_fixed(&g, 3, 2), vec![1, 5]);
        assert!(identify_common_columns_fixed(&g, 3, 0).is_empty());
    }

    #[test]
    fn planted_common_columns() {
        // Users share columns {2, 7}; each has one private column.
        let private = [0, 4, 11, 13];
        let g = PrecisionMatrix::from_fn(16, 4, |i, j| {
            if i == 2 || i == 7 || i == private[j] {
                1e-3 * (1.0 + j as f64)
            } else {
                1e4
            }
        });
        assert_eq!(identify_common_columns_fixed(&g, 3, 2), vec![2, 7]);
    }

    #[test]
    fn cluster_all_equal() {
        let g = PrecisionMatrix::filled(4, 5, 2.0);
        let map = auto_cluster(&g, 5.0, 5.0);
        assert!(map.as_slice().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn cluster_single_tiny_user() {
        let g = PrecisionMatrix::from_fn(1, 4, |_, j| if j == 2 { 1e-3 } else { 1e3 });
        let map = auto_cluster(&g, 5.0, 5.0);
        assert_eq!(map.row(0), &[0.0, 0.0, 1e-3, 0.0]);
    }

    #[test]
    fn planted_two_clusters() {
        // Users 0..3 form A, 3..6 form B. Rows alternate between A-active, B-active
        // and idle.
        let in_a = |u: usize| u < 3;
        let g = PrecisionMatrix::from_fn(9, 6, |r, u| match r % 3 {
            0 if in_a(u) => 0.01,
            1 if !in_a(u) => 0.02,
            _ => 1e6,
        });
        let map = auto_cluster(&g, 5.0, 5.0);
        for r in 0..9 {
            let members: Vec<usize> = (0..6).filter(|&u| map.get(r, u) != 0.0).collect();
            match r % 3 {
                0 => assert_eq!(members, vec![0, 1, 2]),
                1 => assert_eq!(members, vec![3, 4, 5]),
                _ => assert!(members.is_empty()),
            }
        }
    }

    /// Exhaustive oracle: best subset under lexicographic comparison of sorted keys.
    fn brute_force_common(gamma: &PrecisionMatrix, paths: usize, common: usize) -> Vec<usize> {
        let n = gamma.rows();
        let mut votes = vec![0i64; n];
        for j in 0..gamma.cols() {
            let col = gamma.column(j);
            for i in 0..n {
                // rank of i within column j under (value, index)
                let rank = (0..n)
                    .filter(|&k| col[k] < col[i] || (col[k] == col[i] && k < i))
                    .count();
                if rank < paths {
                    votes[i] += 1;
                }
            }
        }
        let key = |i: usize| (-votes[i], gamma.row(i).iter().sum::<f64>(), i);
        let mut best: Option<(Vec<(i64, f64, usize)>, Vec<usize>)> = None;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != common {
                continue;
            }
            let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let mut keys: Vec<_> = subset.iter().map(|&i| key(i)).collect();
            keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let better = match &best {
                None => true,
                Some((bk, _)) => keys.partial_cmp(bk) == Some(Ordering::Less),
            };
            if better {
                best = Some((keys, subset));
            }
        }
        best.map(|b| b.1).unwrap_or_default()
    }

    /// Exhaustive oracle: maximal subset of `0..users` that is a prefix in sort order
    /// and passes every growth check.
    fn brute_force_cluster_row(row: &[f64], delta: f64, skip: f64, grow: f64) -> Vec<usize> {
        let users = row.len();
        let before = |a: usize, b: usize| row[a] < row[b] || (row[a] == row[b] && a < b);
        let min_user = (0..users).find(|&u| (0..users).all(|v| v == u || before(u, v))).unwrap();
        if row[min_user] > skip * delta {
            return Vec::new();
        }
        let mut best = vec![min_user];
        for mask in 1u32..(1 << users) {
            let set: Vec<usize> = (0..users).filter(|u| mask & (1 << u) != 0).collect();
            // must be downward closed in the sort order
            let closed = set.iter().all(|&u| (0..users).all(|v| !before(v, u) || set.contains(&v)));
            if !closed || set.len() <= best.len() {
                continue;
            }
            let mut sorted = set.clone();
            sorted.sort_by(|&a, &b| if before(a, b) { Ordering::Less } else { Ordering::Greater });
            let ok = (1..sorted.len()).all(|k| {
                let mean = sorted[..k].iter().map(|&u| row[u]).sum::<f64>() / k as f64;
                row[sorted[k]] < grow * mean
            });
            if ok {
                best = set;
            }
        }
        best.sort_unstable();
        best
    }

    proptest! {
        #[test]
        fn fixed_matches_brute_force(
            n in 4usize..=12,
            users in 1usize..=4,
            seed in prop::collection::vec(0u8..6, 48),
            paths in 1usize..=4,
            common in 0usize..=3,
        ) {
            let paths = paths.min(n);
            let common = common.min(paths);
            // Coarse values make frequency and aggregate ties common.
            let g = PrecisionMatrix::from_fn(n, users, |i, j| 0.5 + seed[(i * users + j) % seed.len()] as f64);
            prop_assert_eq!(identify_common_columns_fixed(&g, paths, common), brute_force_common(&g, paths, common));
        }

        #[test]
        fn cluster_matches_brute_force(
            rows in 1usize..=4,
            users in 1usize..=6,
            vals in prop::collection::vec(0.01f64..100.0, 24),
        ) {
            let g = PrecisionMatrix::from_fn(rows, users, |i, j| vals[(i * users + j) % vals.len()]);
            let map = auto_cluster(&g, 5.0, 5.0);
            let delta = g.min();
            for r in 0..rows {
                let members: Vec<usize> = (0..users).filter(|&u| map.get(r, u) != 0.0).collect();
                prop_assert_eq!(&members, &brute_force_cluster_row(g.row(r), delta, 5.0, 5.0));
                if !members.is_empty() {
                    let mean = members.iter().map(|&u| g.get(r, u)).sum::<f64>() / members.len() as f64;
                    for &u in &members {
                        prop_assert!((map.get(r, u) - mean).abs() <= 1e-12 * mean);
                    }
                }
            }
        }

        #[test]
        fn row_support_is_exhaustive_optimum(m in 2usize..=10, k in 1usize..=4, vals in prop::collection::vec(0.0f64..5.0, 40)) {
            let k = k.min(m);
            let ys: Vec<ComplexMatrix> = (0..2)
                .map(|u| ComplexMatrix::from_fn(2, m, |t, c| Complex64::new(vals[(u * 20 + t * m + c) % 40], 0.0)))
                .collect();
            let power: Vec<f64> = (0..m)
                .map(|c| ys.iter().map(|y| y.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum())
                .collect();
            let got = acquire_row_support(&ys, k);
            let captured: f64 = got.iter().map(|&c| power[c]).sum();
            let mut best = f64::NEG_INFINITY;
            for mask in 0u32..(1 << m) {
                if mask.count_ones() as usize == k {
                    let s: f64 = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| power[i]).sum();
                    best = best.max(s);
                }
            }
            prop_assert_eq!(got.len(), k);
            prop_assert!((captured - best).abs() <= 1e-9 * best.max(1.0));
        }
    }
}
