//! Minimal k-means over binary coverage rows.
//!
//! Distances are squared Euclidean on 0/1 vectors, iteration stops when the
//! assignment stabilizes or after 100 rounds, and an emptied cluster is
//! repaired by stealing the point farthest from its current center. Seeding
//! is either k-means++ or caller-provided center rows. All tie-breaks go to
//! the lowest index so a run is a pure function of its inputs and generator
//! state.

use rand::Rng;

const MAX_ITERATIONS: usize = 100;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest_center(point: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// k-means++ seeding: first center uniform, then each next center drawn with
/// probability proportional to the squared distance to the nearest chosen
/// center. When every remaining point coincides with a chosen center the
/// draw falls back to uniform over the unchosen points.
fn plus_plus_centers<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..points.len()));
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut picked = points.len() - 1;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 {
                    target -= d;
                    if target <= 0.0 {
                        picked = i;
                        break;
                    }
                }
            }
            picked
        } else {
            let unchosen: Vec<usize> = (0..points.len()).filter(|i| !chosen.contains(i)).collect();
            unchosen[rng.random_range(0..unchosen.len())]
        };
        chosen.push(next);
        for (i, d) in dist.iter_mut().enumerate() {
            let nd = sq_dist(&points[i], &points[next]);
            if nd < *d {
                *d = nd;
            }
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn recompute_centers(points: &[Vec<f64>], assignment: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut centers = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &c) in assignment.iter().enumerate() {
        sizes[c] += 1;
        for (acc, v) in centers[c].iter_mut().zip(&points[p]) {
            *acc += v;
        }
    }
    for (c, center) in centers.iter_mut().enumerate() {
        if sizes[c] > 0 {
            for v in center.iter_mut() {
                *v /= sizes[c] as f64;
            }
        }
    }
    centers
}

/// Moves one point into each empty cluster: the point farthest from its
/// assigned center, taken only from clusters that keep at least one member.
fn repair_empty_clusters(
    points: &[Vec<f64>],
    centers: &[Vec<f64>],
    assignment: &mut [usize],
    k: usize,
) {
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assignment.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = (0..k).find(|&c| sizes[c] == 0) else {
            return;
        };
        let mut candidate = None;
        let mut worst = -1.0f64;
        for (p, &c) in assignment.iter().enumerate() {
            if sizes[c] <= 1 {
                continue;
            }
            let d = sq_dist(&points[p], &centers[c]);
            if d > worst {
                worst = d;
                candidate = Some(p);
            }
        }
        let p = candidate.expect("k <= point count guarantees a donor cluster");
        assignment[p] = empty;
    }
}

/// Clusters `points` into `k` groups and returns the per-point cluster
/// index. `init_centers`, when given, must hold exactly `k` rows.
pub(crate) fn cluster<R: Rng>(
    points: &[Vec<f64>],
    k: usize,
    init_centers: Option<Vec<Vec<f64>>>,
    rng: &mut R,
) -> Vec<usize> {
    assert!(k >= 1 && k <= points.len(), "k out of range");
    if k == points.len() {
        return (0..points.len()).collect();
    }
    let mut centers = match init_centers {
        Some(c) => {
            assert_eq!(c.len(), k, "initial centers must match k");
            c
        }
        None => plus_plus_centers(points, k, rng),
    };
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
    repair_empty_clusters(points, &centers, &mut assignment, k);
    for _ in 0..MAX_ITERATIONS {
        centers = recompute_centers(points, &assignment, k);
        let mut next: Vec<usize> = points.iter().map(|p| nearest_center(p, &centers)).collect();
        repair_empty_clusters(points, &centers, &mut next, k);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::seeded_rng;

    fn binary_points(rows: &[&[u8]]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().map(|&b| b as f64).collect())
            .collect()
    }

    #[test]
    fn k_equal_to_point_count_gives_singletons() {
        let points = binary_points(&[&[1, 0], &[1, 0], &[0, 1]]);
        let mut rng = seeded_rng(1);
        let assignment = cluster(&points, 3, None, &mut rng);
        assert_eq!(assignment, vec![0, 1, 2]);
    }

    #[test]
    fn one_cluster_holds_everything() {
        let points = binary_points(&[&[1, 0], &[0, 1], &[1, 1]]);
        let mut rng = seeded_rng(2);
        let assignment = cluster(&points, 1, None, &mut rng);
        assert!(assignment.iter().all(|&c| c == 0));
    }

    #[test]
    fn duplicate_rows_share_a_cluster_when_k_is_distinct_count() {
        // Exhaustive check over several seeds: with k equal to the number of
        // distinct rows, zero within-cluster distance is optimal and
        // duplicates must co-cluster.
        let points = binary_points(&[
            &[1, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 1],
        ]);
        for seed in 0..20 {
            let mut rng = seeded_rng(seed);
            let assignment = cluster(&points, 4, None, &mut rng);
            assert_eq!(assignment[0], assignment[1], "seed {seed}");
            assert_eq!(assignment[2], assignment[3], "seed {seed}");
            let mut clusters: Vec<usize> =
                vec![assignment[0], assignment[2], assignment[4], assignment[5]];
            clusters.sort_unstable();
            clusters.dedup();
            assert_eq!(clusters.len(), 4, "seed {seed}");
        }
    }

    #[test]
    fn every_cluster_is_non_empty() {
        let points = binary_points(&[
            &[1, 0, 0, 0],
            &[1, 1, 0, 0],
            &[0, 0, 1, 1],
            &[0, 0, 0, 1],
            &[1, 1, 1, 1],
            &[0, 1, 1, 0],
            &[1, 0, 1, 0],
        ]);
        for k in 1..=7 {
            let mut rng = seeded_rng(k as u64);
            let assignment = cluster(&points, k, None, &mut rng);
            let mut sizes = vec![0usize; k];
            for &c in &assignment {
                sizes[c] += 1;
            }
            assert!(sizes.iter().all(|&s| s > 0), "k = {k}: {sizes:?}");
            assert_eq!(sizes.iter().sum::<usize>(), points.len());
        }
    }

    #[test]
    fn seeded_centers_are_respected() {
        let points = binary_points(&[&[1, 0], &[1, 0], &[0, 1], &[0, 1]]);
        let centers = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let mut rng = seeded_rng(5);
        let assignment = cluster(&points, 2, Some(centers), &mut rng);
        assert_eq!(assignment[0], assignment[1]);
        assert_eq!(assignment[2], assignment[3]);
        assert_ne!(assignment[0], assignment[2]);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let points = binary_points(&[&[1, 0, 1], &[0, 1, 0], &[1, 1, 1], &[0, 0, 1], &[1, 0, 0]]);
        let a = cluster(&points, 2, None, &mut seeded_rng(42));
        let b = cluster(&points, 2, None, &mut seeded_rng(42));
        assert_eq!(a, b);
    }
}
