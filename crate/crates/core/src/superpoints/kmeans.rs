//! Lloyd's k-means on 3D coordinates with seeded k-means++ initialisation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

const MAX_ITERATIONS: usize = 100;

fn nearest<T: Real>(p: Vec3<T>, centers: &[Vec3<T>]) -> (usize, T) {
    let mut best = (0, p.distance_squared(centers[0]));
    for (c, &center) in centers.iter().enumerate().skip(1) {
        let d = p.distance_squared(center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centers<T: Real>(coords: &[Vec3<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3<T>> {
    let mut centers = Vec::with_capacity(k);
    centers.push(coords[rng.gen_range(0..coords.len())]);
    let mut d2: Vec<f64> = coords.iter().map(|p| p.distance_squared(centers[0]).as_f64()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = d2.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..coords.len())
        };
        let c = coords[pick];
        centers.push(c);
        for (w, p) in d2.iter_mut().zip(coords) {
            *w = w.min(p.distance_squared(c).as_f64());
        }
    }
    centers
}

/// Moves the member of the largest cluster that lies farthest from its
/// center into cluster `empty`.
fn steal_from_largest<T: Real>(
    coords: &[Vec3<T>],
    assignment: &mut [usize],
    centers: &mut [Vec3<T>],
    sizes: &mut [usize],
    empty: usize,
) {
    let largest = (0..sizes.len())
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .expect("k >= 1");
    let victim = (0..coords.len())
        .filter(|&i| assignment[i] == largest)
        .max_by(|&a, &b| {
            let da = coords[a].distance_squared(centers[largest]);
            let db = coords[b].distance_squared(centers[largest]);
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
        })
        .expect("largest cluster is non-empty");
    assignment[victim] = empty;
    sizes[largest] -= 1;
    sizes[empty] += 1;
    centers[empty] = coords[victim];
}

/// Splits `indices` into exactly `k` non-empty clusters by the coordinates
/// in `points`. Clusters are returned with sorted members, ordered by their
/// smallest member.
pub fn kmeans_split<T: Real>(points: &[Vec3<T>], indices: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::param("k", "must be >= 1"));
    }
    if k > indices.len() {
        return Err(Error::param(
            "k",
            format!("{k} clusters requested for {} points", indices.len()),
        ));
    }
    if k == 1 {
        let mut all = indices.to_vec();
        all.sort_unstable();
        return Ok(vec![all]);
    }
    let coords: Vec<Vec3<T>> = indices.iter().map(|&i| points[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(&coords, k, &mut rng);
    let mut assignment = vec![usize::MAX; coords.len()];
    let mut sizes = vec![0usize; k];

    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        sizes.iter_mut().for_each(|s| *s = 0);
        for (i, p) in coords.iter().enumerate() {
            let (c, _) = nearest(*p, &centers);
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
            sizes[c] += 1;
        }
        while let Some(empty) = sizes.iter().position(|&s| s == 0) {
            steal_from_largest(&coords, &mut assignment, &mut centers, &mut sizes, empty);
            changed = true;
        }
        let mut sums = vec![Vec3::zero(); k];
        for (i, p) in coords.iter().enumerate() {
            sums[assignment[i]] += *p;
        }
        for c in 0..k {
            centers[c] = sums[c] / T::from_usize_lossy(sizes[c]);
        }
        if !changed {
            break;
        }
    }

    let mut clusters = vec![Vec::new(); k];
    for (pos, &c) in assignment.iter().enumerate() {
        clusters[c].push(indices[pos]);
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn k_one_is_identity() {
        let pts: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert_eq!(kmeans_split(&pts, &[4, 2, 0], 1, 0).unwrap(), vec![vec![0, 2, 4]]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let pts: Vec<Vec3> = (0..6).map(|i| Vec3::new((i * i) as f64, 1.0, 0.0)).collect();
        let idx: Vec<usize> = (0..6).collect();
        let out = kmeans_split(&pts, &idx, 6, 3).unwrap();
        assert_eq!(out, (0..6).map(|i| vec![i]).collect::<Vec<_>>());
    }

    #[test]
    fn duplicates_still_give_k_clusters() {
        let pts = vec![Vec3::new(1.0, 1.0, 1.0); 10];
        let idx: Vec<usize> = (0..10).collect();
        let out = kmeans_split(&pts, &idx, 4, 7).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|c| !c.is_empty()));
        assert_eq!(out.iter().map(Vec::len).sum::<usize>(), 10);
    }

    #[test]
    fn too_many_clusters_is_error() {
        let pts = vec![Vec3::new(0.0, 0.0, 0.0); 3];
        assert!(kmeans_split(&pts, &[0, 1, 2], 4, 0).is_err());
        assert!(kmeans_split(&pts, &[0, 1, 2], 0, 0).is_err());
    }

    fn sse(points: &[Vec3], cluster: &[usize]) -> f64 {
        let c = cluster.iter().fold(Vec3::zero(), |a, &i| a + points[i]) / cluster.len() as f64;
        cluster.iter().map(|&i| points[i].distance_squared(c)).sum()
    }

    /// Exhaustive best 2-partition by within-cluster SSE.
    fn best_two_partition(points: &[Vec3]) -> Vec<Vec<usize>> {
        let n = points.len();
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 1u32..(1 << (n - 1)) {
            let a: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let b: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
            let cost = sse(points, &a) + sse(points, &b);
            if cost < best.0 {
                let mut parts = vec![a, b];
                parts.sort_by_key(|c| c[0]);
                best = (cost, parts);
            }
        }
        best.1
    }

    #[test]
    fn two_blobs_match_exhaustive_partition() {
        let noise = Normal::new(0.0, 0.1).unwrap();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..=12);
            let pts: Vec<Vec3> = (0..n)
                .map(|i| {
                    let c = match i {
                        0 => 0.0,
                        1 => 3.0,
                        _ if rng.gen_bool(0.5) => 0.0,
                        _ => 3.0,
                    };
                    Vec3::new(
                        c + noise.sample(&mut rng),
                        noise.sample(&mut rng),
                        c + noise.sample(&mut rng),
                    )
                })
                .collect();
            let idx: Vec<usize> = (0..n).collect();
            let oracle = best_two_partition(&pts);
            assert_eq!(kmeans_split(&pts, &idx, 2, seed).unwrap(), oracle, "seed {seed}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Vec3> = (0..300)
            .map(|_| Vec3::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), 0.0))
            .collect();
        let idx: Vec<usize> = (0..300).collect();
        let a = kmeans_split(&pts, &idx, 7, 42).unwrap();
        let b = kmeans_split(&pts, &idx, 7, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 7);
    }
}
