//! Dataset degradation operators for robustness studies. Every operator is
//! deterministic given its inputs and seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{InstanceLabeling, Label, PointCloud, NOISE};
use crate::error::{Error, Result};
use crate::geometry::index::NeighborIndex;
use crate::geometry::plane::{fit_plane_with, Plane};
use crate::scalar::Real;
use crate::vec3::Vec3;

pub const DEFAULT_KEEP_FRACTION: f64 = 0.5;
pub const DEFAULT_SPACING: f64 = 1.0;
pub const DEFAULT_SHIFT_FRACTION: f64 = 0.4;
pub const DEFAULT_MAX_OFFSET: f64 = 0.5;
pub const DEFAULT_SWAP_RADIUS: f64 = 0.5;

fn check_labels(cloud_len: usize, labeling: &InstanceLabeling) -> Result<()> {
    if labeling.len() != cloud_len {
        return Err(Error::LengthMismatch {
            expected: cloud_len,
            found: labeling.len(),
        });
    }
    Ok(())
}

/// Number of points kept by [`downsample`].
pub fn kept_count(n: usize, keep_fraction: f64) -> usize {
    // the small slack keeps products like 0.7·10 from rounding up to 8
    ((keep_fraction * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Uniform random subset of ⌈keep_fraction·N⌉ points in original order.
pub fn downsample<T: Real>(
    cloud: &PointCloud<T>,
    labeling: Option<&InstanceLabeling>,
    keep_fraction: f64,
    seed: u64,
) -> Result<(PointCloud<T>, Option<InstanceLabeling>)> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::param(
            "keep_fraction",
            format!("must lie in (0, 1], got {keep_fraction}"),
        ));
    }
    if let Some(l) = labeling {
        check_labels(cloud.len(), l)?;
    }
    let n = cloud.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = rand::seq::index::sample(&mut rng, n, kept_count(n, keep_fraction)).into_vec();
    kept.sort_unstable();
    Ok((cloud.select(&kept), labeling.map(|l| l.select(&kept))))
}

/// Best-fit plane of every instance with a non-degenerate support.
pub fn fit_label_planes<T: Real>(
    cloud: &PointCloud<T>,
    labeling: &InstanceLabeling,
) -> Result<BTreeMap<Label, Plane<T>>> {
    check_labels(cloud.len(), labeling)?;
    Ok(labeling
        .instances()
        .into_iter()
        .filter_map(|(l, m)| fit_plane_with(cloud.points(), None, &m).ok().map(|p| (l, p.plane())))
        .collect())
}

/// Pulls points toward evenly spaced planes x = x_min + (i + ½)·spacing.
/// Each point moves toward its nearest centre plane by a uniform distance in
/// `[0, max_shift]`, never past it. Labeled points move inside their true
/// plane (the shift is projected onto it); NOISE points move along x.
pub fn density_variation<T: Real>(
    cloud: &PointCloud<T>,
    labeling: &InstanceLabeling,
    planes: &BTreeMap<Label, Plane<T>>,
    spacing: T,
    max_shift: T,
    seed: u64,
) -> Result<PointCloud<T>> {
    check_labels(cloud.len(), labeling)?;
    if !(spacing > T::zero()) || !spacing.is_finite() {
        return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
    }
    let half = spacing * T::lit(0.5);
    if !(max_shift >= T::zero() && max_shift < half) {
        return Err(Error::param(
            "max_shift",
            format!("must lie in [0, spacing/2), got {max_shift}"),
        ));
    }
    if let Some(l) = labeling
        .labels()
        .iter()
        .find(|&&l| l != NOISE && !planes.contains_key(&l))
    {
        return Err(Error::InvalidData(format!("no plane for instance {l}")));
    }
    let Some((lo, _)) = cloud.bounds() else {
        return Ok(cloud.clone());
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = max_shift.to_f64().unwrap_or(0.0);
    let points = cloud
        .points()
        .iter()
        .zip(labeling.labels())
        .map(|(&p, &l)| {
            let u = T::lit(if max > 0.0 { rng.gen_range(0.0..=max) } else { 0.0 });
            let cell = ((p.x - lo.x) / spacing).floor();
            let centre = lo.x + (cell + T::lit(0.5)) * spacing;
            let gap = centre - p.x;
            let step = Vec3::new(gap.signum() * u.min(gap.abs()), T::zero(), T::zero());
            let step = match planes.get(&l) {
                Some(plane) if l != NOISE => step - plane.normal * step.dot(plane.normal),
                _ => step,
            };
            p + step
        })
        .collect();
    cloud.with_points(points)
}

/// Adds an independent offset of uniform magnitude in `[0, max_offset]`
/// and random sign to every coordinate.
pub fn precision_reduction<T: Real>(cloud: &PointCloud<T>, max_offset: T, seed: u64) -> Result<PointCloud<T>> {
    if !(max_offset >= T::zero()) || !max_offset.is_finite() {
        return Err(Error::param(
            "max_offset",
            format!("must be nonnegative, got {max_offset}"),
        ));
    }
    let max = max_offset.to_f64().unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offset = || {
        let m = if max > 0.0 { rng.gen_range(0.0..=max) } else { 0.0 };
        T::lit(if rng.gen::<bool>() { m } else { -m })
    };
    let points = cloud
        .points()
        .iter()
        .map(|&p| {
            let d = Vec3::new(offset(), offset(), offset());
            p + d
        })
        .collect();
    cloud.with_points(points)
}

/// Cross-instance pairs closer than `radius`, each listed once as (i, j)
/// with i < j.
pub fn boundary_pairs<T: Real>(
    index: &NeighborIndex<T>,
    labeling: &InstanceLabeling,
    radius: T,
) -> Vec<(usize, usize)> {
    let labels = labeling.labels();
    let r2 = radius * radius;
    let mut pairs = Vec::new();
    for (i, &p) in index.points().iter().enumerate() {
        if labels[i] == NOISE {
            continue;
        }
        for nb in index.radius(p, radius) {
            let j = nb.index;
            if j > i && nb.dist2 < r2 && labels[j] != NOISE && labels[j] != labels[i] {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Swaps labels across a random maximal set of disjoint cross-instance
/// pairs closer than `radius`.
pub fn corrupt_boundaries<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    labeling: &InstanceLabeling,
    radius: T,
    seed: u64,
) -> Result<InstanceLabeling> {
    check_labels(cloud.len(), labeling)?;
    if index.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: index.len(),
        });
    }
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::param("radius", format!("must be positive, got {radius}")));
    }
    let mut pairs = boundary_pairs(index, labeling, radius);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    let mut used = vec![false; cloud.len()];
    let mut labels = labeling.labels().to_vec();
    for (i, j) in pairs {
        if used[i] || used[j] {
            continue;
        }
        used[i] = true;
        used[j] = true;
        labels.swap(i, j);
    }
    InstanceLabeling::new(labels)
}
