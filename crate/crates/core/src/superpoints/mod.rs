//! Two-stage superpoint generation.
//!
//! Stage one grows planar regions under strict thresholds and cleans their
//! borders with iterative boundary refinement; each region becomes a coarse
//! superpoint and all unfitted points form one noise group. Stage two splits
//! every coarse group with k-means so that fine superpoints have roughly
//! `n` points, using smaller clusters for the noise group.

pub mod growth;
pub mod kmeans;
pub mod partition;
pub mod quality;
pub mod refine;

use rayon::prelude::*;

use crate::cloud::{InstanceLabeling, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::index::NeighborIndex;
use crate::geometry::DEFAULT_LAMBDA;
use crate::scalar::Real;
use crate::vec3::Vec3;

pub use growth::{region_grow, GrowthParams};
pub use kmeans::kmeans_split;
pub use partition::{Stage, SuperpointPartition};
pub use quality::{superpoint_quality, ShapeStats, SuperpointQuality};
pub use refine::{
    refine_boundaries, refine_boundaries_local, RefineOptions, DEFAULT_LOCAL_ITERATIONS, DEFAULT_REFINE_K,
};

pub const DEFAULT_POINTS_PER_SUPERPOINT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseConfig<T = f64> {
    pub growth: GrowthParams<T>,
    pub refine: RefineOptions<T>,
}

impl<T: Real> Default for CoarseConfig<T> {
    fn default() -> Self {
        let growth = GrowthParams::default();
        Self {
            growth,
            refine: RefineOptions {
                lambda: T::lit(DEFAULT_LAMBDA),
                k_b: DEFAULT_REFINE_K,
                iterations: DEFAULT_LOCAL_ITERATIONS,
                noise_gate: Some(growth.t_dist),
            },
        }
    }
}

/// Region growing followed by local boundary refinement.
pub fn coarse_labeling<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    config: &CoarseConfig<T>,
) -> Result<InstanceLabeling> {
    let grown = region_grow(cloud, index, normals, &config.growth, None)?;
    refine_boundaries(cloud, index, normals, &grown, &config.refine)
}

/// Coarse groups ordered by instance id; NOISE points, if any, form the
/// last group.
pub fn partition_from_labeling(labeling: &InstanceLabeling, stage: Stage) -> Result<SuperpointPartition> {
    let mut groups: Vec<Vec<usize>> = labeling.instances().into_values().collect();
    let noise = labeling.noise_indices();
    let mut noise_ids = Vec::new();
    if !noise.is_empty() {
        noise_ids.push(groups.len());
        groups.push(noise);
    }
    SuperpointPartition::new(groups, stage, noise_ids, labeling.len())
}

pub fn make_coarse<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    config: &CoarseConfig<T>,
) -> Result<SuperpointPartition> {
    partition_from_labeling(&coarse_labeling(cloud, index, normals, config)?, Stage::Coarse)
}

/// Number of k-means clusters for a coarse group of `size` points:
/// `ceil(size / n)` for large groups, `ceil(size / 2)` for groups of at
/// most `n` points, and twice `ceil(size / n)` (capped at `size`) for the
/// noise group.
pub fn fine_cluster_count(size: usize, n: usize, is_noise: bool) -> usize {
    if size == 0 {
        return 0;
    }
    if is_noise {
        (2 * size.div_ceil(n)).min(size)
    } else if size > n {
        size.div_ceil(n)
    } else {
        size.div_ceil(2)
    }
}

fn group_seed(seed: u64, group: usize) -> u64 {
    seed ^ (group as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn make_fine<T: Real>(
    cloud: &PointCloud<T>,
    coarse: &SuperpointPartition,
    n: usize,
    seed: u64,
) -> Result<SuperpointPartition> {
    if n < 2 {
        return Err(Error::param(
            "n",
            format!("points per superpoint must be >= 2, got {n}"),
        ));
    }
    if coarse.n_points() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: coarse.n_points(),
        });
    }
    let points = cloud.points();
    let split: Vec<(bool, Vec<Vec<usize>>)> = coarse
        .groups()
        .par_iter()
        .enumerate()
        .map(|(g, members)| {
            let is_noise = coarse.is_noise_group(g);
            let k = fine_cluster_count(members.len(), n, is_noise);
            kmeans_split(points, members, k, group_seed(seed, g)).map(|c| (is_noise, c))
        })
        .collect::<Result<_>>()?;
    let mut groups = Vec::new();
    let mut noise_ids = Vec::new();
    for (is_noise, clusters) in split {
        for c in clusters {
            if is_noise {
                noise_ids.push(groups.len());
            }
            groups.push(c);
        }
    }
    SuperpointPartition::new(groups, Stage::Fine, noise_ids, cloud.len())
}

#[derive(Clone, Debug)]
pub struct Superpoints {
    pub coarse: SuperpointPartition,
    pub fine: SuperpointPartition,
}

pub fn generate_superpoints<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    config: &CoarseConfig<T>,
    n: usize,
    seed: u64,
) -> Result<Superpoints> {
    let coarse = make_coarse(cloud, index, normals, config)?;
    let fine = make_fine(cloud, &coarse, n, seed)?;
    Ok(Superpoints { coarse, fine })
}
