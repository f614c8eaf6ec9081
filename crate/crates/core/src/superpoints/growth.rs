//! Region growing over k-NN adjacency with distance and normal admission
//! tests.

use std::collections::VecDeque;

use crate::cloud::{InstanceLabeling, Label, PointCloud, NOISE};
use crate::error::{Error, Result};
use crate::features::features_from_eigen;
use crate::geometry::eigen::Moments;
use crate::geometry::index::NeighborIndex;
use crate::geometry::normal_cosine_distance;
use crate::geometry::normals::local_eigens;
use crate::geometry::plane::Plane;
use crate::scalar::Real;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthParams<T = f64> {
    /// Max perpendicular distance to the region plane, meters.
    pub t_dist: T,
    /// Max normal cosine distance to the region plane.
    pub t_norm: T,
    pub k_growth: usize,
    /// Regions smaller than this dissolve to NOISE.
    pub min_region: usize,
    /// The region plane is refitted after this many admissions.
    pub refit_period: usize,
}

impl<T: Real> Default for GrowthParams<T> {
    fn default() -> Self {
        Self {
            t_dist: T::lit(0.05),
            t_norm: T::lit(0.1),
            k_growth: 16,
            min_region: 10,
            refit_period: 32,
        }
    }
}

impl<T: Real> GrowthParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_dist > T::zero()) || !self.t_dist.is_finite() {
            return Err(Error::param("t_dist", format!("must be positive, got {}", self.t_dist)));
        }
        if !(self.t_norm > T::zero() && self.t_norm <= T::one()) {
            return Err(Error::param(
                "t_norm",
                format!("must lie in (0, 1], got {}", self.t_norm),
            ));
        }
        if self.k_growth < 3 {
            return Err(Error::param("k_growth", format!("must be >= 3, got {}", self.k_growth)));
        }
        if self.min_region < 3 {
            return Err(Error::param(
                "min_region",
                format!("must be >= 3, got {}", self.min_region),
            ));
        }
        if self.refit_period == 0 {
            return Err(Error::param("refit_period", "must be >= 1"));
        }
        Ok(())
    }
}

/// Grows planar regions over `candidate_mask` points (all points when
/// `None`). Seeds are tried in descending planarity order with index
/// tie-break; a seed is eligible only when every neighbour normal is within
/// `t_norm` of its own, which keeps crease points from seeding regions. The
/// seed plane is fitted to the seed and its candidate neighbours.
/// Non-candidates and unclaimed candidates are NOISE in the output.
pub fn region_grow<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    params: &GrowthParams<T>,
    candidate_mask: Option<&[bool]>,
) -> Result<InstanceLabeling> {
    params.validate()?;
    let n = cloud.len();
    for len in [index.len(), normals.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if let Some(mask) = candidate_mask {
        if mask.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: mask.len(),
            });
        }
    }
    let is_candidate = |i: usize| candidate_mask.is_none_or(|m| m[i]);
    let points = cloud.points();
    let neighbors = index.knn_table(params.k_growth);
    let planarity: Vec<T> = local_eigens(index, params.k_growth)
        .iter()
        .zip(points)
        .map(|(e, p)| features_from_eigen(e, p.x.abs().max(p.y.abs()).max(p.z.abs())).planarity)
        .collect();

    let mut seeds: Vec<usize> = (0..n).filter(|&i| is_candidate(i)).collect();
    seeds.sort_by(|&a, &b| {
        planarity[b]
            .partial_cmp(&planarity[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut assigned: Vec<Option<Label>> = vec![None; n];
    let mut next_label: Label = 0;
    let mut queue = VecDeque::new();
    let mut region = Vec::new();

    for seed in seeds {
        if assigned[seed].is_some() {
            continue;
        }
        let seed_normal = normals[seed];
        let eligible = neighbors[seed]
            .iter()
            .all(|&j| normal_cosine_distance(normals[j], seed_normal) <= params.t_norm);
        if !eligible {
            continue;
        }
        // least-squares over the seed's candidate neighbourhood; a crease
        // seed's own normal can be tilted toward a plane that is not a candidate
        let mut local = Moments::new(points[seed]);
        local.add(points[seed]);
        for &j in neighbors[seed].iter().filter(|&&j| j != seed && is_candidate(j)) {
            local.add(points[j]);
        }
        let Some(mut plane) = Plane::from_moments(&local).or_else(|| Plane::through(points[seed], seed_normal)) else {
            continue;
        };
        let label = next_label;
        region.clear();
        queue.clear();
        let mut moments = Moments::new(points[seed]);
        let mut since_refit = 0usize;

        assigned[seed] = Some(label);
        region.push(seed);
        moments.add(points[seed]);
        queue.push_back(seed);
        while let Some(q) = queue.pop_front() {
            for &j in &neighbors[q] {
                if assigned[j].is_some() || !is_candidate(j) {
                    continue;
                }
                if plane.distance(points[j]) > params.t_dist
                    || normal_cosine_distance(normals[j], plane.normal) > params.t_norm
                {
                    continue;
                }
                assigned[j] = Some(label);
                region.push(j);
                moments.add(points[j]);
                queue.push_back(j);
                since_refit += 1;
                if since_refit >= params.refit_period {
                    since_refit = 0;
                    if let Some(p) = Plane::from_moments(&moments) {
                        plane = p;
                    }
                }
            }
        }

        if region.len() < params.min_region {
            for &i in &region {
                assigned[i] = None;
            }
        } else {
            next_label += 1;
        }
    }

    InstanceLabeling::new(assigned.into_iter().map(|a| a.unwrap_or(NOISE)).collect())
}
