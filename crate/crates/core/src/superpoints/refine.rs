//! Boundary refinement: points whose neighbourhood holds another instance
//! are reassigned to the candidate plane with the smallest composite
//! distance. Iterating with plane refits gives the local refinement used
//! while building superpoints; a single pass against the input planes gives
//! the fast postprocessing variant.

use std::collections::BTreeMap;

use crate::cloud::{InstanceLabeling, Label, PointCloud, NOISE};
use crate::error::{Error, Result};
use crate::geometry::index::NeighborIndex;
use crate::geometry::plane::{fit_plane_with, Plane};
use crate::geometry::{composite_unchecked, normal_cosine_distance};
use crate::scalar::Real;
use crate::vec3::Vec3;

pub const DEFAULT_REFINE_K: usize = 8;
pub const DEFAULT_LOCAL_ITERATIONS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineOptions<T = f64> {
    pub lambda: T,
    /// Neighbourhood size defining boundary points and candidate labels.
    pub k_b: usize,
    /// Passes; planes are refitted from the current labeling before each.
    pub iterations: usize,
    /// NOISE points next to an instance join the best candidate plane when
    /// they lie within this distance of it. `None` leaves NOISE untouched.
    pub noise_gate: Option<T>,
}

impl<T: Real> RefineOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > T::zero()) {
            return Err(Error::param("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if let Some(g) = self.noise_gate {
            if !(g >= T::zero()) {
                return Err(Error::param("noise_gate", format!("must be nonnegative, got {g}")));
            }
        }
        if self.k_b < 2 {
            return Err(Error::param("k_b", format!("must be >= 2, got {}", self.k_b)));
        }
        Ok(())
    }
}

fn fit_instance_planes<T: Real>(points: &[Vec3<T>], labeling: &InstanceLabeling) -> BTreeMap<Label, Plane<T>> {
    labeling
        .instances()
        .into_iter()
        .filter_map(|(l, members)| fit_plane_with(points, None, &members).ok().map(|m| (l, m.plane())))
        .collect()
}

/// True when the k-NN of `i` holds a non-NOISE label other than its own.
fn is_boundary(labels: &[Label], own: Label, neighbors: &[usize]) -> bool {
    neighbors.iter().any(|&j| labels[j] != NOISE && labels[j] != own)
}

/// One synchronous reassignment pass; returns the number of changed points.
fn refine_pass<T: Real>(
    points: &[Vec3<T>],
    normals: &[Vec3<T>],
    neighbors: &[Vec<usize>],
    planes: &BTreeMap<Label, Plane<T>>,
    labels: &mut [Label],
    lambda: T,
    noise_gate: Option<T>,
) -> usize {
    let score = |i: usize, plane: &Plane<T>| {
        composite_unchecked(
            plane.distance(points[i]),
            normal_cosine_distance(normals[i], plane.normal),
            lambda,
        )
    };
    let updates: Vec<(usize, Label)> = (0..labels.len())
        .filter_map(|i| {
            let own = labels[i];
            if (own == NOISE && noise_gate.is_none()) || !is_boundary(labels, own, &neighbors[i]) {
                return None;
            }
            let mut candidates: Vec<Label> = neighbors[i]
                .iter()
                .map(|&j| labels[j])
                .filter(|&l| l != NOISE && l != own)
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            // ties keep the current label, then prefer the smaller id
            let mut best = (planes.get(&own).map_or(T::infinity(), |p| score(i, p)), own);
            for l in candidates {
                if let Some(p) = planes.get(&l) {
                    let s = score(i, p);
                    if s < best.0 {
                        best = (s, l);
                    }
                }
            }
            if own == NOISE {
                let gate = noise_gate?;
                let plane = planes.get(&best.1)?;
                return (plane.distance(points[i]) <= gate).then_some((i, best.1));
            }
            (best.1 != own).then_some((i, best.1))
        })
        .collect();
    for &(i, l) in &updates {
        labels[i] = l;
    }
    updates.len()
}

/// Shared refinement routine. NOISE never acts as a candidate label; NOISE
/// points are reassigned only through `noise_gate`.
pub fn refine_boundaries<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    labeling: &InstanceLabeling,
    options: &RefineOptions<T>,
) -> Result<InstanceLabeling> {
    options.validate()?;
    let n = cloud.len();
    for len in [index.len(), normals.len(), labeling.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let points = cloud.points();
    let neighbors = index.knn_table(options.k_b);
    let mut labels = labeling.labels().to_vec();
    for _ in 0..options.iterations {
        let current = InstanceLabeling::new(labels.clone())?;
        let planes = fit_instance_planes(points, &current);
        if refine_pass(
            points,
            normals,
            &neighbors,
            &planes,
            &mut labels,
            options.lambda,
            options.noise_gate,
        ) == 0
        {
            break;
        }
    }
    InstanceLabeling::new(labels)
}

/// Iterative refinement with plane refits between passes; NOISE untouched.
pub fn refine_boundaries_local<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    labeling: &InstanceLabeling,
    lambda: T,
    k_b: usize,
    iterations: usize,
) -> Result<InstanceLabeling> {
    refine_boundaries(
        cloud,
        index,
        normals,
        labeling,
        &RefineOptions {
            lambda,
            k_b,
            iterations,
            noise_gate: None,
        },
    )
}
