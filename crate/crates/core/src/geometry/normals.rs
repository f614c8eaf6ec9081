//! PCA normal estimation over k-nearest neighbourhoods.

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::eigen::{covariance, symmetric_eigen3, SymmetricEigen3};
use crate::geometry::index::NeighborIndex;
use crate::scalar::Real;
use crate::vec3::Vec3;

pub const DEFAULT_NORMAL_K: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalEstimate<T = f64> {
    /// Unit normals with canonical sign (z > 0, then y, then x).
    pub normals: Vec<Vec3<T>>,
    /// Set where the neighbourhood covariance has rank < 2.
    pub unreliable: Vec<bool>,
}

/// Eigen-decomposition of the covariance of each point's k-NN.
pub(crate) fn local_eigens<T: Real>(index: &NeighborIndex<T>, k: usize) -> Vec<SymmetricEigen3<T>> {
    let points = index.points();
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let nn = index.neighbors_of(i, k);
            symmetric_eigen3(covariance(points, &nn).1)
        })
        .collect()
}

pub(crate) fn canonical_normal<T: Real>(e: &SymmetricEigen3<T>) -> Vec3<T> {
    e.smallest_vector()
        .normalized()
        .unwrap_or_else(Vec3::unit_z)
        .canonical_sign()
}

pub fn estimate_normals<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    k: usize,
) -> Result<NormalEstimate<T>> {
    if k < 3 {
        return Err(Error::param("k", format!("normal estimation needs k >= 3, got {k}")));
    }
    if index.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: index.len(),
        });
    }
    let eig = local_eigens(index, k);
    Ok(NormalEstimate {
        normals: eig.iter().map(canonical_normal).collect(),
        unreliable: eig.iter().map(|e| e.is_rank_deficient()).collect(),
    })
}

/// Normals stored in the cloud when present, otherwise PCA estimates.
pub fn normals_or_estimate<T: Real>(cloud: &PointCloud<T>, index: &NeighborIndex<T>, k: usize) -> Result<Vec<Vec3<T>>> {
    match cloud.normals() {
        Some(n) => Ok(n.to_vec()),
        None => Ok(estimate_normals(cloud, index, k)?.normals),
    }
}
