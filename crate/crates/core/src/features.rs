//! Per-point handcrafted features: dimensionality descriptors from the
//! neighbourhood covariance, verticality, and the contour (max angular gap)
//! feature.

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::eigen::{covariance, symmetric_eigen3, SymmetricEigen3};
use crate::geometry::index::NeighborIndex;
use crate::geometry::normals::{canonical_normal, local_eigens};
use crate::scalar::Real;
use crate::vec3::Vec3;

pub const DEFAULT_FEATURE_K: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GeometricFeatures<T = f64> {
    pub linearity: T,
    pub planarity: T,
    pub scattering: T,
    pub verticality: T,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ContourFeature<T = f64> {
    /// Largest circular gap between tangent-plane neighbour directions, radians.
    pub alpha: T,
    pub is_contour: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FeatureVector<T = f64> {
    pub geometric: GeometricFeatures<T>,
    pub contour: ContourFeature<T>,
}

impl<T: Real> FeatureVector<T> {
    /// Export row: linearity, planarity, scattering, verticality,
    /// alpha / 2π, contour flag. Every entry lies in `[0, 1]`.
    pub fn to_row(&self) -> [T; 6] {
        let g = &self.geometric;
        [
            g.linearity,
            g.planarity,
            g.scattering,
            g.verticality,
            self.contour.alpha / T::TAU(),
            if self.contour.is_contour { T::one() } else { T::zero() },
        ]
    }
}

fn check_index<T: Real>(cloud: &PointCloud<T>, index: &NeighborIndex<T>) -> Result<()> {
    if index.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: index.len(),
        });
    }
    Ok(())
}

pub(crate) fn features_from_eigen<T: Real>(e: &SymmetricEigen3<T>, scale: T) -> GeometricFeatures<T> {
    let [l1, l2, l3] = e.clamped_values();
    // coincident neighbourhood: spread is pure round-off
    let floor = T::epsilon() * T::lit(8.0) * (T::one() + scale);
    if l1.sqrt() <= floor {
        return GeometricFeatures::default();
    }
    GeometricFeatures {
        linearity: (l1 - l2) / l1,
        planarity: (l2 - l3) / l1,
        scattering: l3 / l1,
        verticality: T::one() - canonical_normal(e).z.abs(),
    }
}

fn coordinate_scale<T: Real>(p: Vec3<T>) -> T {
    p.x.abs().max(p.y.abs()).max(p.z.abs())
}

pub fn geometric_features<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    k: usize,
) -> Result<Vec<GeometricFeatures<T>>> {
    if k < 3 {
        return Err(Error::param(
            "k",
            format!("feature neighbourhood needs k >= 3, got {k}"),
        ));
    }
    check_index(cloud, index)?;
    Ok(local_eigens(index, k)
        .iter()
        .zip(cloud.points())
        .map(|(e, p)| features_from_eigen(e, coordinate_scale(*p)))
        .collect())
}

/// Gaps between consecutive sorted angles (radians in `[0, 2π)`), including
/// the wrap-around gap from the last angle back to the first. The gaps of a
/// non-empty set always sum to 2π.
pub fn circular_gaps<T: Real>(angles: &[T]) -> Vec<T> {
    let mut sorted = angles.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut gaps: Vec<T> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    if let (Some(&first), Some(&last)) = (sorted.first(), sorted.last()) {
        gaps.push(first + T::TAU() - last);
    }
    gaps
}

/// Largest angular gap of the in-plane neighbour directions of point `i`.
fn max_gap_at<T: Real>(points: &[Vec3<T>], i: usize, neighbors: &[usize]) -> T {
    let (centroid, cov) = covariance(points, neighbors);
    let n = canonical_normal(&symmetric_eigen3(cov));
    let u = [Vec3::unit_x(), Vec3::unit_y()]
        .into_iter()
        .map(|axis| axis - n * axis.dot(n))
        .find_map(|v| if v.norm() > T::lit(1e-6) { v.normalized() } else { None })
        .unwrap_or_else(Vec3::unit_x);
    let w = n.cross(u);
    let p_i = points[i];
    let extent = neighbors
        .iter()
        .map(|&j| points[j].distance(p_i))
        .fold(T::zero(), T::max);
    let min_len = T::epsilon().sqrt() * extent;

    let angles: Vec<T> = neighbors
        .iter()
        .filter(|&&j| j != i)
        .filter_map(|&j| {
            let q = points[j];
            let projected = q - n * n.dot(q - centroid);
            let v = projected - p_i;
            let (a, b) = (v.dot(u), v.dot(w));
            if (a * a + b * b).sqrt() <= min_len {
                return None;
            }
            let ang = b.atan2(a);
            Some(if ang < T::zero() { ang + T::TAU() } else { ang })
        })
        .collect();
    if angles.len() < 2 {
        return T::TAU();
    }
    circular_gaps(&angles).into_iter().fold(T::zero(), T::max)
}

pub fn contour_feature<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    k: usize,
    tau: T,
) -> Result<Vec<ContourFeature<T>>> {
    if k < 4 {
        return Err(Error::param("k", format!("contour feature needs k >= 4, got {k}")));
    }
    if !(tau > T::zero() && tau < T::TAU()) {
        return Err(Error::param("tau", format!("must lie in (0, 2π), got {tau}")));
    }
    check_index(cloud, index)?;
    let points = cloud.points();
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| {
            let alpha = max_gap_at(points, i, &index.neighbors_of(i, k));
            ContourFeature {
                alpha,
                is_contour: alpha > tau,
            }
        })
        .collect())
}

pub fn compute_features<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    k: usize,
    contour_k: usize,
    tau: T,
) -> Result<Vec<FeatureVector<T>>> {
    let geometric = geometric_features(cloud, index, k)?;
    let contour = contour_feature(cloud, index, contour_k, tau)?;
    Ok(geometric
        .into_iter()
        .zip(contour)
        .map(|(geometric, contour)| FeatureVector { geometric, contour })
        .collect())
}
