//! Total-least-squares plane fitting.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::eigen::{covariance, symmetric_eigen3, Moments};
use crate::geometry::normal_cosine_distance;
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Plane `{p : normal·p + offset = 0}` with unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane<T = f64> {
    pub normal: Vec3<T>,
    pub offset: T,
}

impl<T: Real> Plane<T> {
    /// Plane through `point`; `normal` must be nonzero.
    pub fn through(point: Vec3<T>, normal: Vec3<T>) -> Option<Self> {
        let normal = normal.normalized()?;
        Some(Self {
            normal,
            offset: -normal.dot(point),
        })
    }

    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        self.normal.dot(p) + self.offset
    }

    pub fn distance(&self, p: Vec3<T>) -> T {
        self.signed_distance(p).abs()
    }

    /// Orthogonal projection of `p` onto the plane.
    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        p - self.normal * self.signed_distance(p)
    }

    /// Least-squares plane from accumulated moments; `None` when the points
    /// are collinear or coincident.
    pub fn from_moments(m: &Moments<T>) -> Option<Self> {
        if m.count() < 3 {
            return None;
        }
        let e = m.eigen();
        if e.is_rank_deficient() {
            return None;
        }
        Self::through(m.centroid(), e.smallest_vector().canonical_sign())
    }
}

/// Fitted plane with its member points and the tightest thresholds that
/// admit every member.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneModel<T = f64> {
    pub normal: Vec3<T>,
    pub offset: T,
    pub support: Vec<usize>,
    /// Largest perpendicular distance of a member, meters.
    pub t_dist: T,
    /// Largest normal cosine distance of a member; `None` without normals.
    pub t_norm: Option<T>,
}

impl<T: Real> PlaneModel<T> {
    pub fn plane(&self) -> Plane<T> {
        Plane {
            normal: self.normal,
            offset: self.offset,
        }
    }

    pub fn distance(&self, p: Vec3<T>) -> T {
        self.plane().distance(p)
    }
}

/// Fits a plane to `cloud[indices]`, using the cloud's normals (if any) for
/// `t_norm`.
pub fn fit_plane<T: Real>(cloud: &PointCloud<T>, indices: &[usize]) -> Result<PlaneModel<T>> {
    fit_plane_with(cloud.points(), cloud.normals(), indices)
}

pub fn fit_plane_with<T: Real>(
    points: &[Vec3<T>],
    normals: Option<&[Vec3<T>]>,
    indices: &[usize],
) -> Result<PlaneModel<T>> {
    if indices.len() < 3 {
        return Err(Error::Degenerate("plane fit needs at least 3 points"));
    }
    let (centroid, cov) = covariance(points, indices);
    let eig = symmetric_eigen3(cov);
    if eig.is_rank_deficient() {
        return Err(Error::Degenerate("points are collinear or coincident"));
    }
    let plane = Plane::through(centroid, eig.smallest_vector().canonical_sign())
        .ok_or(Error::Degenerate("zero plane normal"))?;
    let t_dist = indices
        .iter()
        .map(|&i| plane.distance(points[i]))
        .fold(T::zero(), T::max);
    let t_norm = normals.map(|ns| {
        indices
            .iter()
            .map(|&i| normal_cosine_distance(ns[i], plane.normal))
            .fold(T::zero(), T::max)
    });
    Ok(PlaneModel {
        normal: plane.normal,
        offset: plane.offset,
        support: indices.to_vec(),
        t_dist,
        t_norm,
    })
}
