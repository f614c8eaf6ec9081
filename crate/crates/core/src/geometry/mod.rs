//! Spatial indexing, normals, plane fitting and the point-to-plane distances
//! used by growth and refinement.

pub mod eigen;
pub mod index;
pub mod normals;
pub mod plane;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

pub use eigen::{symmetric_eigen3, Moments, SymmetricEigen3};
pub use index::{Neighbor, NeighborIndex};
pub use normals::{estimate_normals, normals_or_estimate, NormalEstimate, DEFAULT_NORMAL_K};
pub use plane::{fit_plane, fit_plane_with, Plane, PlaneModel};

/// Weight of the perpendicular-distance term in boundary refinement.
pub const DEFAULT_LAMBDA: f64 = 20.0;

/// `1 - |a·b|` for unit vectors, in `[0, 1]`. Orientation-free.
#[inline]
pub fn normal_cosine_distance<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    (T::one() - a.dot(b).abs()).max(T::zero())
}

/// `lambda · p2p + n2n`.
pub fn composite_distance<T: Real>(p2p: T, n2n: T, lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    Ok(lambda * p2p + n2n)
}

#[inline]
pub(crate) fn composite_unchecked<T: Real>(p2p: T, n2n: T, lambda: T) -> T {
    lambda * p2p + n2n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_reference_value() {
        let d = composite_distance(0.1, 0.05, DEFAULT_LAMBDA).unwrap();
        assert!((d - 2.05).abs() < 1e-12);
    }

    #[test]
    fn composite_zero() {
        for l in [0.5, 1.0, 20.0, 1e6] {
            assert_eq!(composite_distance(0.0, 0.0, l).unwrap(), 0.0);
        }
    }

    #[test]
    fn composite_monotone_in_p2p() {
        let base: f64 = composite_distance(0.3, 0.2, 20.0).unwrap();
        let bumped = composite_distance(0.31, 0.2, 20.0).unwrap();
        assert!((bumped - base - 0.01 * 20.0).abs() < 1e-12);
    }

    #[test]
    fn composite_rejects_nonpositive_lambda() {
        assert!(composite_distance(0.1, 0.1, 0.0).is_err());
        assert!(composite_distance(0.1, 0.1, -3.0).is_err());
        assert!(composite_distance(0.1, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn cosine_distance_ignores_orientation() {
        let a = Vec3::<f64>::new(0.0, 0.0, 1.0);
        assert_eq!(normal_cosine_distance(a, -a), 0.0);
        assert!((normal_cosine_distance(a, Vec3::new(1.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    }
}
