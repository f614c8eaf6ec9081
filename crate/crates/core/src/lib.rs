//! Roof-plane instance segmentation toolkit for airborne point clouds.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases. Labelings use [`NOISE`] (−1)
//! for points that belong to no plane.
//!
//! Main entry points:
//! - [`superpoints::generate_superpoints`] for the two-stage superpoint
//!   partition,
//! - [`postprocess::pipeline`] for segmentation, plane completion and
//!   boundary refinement,
//! - [`metrics::evaluate`] for coverage and matching metrics,
//! - [`degrade`] for robustness perturbations,
//! - [`kan`] for the Fourier KAN kernel.

// `!(x > 0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cloud;
pub mod config;
pub mod degrade;
pub mod error;
pub mod features;
pub mod geometry;
pub mod io;
pub mod kan;
pub mod metrics;
pub mod postprocess;
pub mod scalar;
pub mod superpoints;
pub mod synthetic;
pub mod vec3;

pub use cloud::{InstanceLabeling, Label, PointCloud, NOISE};
pub use error::{Error, Result};
pub use scalar::Real;
pub use vec3::Vec3;

pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type Vec3d = Vec3<f64>;
pub type Vec3f = Vec3<f32>;
pub type NeighborIndex64 = geometry::index::NeighborIndex<f64>;
pub type NeighborIndex32 = geometry::index::NeighborIndex<f32>;
pub type PlaneModel64 = geometry::plane::PlaneModel<f64>;
pub type PlaneModel32 = geometry::plane::PlaneModel<f32>;
pub type GrowthParams64 = superpoints::GrowthParams<f64>;
pub type GrowthParams32 = superpoints::GrowthParams<f32>;
pub type FourierKanLayer64 = kan::FourierKanLayer<f64>;
pub type FourierKanLayer32 = kan::FourierKanLayer<f32>;
