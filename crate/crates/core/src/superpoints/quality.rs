//! Measurable forms of the superpoint criteria: label purity for accurate
//! boundaries, size dispersion and PCA elongation for uniformity.

use std::collections::HashMap;

use serde::Serialize;

use crate::cloud::{InstanceLabeling, PointCloud};
use crate::error::{Error, Result};
use crate::geometry::eigen::{covariance, symmetric_eigen3};
use crate::scalar::Real;
use crate::superpoints::partition::SuperpointPartition;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ShapeStats {
    /// Groups with a well-defined elongation (>= 3 points, rank >= 2).
    pub measured_groups: usize,
    pub mean_elongation: f64,
    pub median_elongation: f64,
    pub max_elongation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperpointQuality {
    /// Size-weighted mean of each group's dominant label share.
    pub boundary_purity: f64,
    /// Coefficient of variation of group sizes.
    pub size_cv: f64,
    pub shape: ShapeStats,
}

/// Share of the most frequent label in each group.
pub fn group_purities(partition: &SuperpointPartition, gt: &InstanceLabeling) -> Vec<f64> {
    partition
        .groups()
        .iter()
        .map(|g| {
            let mut counts: HashMap<i64, usize> = HashMap::new();
            for &i in g {
                *counts.entry(gt.get(i)).or_insert(0) += 1;
            }
            *counts.values().max().unwrap_or(&0) as f64 / g.len() as f64
        })
        .collect()
}

pub fn coefficient_of_variation(sizes: &[usize]) -> f64 {
    if sizes.is_empty() {
        return 0.0;
    }
    let n = sizes.len() as f64;
    let mean = sizes.iter().sum::<usize>() as f64 / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

pub fn shape_stats<T: Real>(cloud: &PointCloud<T>, partition: &SuperpointPartition) -> ShapeStats {
    let mut elong: Vec<f64> = partition
        .groups()
        .iter()
        .filter(|g| g.len() >= 3)
        .filter_map(|g| {
            let e = symmetric_eigen3(covariance(cloud.points(), g).1);
            (!e.is_rank_deficient()).then(|| {
                let [l1, l2, _] = e.clamped_values();
                (l1 / l2).as_f64()
            })
        })
        .collect();
    if elong.is_empty() {
        return ShapeStats::default();
    }
    elong.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = elong.len();
    let median = if m % 2 == 1 {
        elong[m / 2]
    } else {
        0.5 * (elong[m / 2 - 1] + elong[m / 2])
    };
    ShapeStats {
        measured_groups: m,
        mean_elongation: elong.iter().sum::<f64>() / m as f64,
        median_elongation: median,
        max_elongation: elong[m - 1],
    }
}

pub fn superpoint_quality<T: Real>(
    cloud: &PointCloud<T>,
    partition: &SuperpointPartition,
    gt: &InstanceLabeling,
) -> Result<SuperpointQuality> {
    if gt.len() != partition.n_points() || cloud.len() != partition.n_points() {
        return Err(Error::LengthMismatch {
            expected: partition.n_points(),
            found: if gt.len() != partition.n_points() {
                gt.len()
            } else {
                cloud.len()
            },
        });
    }
    let purities = group_purities(partition, gt);
    let total: usize = partition.sizes().iter().sum();
    let weighted: f64 = purities
        .iter()
        .zip(partition.groups())
        .map(|(p, g)| p * g.len() as f64)
        .sum();
    Ok(SuperpointQuality {
        boundary_purity: if total == 0 { 1.0 } else { weighted / total as f64 },
        size_cv: coefficient_of_variation(&partition.sizes()),
        shape: shape_stats(cloud, partition),
    })
}
