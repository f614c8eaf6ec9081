//! Point clouds and per-point instance labelings.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Instance id attached to a point.
pub type Label = i64;

/// Label of points that belong to no plane instance.
pub const NOISE: Label = -1;

/// Immutable set of 3D points with optional unit normals.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T = f64> {
    id: String,
    points: Vec<Vec3<T>>,
    normals: Option<Vec<Vec3<T>>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(id: impl Into<String>, points: Vec<Vec3<T>>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite coordinate at point {i}")));
        }
        Ok(Self {
            id: id.into(),
            points,
            normals: None,
        })
    }

    /// Attaches normals. Normals not already of unit length are renormalized; zero or non-finite
    /// normals are rejected.
    pub fn with_normals(mut self, normals: Vec<Vec3<T>>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                expected: self.points.len(),
                found: normals.len(),
            });
        }
        let normals = normals
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                if n.is_finite() && (n.norm() - T::one()).abs() <= T::epsilon() * T::lit(4.0) {
                    // already unit: keep the exact bits so files round-trip
                    return Ok(n);
                }
                n.normalized()
                    .ok_or_else(|| Error::InvalidData(format!("degenerate normal at point {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Vec3<T> {
        self.points[i]
    }

    pub fn normals(&self) -> Option<&[Vec3<T>]> {
        self.normals.as_deref()
    }

    /// New cloud keeping only `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            id: self.id.clone(),
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self.normals.as_ref().map(|n| indices.iter().map(|&i| n[i]).collect()),
        }
    }

    /// Same cloud with replaced coordinates. Normals are dropped because they
    /// no longer describe the moved points.
    pub fn with_points(&self, points: Vec<Vec3<T>>) -> Result<Self> {
        if points.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                expected: self.points.len(),
                found: points.len(),
            });
        }
        Self::new(self.id.clone(), points)
    }

    pub fn bounds(&self) -> Option<(Vec3<T>, Vec3<T>)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (
                Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }
}

/// Per-point instance assignment. Ids carry no meaning beyond equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct InstanceLabeling {
    labels: Vec<Label>,
}

impl InstanceLabeling {
    /// Labels below `NOISE` are rejected.
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        if let Some(i) = labels.iter().position(|&l| l < NOISE) {
            return Err(Error::InvalidData(format!(
                "label {} at point {i} is below the NOISE sentinel",
                labels[i]
            )));
        }
        Ok(Self { labels })
    }

    pub fn all_noise(n: usize) -> Self {
        Self { labels: vec![NOISE; n] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn into_labels(self) -> Vec<Label> {
        self.labels
    }

    pub fn is_noise(&self, i: usize) -> bool {
        self.labels[i] == NOISE
    }

    /// Member indices of every non-NOISE instance, ordered by id.
    pub fn instances(&self) -> BTreeMap<Label, Vec<usize>> {
        let mut out: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l != NOISE {
                out.entry(l).or_default().push(i);
            }
        }
        out
    }

    pub fn instance_count(&self) -> usize {
        self.instances().len()
    }

    pub fn noise_indices(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == NOISE).collect()
    }

    pub fn max_label(&self) -> Option<Label> {
        self.labels.iter().copied().filter(|&l| l != NOISE).max()
    }

    /// Renumbers instances 0.. in order of first appearance.
    pub fn compacted(&self) -> Self {
        let mut map = BTreeMap::new();
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if l == NOISE {
                    NOISE
                } else {
                    *map.entry(l).or_insert_with(|| {
                        next += 1;
                        next - 1
                    })
                }
            })
            .collect();
        Self { labels }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Point count per label, NOISE included.
    pub fn histogram(&self) -> BTreeMap<Label, usize> {
        let mut h = BTreeMap::new();
        for &l in &self.labels {
            *h.entry(l).or_insert(0) += 1;
        }
        h
    }
}
