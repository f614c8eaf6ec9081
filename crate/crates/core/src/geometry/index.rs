//! Exact k-nearest-neighbour and radius queries over a static kd-tree.
//!
//! Results are ordered by (squared distance, point index); ties are resolved
//! in favour of the smaller index, so every query is reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<T = f64> {
    pub index: usize,
    pub dist2: T,
}

impl<T: Real> Eq for Neighbor<T> {}

impl<T: Real> Ord for Neighbor<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.dist2
            .partial_cmp(&o.dist2)
            .unwrap_or(Ordering::Equal)
            .then(self.index.cmp(&o.index))
    }
}

impl<T: Real> PartialOrd for Neighbor<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Debug)]
enum Node<T> {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: T,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct NeighborIndex<T = f64> {
    points: Vec<Vec3<T>>,
    order: Vec<usize>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> NeighborIndex<T> {
    pub fn build(cloud: &PointCloud<T>) -> Result<Self> {
        Self::from_points(cloud.points().to_vec())
    }

    pub fn from_points(points: Vec<Vec3<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("cannot index an empty cloud"));
        }
        let mut index = Self {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        let n = index.points.len();
        index.build_node(0, n);
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (mut lo, mut hi) = (self.points[self.order[start]], self.points[self.order[start]]);
        for &i in &self.order[start..end] {
            let p = self.points[i];
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let ext = hi - lo;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis]
                .partial_cmp(&points[b][axis])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
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

    /// The `k` nearest points to `query`, nearest first.
    pub fn knn(&self, query: Vec3<T>, k: usize) -> Vec<Neighbor<T>> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_node(0, query, k, &mut heap);
        heap.into_sorted_vec()
    }

    fn knn_node(&self, node: usize, q: Vec3<T>, k: usize, heap: &mut BinaryHeap<Neighbor<T>>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Neighbor {
                        index: i,
                        dist2: self.points[i].distance_squared(q),
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("non-empty heap") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < T::zero() { (left, right) } else { (right, left) };
                self.knn_node(near, q, k, heap);
                // `<=` keeps equal-distance points with smaller indices reachable
                if heap.len() < k || diff * diff <= heap.peek().expect("non-empty heap").dist2 {
                    self.knn_node(far, q, k, heap);
                }
            }
        }
    }

    /// All points within `radius` of `query` (inclusive), nearest first.
    pub fn radius(&self, query: Vec3<T>, radius: T) -> Vec<Neighbor<T>> {
        let mut out = Vec::new();
        if radius < T::zero() {
            return out;
        }
        self.radius_node(0, query, radius * radius, &mut out);
        out.sort_unstable();
        out
    }

    fn radius_node(&self, node: usize, q: Vec3<T>, r2: T, out: &mut Vec<Neighbor<T>>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = self.points[i].distance_squared(q);
                    if d2 <= r2 {
                        out.push(Neighbor { index: i, dist2: d2 });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < T::zero() { (left, right) } else { (right, left) };
                self.radius_node(near, q, r2, out);
                if diff * diff <= r2 {
                    self.radius_node(far, q, r2, out);
                }
            }
        }
    }

    /// Indices of the `k` nearest neighbours of indexed point `i`. The point
    /// itself is always first, even when coincident duplicates exist.
    pub fn neighbors_of(&self, i: usize, k: usize) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let mut out: Vec<usize> = self.knn(self.points[i], k).into_iter().map(|n| n.index).collect();
        match out.iter().position(|&j| j == i) {
            Some(pos) => {
                out.remove(pos);
            }
            None => {
                out.pop();
            }
        }
        out.insert(0, i);
        out
    }

    /// `neighbors_of` for every point, computed in parallel.
    pub fn knn_table(&self, k: usize) -> Vec<Vec<usize>> {
        (0..self.points.len())
            .into_par_iter()
            .map(|i| self.neighbors_of(i, k))
            .collect()
    }
}
