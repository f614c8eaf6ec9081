//! Covariance accumulation and the symmetric 3x3 eigenproblem (cyclic Jacobi).

use crate::scalar::Real;
use crate::vec3::Vec3;

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues descending.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricEigen3<T = f64> {
    pub values: [T; 3],
    /// Unit eigenvectors, `vectors[i]` belongs to `values[i]`.
    pub vectors: [Vec3<T>; 3],
}

impl<T: Real> SymmetricEigen3<T> {
    /// Eigenvector of the smallest eigenvalue.
    pub fn smallest_vector(&self) -> Vec3<T> {
        self.vectors[2]
    }

    /// Eigenvalues clamped to be nonnegative (covariance round-off).
    pub fn clamped_values(&self) -> [T; 3] {
        self.values.map(|v| v.max(T::zero()))
    }

    /// True when the matrix has rank < 2 relative to its largest eigenvalue.
    pub fn is_rank_deficient(&self) -> bool {
        let [l1, l2, _] = self.clamped_values();
        l1 <= T::zero() || l2 <= l1 * T::rank_tolerance()
    }
}

pub fn symmetric_eigen3<T: Real>(m: [[T; 3]; 3]) -> SymmetricEigen3<T> {
    let mut a = m;
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let two = T::lit(2.0);
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off == T::zero() || off <= T::epsilon() * T::epsilon() * (diag + off) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (two * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (akp, akq) = (row[p], row[q]);
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vkp, vkq) = (row[p], row[q]);
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap_or(std::cmp::Ordering::Equal));
    let column = |c: usize| Vec3::new(v[0][c], v[1][c], v[2][c]);
    SymmetricEigen3 {
        values: order.map(|i| a[i][i]),
        vectors: order.map(|i| column(i).normalized().unwrap_or_else(|| column(i))),
    }
}

/// Running first and second moments of a point set. Coordinates are taken
/// relative to a reference point to limit cancellation for georeferenced
/// coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Moments<T = f64> {
    reference: Vec3<T>,
    count: usize,
    sum: Vec3<T>,
    // xx, xy, xz, yy, yz, zz
    sum_sq: [T; 6],
}

impl<T: Real> Moments<T> {
    pub fn new(reference: Vec3<T>) -> Self {
        Self {
            reference,
            count: 0,
            sum: Vec3::zero(),
            sum_sq: [T::zero(); 6],
        }
    }

    pub fn from_points(points: &[Vec3<T>], indices: &[usize]) -> Self {
        let reference = indices.first().map(|&i| points[i]).unwrap_or_else(Vec3::zero);
        let mut m = Self::new(reference);
        for &i in indices {
            m.add(points[i]);
        }
        m
    }

    pub fn add(&mut self, p: Vec3<T>) {
        let d = p - self.reference;
        self.count += 1;
        self.sum += d;
        self.sum_sq[0] += d.x * d.x;
        self.sum_sq[1] += d.x * d.y;
        self.sum_sq[2] += d.x * d.z;
        self.sum_sq[3] += d.y * d.y;
        self.sum_sq[4] += d.y * d.z;
        self.sum_sq[5] += d.z * d.z;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn centroid(&self) -> Vec3<T> {
        if self.count == 0 {
            return self.reference;
        }
        self.reference + self.sum / T::from_usize_lossy(self.count)
    }

    /// Population covariance matrix.
    pub fn covariance(&self) -> [[T; 3]; 3] {
        if self.count == 0 {
            return [[T::zero(); 3]; 3];
        }
        let n = T::from_usize_lossy(self.count);
        let m = self.sum / n;
        let s = &self.sum_sq;
        let xx = s[0] / n - m.x * m.x;
        let xy = s[1] / n - m.x * m.y;
        let xz = s[2] / n - m.x * m.z;
        let yy = s[3] / n - m.y * m.y;
        let yz = s[4] / n - m.y * m.z;
        let zz = s[5] / n - m.z * m.z;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
    }

    pub fn eigen(&self) -> SymmetricEigen3<T> {
        symmetric_eigen3(self.covariance())
    }
}

/// Two-pass population covariance of `points[indices]` and its centroid.
pub fn covariance<T: Real>(points: &[Vec3<T>], indices: &[usize]) -> (Vec3<T>, [[T; 3]; 3]) {
    let mut c = [[T::zero(); 3]; 3];
    if indices.is_empty() {
        return (Vec3::zero(), c);
    }
    let n = T::from_usize_lossy(indices.len());
    let centroid = indices.iter().fold(Vec3::zero(), |acc, &i| acc + points[i]) / n;
    for &i in indices {
        let d = (points[i] - centroid).to_array();
        for r in 0..3 {
            for col in r..3 {
                c[r][col] += d[r] * d[col];
            }
        }
    }
    for r in 0..3 {
        for col in r..3 {
            c[r][col] /= n;
            c[col][r] = c[r][col];
        }
    }
    (centroid, c)
}
