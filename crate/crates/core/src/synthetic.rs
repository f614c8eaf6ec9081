//! Synthetic roofs with exact plane labels, used as oracles in tests and
//! benchmarks.
//!
//! Each roof is a height field: a gable or hip is the lower envelope of its
//! slope planes, and an L-shaped roof joins a main gable with a lower wing
//! gable, taking the upper envelope where the two overlap. Labels come from
//! the plane that realises the height at the sampled footprint position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cloud::{InstanceLabeling, Label, PointCloud, NOISE};
use crate::error::{Error, Result};
use crate::geometry::index::NeighborIndex;
use crate::geometry::plane::Plane;
use crate::vec3::Vec3;

const EAVE_HEIGHT: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoofKind {
    Gable,
    Hip,
    Pyramid,
    LShape,
}

impl RoofKind {
    pub const ALL: [RoofKind; 4] = [RoofKind::Gable, RoofKind::Hip, RoofKind::Pyramid, RoofKind::LShape];

    pub fn plane_count(self) -> usize {
        match self {
            RoofKind::Gable => 2,
            _ => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoofSpec {
    pub kind: RoofKind,
    /// Total points, outliers included.
    pub n_points: usize,
    /// Footprint extent along x, meters.
    pub length: f64,
    /// Footprint extent along y, meters.
    pub width: f64,
    pub pitch_deg: f64,
    /// Isotropic Gaussian jitter on every coordinate, meters.
    pub noise_sigma: f64,
    /// Fraction of points replaced by NOISE-labeled scatter.
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl Default for RoofSpec {
    fn default() -> Self {
        Self {
            kind: RoofKind::Gable,
            n_points: 2000,
            length: 10.0,
            width: 8.0,
            pitch_deg: 30.0,
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticRoof {
    pub spec: RoofSpec,
    pub cloud: PointCloud,
    pub labels: InstanceLabeling,
    /// True plane of instance `l` at position `l`.
    pub planes: Vec<Plane>,
}

impl SyntheticRoof {
    /// Exact normal of each point's plane; NOISE points get +z.
    pub fn true_normals(&self) -> Vec<Vec3> {
        self.labels
            .labels()
            .iter()
            .map(|&l| {
                if l == NOISE {
                    Vec3::unit_z()
                } else {
                    self.planes[l as usize].normal
                }
            })
            .collect()
    }
}

/// z = a·x + b·y + c
#[derive(Clone, Copy, Debug)]
struct Slope {
    a: f64,
    b: f64,
    c: f64,
}

impl Slope {
    fn height(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }

    fn plane(&self) -> Plane {
        let normal = Vec3::new(-self.a, -self.b, 1.0).normalized().expect("nonzero normal");
        Plane::through(Vec3::new(0.0, 0.0, self.c), normal).expect("unit normal")
    }
}

struct Layout {
    slopes: Vec<Slope>,
    /// Plane ids of the main part and, for L-shapes, of the wing.
    main: Vec<usize>,
    wing: Vec<usize>,
    main_box: [f64; 4],
    wing_box: Option<[f64; 4]>,
}

fn inside(b: &[f64; 4], x: f64, y: f64) -> bool {
    x >= b[0] && x <= b[1] && y >= b[2] && y <= b[3]
}

fn lower_envelope(slopes: &[Slope], ids: &[usize], x: f64, y: f64) -> (usize, f64) {
    ids.iter()
        .map(|&i| (i, slopes[i].height(x, y)))
        .fold(
            (usize::MAX, f64::INFINITY),
            |best, c| if c.1 < best.1 { c } else { best },
        )
}

impl Layout {
    fn new(spec: &RoofSpec) -> Self {
        let t = spec.pitch_deg.to_radians().tan();
        let h = EAVE_HEIGHT;
        let (l, w) = (spec.length, spec.width);
        let rise_y = Slope { a: 0.0, b: t, c: h };
        let fall_y = Slope {
            a: 0.0,
            b: -t,
            c: h + t * w,
        };
        match spec.kind {
            RoofKind::Gable => Self {
                slopes: vec![rise_y, fall_y],
                main: vec![0, 1],
                wing: vec![],
                main_box: [0.0, l, 0.0, w],
                wing_box: None,
            },
            RoofKind::Hip | RoofKind::Pyramid => {
                let l = if spec.kind == RoofKind::Pyramid { w } else { l.max(w) };
                Self {
                    slopes: vec![
                        rise_y,
                        fall_y,
                        Slope { a: t, b: 0.0, c: h },
                        Slope {
                            a: -t,
                            b: 0.0,
                            c: h + t * l,
                        },
                    ],
                    main: vec![0, 1, 2, 3],
                    wing: vec![],
                    main_box: [0.0, l, 0.0, w],
                    wing_box: None,
                }
            }
            RoofKind::LShape => {
                let w2 = 0.6 * w;
                let l2 = 0.45 * l;
                Self {
                    slopes: vec![
                        rise_y,
                        fall_y,
                        Slope { a: t, b: 0.0, c: h },
                        Slope {
                            a: -t,
                            b: 0.0,
                            c: h + t * w2,
                        },
                    ],
                    main: vec![0, 1],
                    wing: vec![2, 3],
                    main_box: [0.0, l, 0.0, w],
                    wing_box: Some([0.0, w2, 0.5 * w, w + l2]),
                }
            }
        }
    }

    fn bounds(&self) -> [f64; 4] {
        match self.wing_box {
            None => self.main_box,
            Some(b) => [
                self.main_box[0].min(b[0]),
                self.main_box[1].max(b[1]),
                self.main_box[2].min(b[2]),
                self.main_box[3].max(b[3]),
            ],
        }
    }

    /// Plane id and height at a footprint position, `None` outside.
    fn surface(&self, x: f64, y: f64) -> Option<(usize, f64)> {
        let in_main = inside(&self.main_box, x, y);
        let in_wing = self.wing_box.is_some_and(|b| inside(&b, x, y));
        match (in_main, in_wing) {
            (false, false) => None,
            (true, false) => Some(lower_envelope(&self.slopes, &self.main, x, y)),
            (false, true) => Some(lower_envelope(&self.slopes, &self.wing, x, y)),
            (true, true) => {
                let a = lower_envelope(&self.slopes, &self.main, x, y);
                let b = lower_envelope(&self.slopes, &self.wing, x, y);
                Some(if b.1 > a.1 { b } else { a })
            }
        }
    }
}

pub fn generate_roof(spec: &RoofSpec) -> Result<SyntheticRoof> {
    if spec.n_points < 10 {
        return Err(Error::param(
            "n_points",
            format!("need at least 10 points, got {}", spec.n_points),
        ));
    }
    if !(spec.length > 0.0 && spec.width > 0.0) {
        return Err(Error::param("footprint", "length and width must be positive"));
    }
    if !(spec.pitch_deg > 0.0 && spec.pitch_deg < 80.0) {
        return Err(Error::param(
            "pitch_deg",
            format!("must lie in (0, 80), got {}", spec.pitch_deg),
        ));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::param("noise_sigma", "must be nonnegative"));
    }
    if !(0.0..0.5).contains(&spec.outlier_fraction) {
        return Err(Error::param("outlier_fraction", "must lie in [0, 0.5)"));
    }
    let layout = Layout::new(spec);
    let [x0, x1, y0, y1] = layout.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jitter = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::param("noise_sigma", e.to_string()))?;
    let n_out = (spec.outlier_fraction * spec.n_points as f64).round() as usize;
    let n_in = spec.n_points - n_out;

    let mut points = Vec::with_capacity(spec.n_points);
    let mut labels: Vec<Label> = Vec::with_capacity(spec.n_points);
    let mut z_max = f64::NEG_INFINITY;
    while points.len() < n_in {
        let (x, y) = (rng.gen_range(x0..=x1), rng.gen_range(y0..=y1));
        let Some((plane, z)) = layout.surface(x, y) else {
            continue;
        };
        z_max = z_max.max(z);
        let mut p = Vec3::new(x, y, z);
        if spec.noise_sigma > 0.0 {
            p += Vec3::new(
                jitter.sample(&mut rng),
                jitter.sample(&mut rng),
                jitter.sample(&mut rng),
            );
        }
        points.push(p);
        labels.push(plane as Label);
    }
    let z_max = if z_max.is_finite() { z_max } else { EAVE_HEIGHT };
    for _ in 0..n_out {
        points.push(Vec3::new(
            rng.gen_range(x0..=x1),
            rng.gen_range(y0..=y1),
            rng.gen_range(EAVE_HEIGHT - 1.0..=z_max + 1.0),
        ));
        labels.push(NOISE);
    }
    // interleave outliers with surface points so file order carries no label signal
    let mut order: Vec<usize> = (0..points.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let points: Vec<Vec3> = order.iter().map(|&i| points[i]).collect();
    let labels: Vec<Label> = order.iter().map(|&i| labels[i]).collect();

    let id = format!("{:?}-{}", spec.kind, spec.seed).to_lowercase();
    Ok(SyntheticRoof {
        spec: *spec,
        cloud: PointCloud::new(id, points)?,
        labels: InstanceLabeling::new(labels)?,
        planes: layout.slopes.iter().map(Slope::plane).collect(),
    })
}

/// A varied set of roof specs: kinds cycle, sizes and noise drawn from `seed`.
pub fn roof_suite(count: usize, seed: u64, max_sigma: f64, outlier_fraction: f64) -> Vec<RoofSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| RoofSpec {
            kind: RoofKind::ALL[i % RoofKind::ALL.len()],
            n_points: rng.gen_range(1000..=4000),
            length: rng.gen_range(9.0..=12.0),
            width: rng.gen_range(7.0..=9.0),
            pitch_deg: rng.gen_range(25.0..=40.0),
            noise_sigma: if max_sigma > 0.0 {
                rng.gen_range(0.0..=max_sigma)
            } else {
                0.0
            },
            outlier_fraction,
            seed: rng.gen(),
        })
        .collect()
}

/// Points whose k-NN holds a label different from their own (NOISE counts
/// as a label here).
pub fn boundary_band(index: &NeighborIndex, labeling: &InstanceLabeling, k: usize) -> Vec<bool> {
    let labels = labeling.labels();
    index
        .knn_table(k)
        .iter()
        .enumerate()
        .map(|(i, nb)| nb.iter().any(|&j| labels[j] != labels[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_has_its_planes() {
        for kind in RoofKind::ALL {
            let roof = generate_roof(&RoofSpec {
                kind,
                ..RoofSpec::default()
            })
            .unwrap();
            assert_eq!(roof.cloud.len(), 2000);
            assert_eq!(roof.labels.instance_count(), kind.plane_count(), "{kind:?}");
            assert_eq!(roof.planes.len(), kind.plane_count());
        }
    }

    #[test]
    fn noise_free_points_lie_on_their_planes() {
        for kind in RoofKind::ALL {
            let roof = generate_roof(&RoofSpec {
                kind,
                seed: 3,
                ..RoofSpec::default()
            })
            .unwrap();
            for (i, p) in roof.cloud.points().iter().enumerate() {
                let l = roof.labels.get(i) as usize;
                assert!(roof.planes[l].distance(*p) < 1e-9);
            }
        }
    }

    #[test]
    fn gable_normals_differ_by_twice_the_pitch() {
        let roof = generate_roof(&RoofSpec::default()).unwrap();
        let cos = roof.planes[0].normal.dot(roof.planes[1].normal);
        assert!((cos - 60f64.to_radians().cos()).abs() < 1e-12);
    }

    #[test]
    fn outliers_are_noise() {
        let spec = RoofSpec {
            outlier_fraction: 0.01,
            noise_sigma: 0.02,
            ..RoofSpec::default()
        };
        let roof = generate_roof(&spec).unwrap();
        assert_eq!(roof.labels.noise_indices().len(), 20);
    }

    #[test]
    fn deterministic() {
        let spec = RoofSpec {
            kind: RoofKind::LShape,
            noise_sigma: 0.01,
            seed: 9,
            ..RoofSpec::default()
        };
        let a = generate_roof(&spec).unwrap();
        let b = generate_roof(&spec).unwrap();
        assert_eq!(a.cloud.points(), b.cloud.points());
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn band_marks_only_mixed_neighbourhoods() {
        let roof = generate_roof(&RoofSpec::default()).unwrap();
        let index = NeighborIndex::build(&roof.cloud).unwrap();
        let band = boundary_band(&index, &roof.labels, 16);
        let count = band.iter().filter(|&&b| b).count();
        assert!(count > 0 && count < roof.cloud.len() / 5);
    }
}
