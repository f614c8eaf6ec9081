use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roofseg::degrade::{
    corrupt_boundaries, density_variation, downsample, fit_label_planes, kept_count, precision_reduction,
};
use roofseg::geometry::index::NeighborIndex;
use roofseg::synthetic::{generate_roof, RoofKind, RoofSpec, SyntheticRoof};
use roofseg::{PointCloud, Vec3, NOISE};

fn hip(seed: u64) -> SyntheticRoof {
    generate_roof(&RoofSpec {
        kind: RoofKind::Hip,
        n_points: 3000,
        noise_sigma: 0.005,
        outlier_fraction: 0.02,
        seed,
        ..RoofSpec::default()
    })
    .unwrap()
}

#[test]
fn precision_offsets_have_the_uniform_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<Vec3> = (0..34_000)
        .map(|_| {
            Vec3::new(
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(0.0..20.0),
            )
        })
        .collect();
    let cloud = PointCloud::new("p", pts).unwrap();
    let out = precision_reduction(&cloud, 0.5, 2).unwrap();
    let (mut sum, mut positive, mut count) = (0.0, 0usize, 0usize);
    for (a, b) in cloud.points().iter().zip(out.points()) {
        for axis in 0..3 {
            let d = b[axis] - a[axis];
            assert!(d.abs() <= 0.5 + 1e-9);
            sum += d.abs();
            positive += (d > 0.0) as usize;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    assert!(count >= 100_000);
    assert!((mean - 0.25).abs() <= 0.05 * 0.25, "mean |offset| {mean}");
    // signs are balanced
    let share = positive as f64 / count as f64;
    assert!((share - 0.5).abs() < 0.01, "positive share {share}");
}

#[test]
fn every_operator_depends_on_its_seed() {
    let r = hip(3);
    let idx = NeighborIndex::build(&r.cloud).unwrap();
    let planes = fit_label_planes(&r.cloud, &r.labels).unwrap();
    let (a, _) = downsample(&r.cloud, None, 0.5, 1).unwrap();
    let (b, _) = downsample(&r.cloud, None, 0.5, 2).unwrap();
    assert_ne!(a.points(), b.points());
    let a = density_variation(&r.cloud, &r.labels, &planes, 1.0, 0.4, 1).unwrap();
    let b = density_variation(&r.cloud, &r.labels, &planes, 1.0, 0.4, 2).unwrap();
    assert_ne!(a.points(), b.points());
    let a = precision_reduction(&r.cloud, 0.5, 1).unwrap();
    let b = precision_reduction(&r.cloud, 0.5, 2).unwrap();
    assert_ne!(a.points(), b.points());
    let a = corrupt_boundaries(&r.cloud, &idx, &r.labels, 0.5, 1).unwrap();
    let b = corrupt_boundaries(&r.cloud, &idx, &r.labels, 0.5, 2).unwrap();
    assert_ne!(a, b);
    // and repeats exactly for the same seed
    assert_eq!(a, corrupt_boundaries(&r.cloud, &idx, &r.labels, 0.5, 1).unwrap());
}

#[test]
fn downsample_keeps_points_and_labels_together() {
    let r = hip(4);
    for keep in [0.1, 0.5, 0.77, 1.0] {
        let (c, l) = downsample(&r.cloud, Some(&r.labels), keep, 9).unwrap();
        let l = l.unwrap();
        assert_eq!(c.len(), kept_count(r.cloud.len(), keep));
        // kept points appear in their original order with their own labels
        let mut cursor = 0;
        for (p, &lab) in c.points().iter().zip(l.labels()) {
            let j = (cursor..r.cloud.len())
                .find(|&j| r.cloud.point(j) == *p)
                .expect("kept point exists");
            assert_eq!(r.labels.get(j), lab);
            cursor = j + 1;
        }
    }
}

#[test]
fn density_variation_moves_points_within_their_planes() {
    let r = hip(5);
    let planes = fit_label_planes(&r.cloud, &r.labels).unwrap();
    let out = density_variation(&r.cloud, &r.labels, &planes, 1.0, 0.4, 6).unwrap();
    assert_eq!(out.len(), r.cloud.len());
    for (i, (a, b)) in r.cloud.points().iter().zip(out.points()).enumerate() {
        let l = r.labels.get(i);
        let d = *b - *a;
        assert!(d.norm() <= 0.4 + 1e-9);
        if l == NOISE {
            assert_eq!((d.y, d.z), (0.0, 0.0));
        } else {
            let plane = planes[&l];
            assert!((plane.signed_distance(*b) - plane.signed_distance(*a)).abs() < 1e-9);
        }
    }
}

#[test]
fn corruption_only_moves_labels_across_nearby_boundaries() {
    let r = hip(7);
    let idx = NeighborIndex::build(&r.cloud).unwrap();
    let radius = 0.5;
    let out = corrupt_boundaries(&r.cloud, &idx, &r.labels, radius, 8).unwrap();
    assert_eq!(out.histogram(), r.labels.histogram());
    let mut changed = 0;
    for i in 0..r.cloud.len() {
        let (before, after) = (r.labels.get(i), out.get(i));
        if before == after {
            continue;
        }
        changed += 1;
        assert_ne!(before, NOISE);
        assert_ne!(after, NOISE);
        // the new label was held by some point closer than the radius
        let p = r.cloud.point(i);
        let donor = (0..r.cloud.len())
            .any(|j| r.labels.get(j) == after && r.cloud.point(j).distance_squared(p) < radius * radius);
        assert!(donor, "point {i} got {after} from nowhere");
    }
    assert!(changed > 0);
    assert_eq!(changed % 2, 0);
}
