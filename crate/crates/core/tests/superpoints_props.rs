use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roofseg::geometry::index::NeighborIndex;
use roofseg::geometry::normals::estimate_normals;
use roofseg::superpoints::quality::coefficient_of_variation;
use roofseg::superpoints::{
    fine_cluster_count, generate_superpoints, kmeans_split, refine_boundaries_local, superpoint_quality, CoarseConfig,
};
use roofseg::synthetic::{generate_roof, RoofKind, RoofSpec, SyntheticRoof};
use roofseg::{InstanceLabeling, Label, Vec3, NOISE};

fn roof(kind: RoofKind, n_points: usize, sigma: f64, outliers: f64, seed: u64) -> SyntheticRoof {
    generate_roof(&RoofSpec {
        kind,
        n_points,
        noise_sigma: sigma,
        outlier_fraction: outliers,
        seed,
        ..RoofSpec::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partitions_cover_and_nest(
        kind in prop::sample::select(RoofKind::ALL.to_vec()),
        n_points in 200usize..1200,
        sigma in 0.0..0.03f64,
        outliers in 0.0..0.05f64,
        n in 2usize..150,
        seed in any::<u64>(),
    ) {
        let r = roof(kind, n_points, sigma, outliers, seed);
        let idx = NeighborIndex::build(&r.cloud).unwrap();
        let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
        let sp = generate_superpoints(&r.cloud, &idx, &normals, &CoarseConfig::default(), n, seed).unwrap();
        sp.coarse.validate().unwrap();
        sp.fine.validate().unwrap();
        prop_assert!(sp.fine.refines(&sp.coarse));

        // every coarse group splits into exactly the prescribed cluster count
        let fine_of = sp.fine.assignment();
        for (g, members) in sp.coarse.groups().iter().enumerate() {
            let mut children: Vec<usize> = members.iter().map(|&i| fine_of[i]).collect();
            children.sort_unstable();
            children.dedup();
            prop_assert_eq!(children.len(), fine_cluster_count(members.len(), n, sp.coarse.is_noise_group(g)));
        }
        let instance_groups: Vec<usize> = (0..sp.coarse.len()).filter(|&g| !sp.coarse.is_noise_group(g)).collect();
        let fine_in_instances: usize = instance_groups
            .iter()
            .map(|&g| fine_cluster_count(sp.coarse.groups()[g].len(), n, false))
            .sum();
        let instance_points: usize = instance_groups.iter().map(|&g| sp.coarse.groups()[g].len()).sum();
        if fine_in_instances > 0 {
            prop_assert!(instance_points as f64 / fine_in_instances as f64 <= n as f64);
        }
    }

    #[test]
    fn kmeans_gives_exactly_k_clusters(
        pts in prop::collection::vec((0..5i32, 0..5i32, 0..2i32), 1..120),
        k_frac in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        // small integer lattice so duplicates are frequent
        let points: Vec<Vec3> = pts.iter().map(|&(x, y, z)| Vec3::new(x as f64, y as f64, z as f64)).collect();
        let indices: Vec<usize> = (0..points.len()).rev().collect();
        let k = 1 + ((points.len() - 1) as f64 * k_frac) as usize;
        let clusters = kmeans_split(&points, &indices, k, seed).unwrap();
        prop_assert_eq!(clusters.len(), k);
        prop_assert!(clusters.iter().all(|c| !c.is_empty()));
        let mut all: Vec<usize> = clusters.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..points.len()).collect::<Vec<_>>());
    }
}

#[test]
fn refinement_commutes_with_relabeling() {
    let r = roof(RoofKind::Hip, 1500, 0.01, 0.02, 5);
    let idx = NeighborIndex::build(&r.cloud).unwrap();
    let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
    // start from a labeling with some boundary damage
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let band = roofseg::synthetic::boundary_band(&idx, &r.labels, 8);
    let planes = r.labels.max_label().unwrap() + 1;
    let damaged: Vec<Label> = r
        .labels
        .labels()
        .iter()
        .zip(&band)
        .map(|(&l, &b)| {
            if b && l != NOISE && rng.gen_bool(0.3) {
                (l + 1) % planes
            } else {
                l
            }
        })
        .collect();
    let base = InstanceLabeling::new(damaged.clone()).unwrap();
    let out = refine_boundaries_local(&r.cloud, &idx, &normals, &base, 20.0, 8, 3).unwrap();

    let perm: BTreeMap<Label, Label> = [(0, 41), (1, 7), (2, 1000), (3, 3)].into_iter().collect();
    let relabel =
        |ls: &[Label]| -> Vec<Label> { ls.iter().map(|l| if *l == NOISE { NOISE } else { perm[l] }).collect() };
    let permuted = InstanceLabeling::new(relabel(&damaged)).unwrap();
    let out_p = refine_boundaries_local(&r.cloud, &idx, &normals, &permuted, 20.0, 8, 3).unwrap();
    assert_eq!(out_p.labels(), &relabel(out.labels())[..]);
}

#[test]
fn gable_superpoints_are_pure() {
    let r = roof(RoofKind::Gable, 3000, 0.01, 0.0, 12);
    let idx = NeighborIndex::build(&r.cloud).unwrap();
    let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
    let sp = generate_superpoints(&r.cloud, &idx, &normals, &CoarseConfig::default(), 50, 3).unwrap();
    let fine = superpoint_quality(&r.cloud, &sp.fine, &r.labels).unwrap();
    assert!(fine.boundary_purity >= 0.98, "purity {}", fine.boundary_purity);
}

#[test]
fn fine_sizes_are_more_uniform_than_coarse() {
    // unequal planes plus a noise group give the coarse stage a spread of sizes
    let r = roof(RoofKind::LShape, 3000, 0.01, 0.03, 12);
    let idx = NeighborIndex::build(&r.cloud).unwrap();
    let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
    let sp = generate_superpoints(&r.cloud, &idx, &normals, &CoarseConfig::default(), 50, 3).unwrap();
    let cv_fine = coefficient_of_variation(&sp.fine.sizes());
    let cv_coarse = coefficient_of_variation(&sp.coarse.sizes());
    assert!(cv_fine < cv_coarse, "fine cv {cv_fine} vs coarse cv {cv_coarse}");
}

#[test]
fn superpoints_are_deterministic_per_seed() {
    let r = roof(RoofKind::LShape, 1200, 0.01, 0.02, 8);
    let idx = NeighborIndex::build(&r.cloud).unwrap();
    let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
    let cfg = CoarseConfig::default();
    let a = generate_superpoints(&r.cloud, &idx, &normals, &cfg, 40, 9).unwrap();
    let b = generate_superpoints(&r.cloud, &idx, &normals, &cfg, 40, 9).unwrap();
    assert_eq!(a.fine.groups(), b.fine.groups());
    assert_eq!(a.coarse.groups(), b.coarse.groups());
}
