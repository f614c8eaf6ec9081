use proptest::prelude::*;

use roofseg::geometry::index::NeighborIndex;
use roofseg::geometry::normals::estimate_normals;
use roofseg::postprocess::{
    complete_planes, fuse_scores, rank_instances, refine_boundaries_fast, CompletionOptions, CompletionStatus,
    ScoredInstance,
};
use roofseg::synthetic::{generate_roof, RoofKind, RoofSpec};
use roofseg::{InstanceLabeling, Label, NOISE};

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![0.0..=1.0f64, Just(0.0), Just(1.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn completion_keeps_survivors(
        kind in prop::sample::select(RoofKind::ALL.to_vec()),
        sigma in 0.0..0.02f64,
        dropped in 0usize..4,
        shrink in 0usize..4,
        seed in any::<u64>(),
    ) {
        let r = generate_roof(&RoofSpec { kind, n_points: 1500, noise_sigma: sigma, outlier_fraction: 0.02, seed, ..RoofSpec::default() }).unwrap();
        let idx = NeighborIndex::build(&r.cloud).unwrap();
        let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
        let planes = r.labels.max_label().unwrap() + 1;
        let dropped = dropped as Label % planes;
        let shrink = shrink as Label % planes;
        // erase one plane and cut another down below the size floor
        let mut seen = 0;
        let input: Vec<Label> = r
            .labels
            .labels()
            .iter()
            .map(|&l| {
                if l == dropped {
                    NOISE
                } else if l == shrink {
                    seen += 1;
                    if seen <= 5 { l } else { NOISE }
                } else {
                    l
                }
            })
            .collect();
        let input = InstanceLabeling::new(input).unwrap();
        let options = CompletionOptions::default();
        let out = complete_planes(&r.cloud, &idx, &normals, &input, &options).unwrap();
        let survivors: Vec<(Label, Vec<usize>)> = input
            .instances()
            .into_iter()
            .filter(|(_, m)| m.len() >= options.min_points)
            .collect();
        for (l, members) in &survivors {
            prop_assert!(members.iter().all(|&i| out.labeling.get(i) == *l));
        }
        let top = survivors.iter().map(|(l, _)| *l).max();
        // new planes only claim points that were NOISE or dissolved
        for (i, &l) in out.labeling.labels().iter().enumerate() {
            if l != NOISE && !survivors.iter().any(|(s, _)| *s == l) {
                prop_assert!(input.get(i) == NOISE || input.instances()[&input.get(i)].len() < options.min_points);
                prop_assert!(top.is_none_or(|t| l > t));
            }
        }
        if let CompletionStatus::Completed { new_instances, .. } = out.status {
            prop_assert!(new_instances <= out.labeling.instance_count());
        }
    }

    #[test]
    fn fast_refinement_is_nearly_idempotent(
        kind in prop::sample::select(RoofKind::ALL.to_vec()),
        sigma in 0.0..0.03f64,
        seed in any::<u64>(),
    ) {
        let r = generate_roof(&RoofSpec { kind, n_points: 1500, noise_sigma: sigma, outlier_fraction: 0.02, seed, ..RoofSpec::default() }).unwrap();
        let idx = NeighborIndex::build(&r.cloud).unwrap();
        let normals = estimate_normals(&r.cloud, &idx, 16).unwrap().normals;
        let once = refine_boundaries_fast(&r.cloud, &idx, &normals, &r.labels, 20.0, 8).unwrap();
        let twice = refine_boundaries_fast(&r.cloud, &idx, &normals, &once, 20.0, 8).unwrap();
        let changed = once.labels().iter().zip(twice.labels()).filter(|(a, b)| a != b).count();
        prop_assert!((changed as f64) < 0.01 * r.cloud.len() as f64, "{} of {} changed", changed, r.cloud.len());
        // NOISE is never claimed
        for (i, &l) in r.labels.labels().iter().enumerate() {
            if l == NOISE {
                prop_assert_eq!(once.get(i), NOISE);
            }
        }
    }

    #[test]
    fn fusion_is_symmetric_and_bounded(s in unit(), ms in unit()) {
        let f = fuse_scores(s, ms).unwrap();
        prop_assert_eq!(f, fuse_scores(ms, s).unwrap());
        prop_assert!(f >= s.min(ms) && f <= s.max(ms));
    }

    #[test]
    fn fusion_is_monotone(s in unit(), ms in unit(), ds in 0.0..1.0f64) {
        let up = (s + ds).min(1.0);
        prop_assert!(fuse_scores(up, ms).unwrap() >= fuse_scores(s, ms).unwrap());
    }

    #[test]
    fn ranking_ignores_input_order(scores in prop::collection::vec((unit(), unit()), 1..30), shift in 0usize..30) {
        let mut items: Vec<ScoredInstance> = scores
            .iter()
            .enumerate()
            .map(|(i, &(s, ms))| ScoredInstance::new(i as Label, s, ms).unwrap())
            .collect();
        let mut rotated = items.clone();
        rotated.rotate_left(shift % items.len());
        rotated.reverse();
        rank_instances(&mut items);
        rank_instances(&mut rotated);
        prop_assert_eq!(&items, &rotated);
        prop_assert!(items.windows(2).all(|w| w[0].fused > w[1].fused || (w[0].fused == w[1].fused && w[0].id < w[1].id)));
    }
}

#[test]
fn fusion_rejects_out_of_range() {
    for (s, ms) in [(-0.1, 0.5), (0.5, 1.1), (f64::NAN, 0.5)] {
        assert!(fuse_scores(s, ms).is_err());
    }
}
