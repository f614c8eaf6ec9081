//! Plane completion, fast boundary refinement and score fusion, applied to
//! any labeling (built-in segmenter output or external predictions).

use std::fmt::Write as _;
use std::path::Path;

use crate::cloud::{InstanceLabeling, Label, PointCloud, NOISE};
use crate::error::{Error, Result};
use crate::geometry::index::NeighborIndex;
use crate::geometry::normals::{normals_or_estimate, DEFAULT_NORMAL_K};
use crate::geometry::plane::fit_plane_with;
use crate::geometry::DEFAULT_LAMBDA;
use crate::scalar::Real;
use crate::superpoints::{coarse_labeling, refine_boundaries, region_grow, CoarseConfig, GrowthParams, RefineOptions};
use crate::vec3::Vec3;

pub fn fuse_scores<T: Real>(s: T, ms: T) -> Result<T> {
    let unit = |v: T| v >= T::zero() && v <= T::one();
    if !unit(s) {
        return Err(Error::param("S", format!("score must lie in [0, 1], got {s}")));
    }
    if !unit(ms) {
        return Err(Error::param("mS", format!("mask score must lie in [0, 1], got {ms}")));
    }
    Ok((s * ms).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredInstance<T = f64> {
    pub id: Label,
    pub s: T,
    pub ms: T,
    pub fused: T,
}

impl<T: Real> ScoredInstance<T> {
    pub fn new(id: Label, s: T, ms: T) -> Result<Self> {
        Ok(Self {
            id,
            s,
            ms,
            fused: fuse_scores(s, ms)?,
        })
    }
}

/// Sorts by fused score, highest first; equal scores keep ascending ids.
pub fn rank_instances<T: Real>(instances: &mut [ScoredInstance<T>]) {
    instances.sort_by(|a, b| {
        b.fused
            .partial_cmp(&a.fused)
            .expect("finite scores")
            .then(a.id.cmp(&b.id))
    });
}

/// Keeps instances whose fused score reaches `min_fused`, ranked.
pub fn filter_ranked<T: Real>(instances: &[ScoredInstance<T>], min_fused: T) -> Vec<ScoredInstance<T>> {
    let mut kept: Vec<_> = instances.iter().copied().filter(|i| i.fused >= min_fused).collect();
    rank_instances(&mut kept);
    kept
}

/// Parses "id S mS" lines; blank lines and `#` comments are ignored.
pub fn parse_scores<T: Real>(text: &str) -> Result<Vec<ScoredInstance<T>>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: n + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", fields.len())));
        }
        let id: Label = fields[0]
            .parse()
            .map_err(|_| err(format!("bad instance id {:?}", fields[0])))?;
        let num = |f: &str| -> Result<T> {
            f.parse::<f64>()
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| err(format!("bad score {f:?}")))
        };
        let inst = ScoredInstance::new(id, num(fields[1])?, num(fields[2])?).map_err(|e| err(e.to_string()))?;
        out.push(inst);
    }
    Ok(out)
}

pub fn format_scores<T: Real>(instances: &[ScoredInstance<T>]) -> String {
    let mut s = String::new();
    for i in instances {
        let _ = writeln!(s, "{} {} {}", i.id, i.s, i.ms);
    }
    s
}

pub fn load_scores<T: Real>(path: impl AsRef<Path>) -> Result<Vec<ScoredInstance<T>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text)
}

pub fn save_scores<T: Real>(instances: &[ScoredInstance<T>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_scores(instances)).map_err(|e| Error::io(path, e))
}

/// Lower bounds applied to inferred thresholds so a perfectly clean
/// instance does not yield a vacuous growth rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InferenceFloors<T = f64> {
    pub t_dist: T,
    pub t_norm: T,
}

impl<T: Real> Default for InferenceFloors<T> {
    fn default() -> Self {
        Self {
            t_dist: T::lit(0.01),
            t_norm: T::lit(0.02),
        }
    }
}

/// Growth thresholds that would have admitted every member of every usable
/// instance: the maxima of per-instance residual and normal deviation,
/// floored and with `t_norm` capped at 1. Other fields come from `base`.
pub fn infer_growth_params<T: Real>(
    cloud: &PointCloud<T>,
    normals: &[Vec3<T>],
    labeling: &InstanceLabeling,
    base: &GrowthParams<T>,
    floors: &InferenceFloors<T>,
) -> Result<GrowthParams<T>> {
    check_len(cloud.len(), normals.len())?;
    check_len(cloud.len(), labeling.len())?;
    let mut inferred: Option<(T, T)> = None;
    for members in labeling.instances().values() {
        let Ok(model) = fit_plane_with(cloud.points(), Some(normals), members) else {
            continue;
        };
        let t_norm = model.t_norm.unwrap_or_else(T::zero);
        inferred = Some(match inferred {
            None => (model.t_dist, t_norm),
            Some((d, n)) => (d.max(model.t_dist), n.max(t_norm)),
        });
    }
    let (t_dist, t_norm) = inferred.ok_or(Error::CannotInferParameters(
        "no instance with at least 3 non-collinear points",
    ))?;
    Ok(GrowthParams {
        t_dist: t_dist.max(floors.t_dist),
        t_norm: t_norm.max(floors.t_norm).min(T::one()),
        ..*base
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompletionOptions<T = f64> {
    /// Instances with fewer members are dissolved to NOISE first.
    pub min_points: usize,
    /// Supplies k_growth, min_region and refit_period.
    pub base: GrowthParams<T>,
    pub floors: InferenceFloors<T>,
}

impl<T: Real> Default for CompletionOptions<T> {
    fn default() -> Self {
        Self {
            min_points: 10,
            base: GrowthParams::default(),
            floors: InferenceFloors::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompletionStatus<T = f64> {
    Completed {
        params: GrowthParams<T>,
        new_instances: usize,
    },
    /// Parameters could not be inferred; the labeling is returned as given.
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Completion<T = f64> {
    pub labeling: InstanceLabeling,
    pub status: CompletionStatus<T>,
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

/// Dissolves instances below `min_points`, infers growth thresholds from
/// the survivors and grows new planes over NOISE only. Surviving instances
/// keep their members; new planes get ids above the current maximum.
pub fn complete_planes<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    labeling: &InstanceLabeling,
    options: &CompletionOptions<T>,
) -> Result<Completion<T>> {
    check_len(cloud.len(), labeling.len())?;
    check_len(cloud.len(), index.len())?;
    check_len(cloud.len(), normals.len())?;
    let mut labels = labeling.labels().to_vec();
    for members in labeling.instances().values() {
        if members.len() < options.min_points {
            for &i in members {
                labels[i] = NOISE;
            }
        }
    }
    let survivors = InstanceLabeling::new(labels.clone())?;
    let params = match infer_growth_params(cloud, normals, &survivors, &options.base, &options.floors) {
        Ok(p) => p,
        Err(e @ Error::CannotInferParameters(_)) => {
            return Ok(Completion {
                labeling: labeling.clone(),
                status: CompletionStatus::Skipped { reason: e.to_string() },
            })
        }
        Err(e) => return Err(e),
    };
    let mask: Vec<bool> = labels.iter().map(|&l| l == NOISE).collect();
    let grown = region_grow(cloud, index, normals, &params, Some(&mask))?;
    let next = survivors.max_label().map_or(0, |m| m + 1);
    let mut new_instances = 0;
    for (k, members) in grown.instances().into_values().enumerate() {
        for i in members {
            labels[i] = next + k as Label;
        }
        new_instances += 1;
    }
    Ok(Completion {
        labeling: InstanceLabeling::new(labels)?,
        status: CompletionStatus::Completed { params, new_instances },
    })
}

/// Single pass against planes fitted once from the input labeling.
pub fn refine_boundaries_fast<T: Real>(
    cloud: &PointCloud<T>,
    index: &NeighborIndex<T>,
    normals: &[Vec3<T>],
    labeling: &InstanceLabeling,
    lambda: T,
    k_b: usize,
) -> Result<InstanceLabeling> {
    let options = RefineOptions {
        lambda,
        k_b,
        iterations: 1,
        noise_gate: None,
    };
    refine_boundaries(cloud, index, normals, labeling, &options)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig<T = f64> {
    /// Neighbourhood for normal estimation when the cloud carries none.
    pub normal_k: usize,
    /// Built-in segmenter settings.
    pub segmenter: CoarseConfig<T>,
    pub completion: CompletionOptions<T>,
    pub lambda: T,
    pub k_b: usize,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            normal_k: DEFAULT_NORMAL_K,
            segmenter: CoarseConfig::default(),
            completion: CompletionOptions::default(),
            lambda: T::lit(DEFAULT_LAMBDA),
            k_b: crate::superpoints::DEFAULT_REFINE_K,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineTrace<T = f64> {
    pub raw: InstanceLabeling,
    pub completed: InstanceLabeling,
    pub refined: InstanceLabeling,
    pub completion: CompletionStatus<T>,
}

/// Segmenter (or `external` labels) → completion → fast refinement.
pub fn pipeline<T: Real>(
    cloud: &PointCloud<T>,
    external: Option<&InstanceLabeling>,
    config: &PipelineConfig<T>,
) -> Result<PipelineTrace<T>> {
    if let Some(l) = external {
        check_len(cloud.len(), l.len())?;
    }
    let index = NeighborIndex::build(cloud)?;
    let normals = normals_or_estimate(cloud, &index, config.normal_k)?;
    let raw = match external {
        Some(l) => l.clone(),
        None => coarse_labeling(cloud, &index, &normals, &config.segmenter)?,
    };
    let Completion {
        labeling: completed,
        status,
    } = complete_planes(cloud, &index, &normals, &raw, &config.completion)?;
    let refined = refine_boundaries_fast(cloud, &index, &normals, &completed, config.lambda, config.k_b)?;
    Ok(PipelineTrace {
        raw,
        completed,
        refined,
        completion: status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::normals::estimate_normals;
    use crate::synthetic::{generate_roof, RoofKind, RoofSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fusion_examples() {
        assert_eq!(fuse_scores(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(fuse_scores(0.25, 1.0).unwrap(), 0.5);
        assert_eq!(fuse_scores(0.0, 0.7).unwrap(), 0.0);
        assert!(fuse_scores(1.1, 0.5).is_err());
        assert!(fuse_scores(0.5, -0.1).is_err());
        assert!(fuse_scores(f64::NAN, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn fusion_symmetric_and_bounded(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let f = fuse_scores(a, b).unwrap();
            prop_assert_eq!(f, fuse_scores(b, a).unwrap());
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - (a * b).sqrt()).abs() <= 1e-12);
        }

        #[test]
        fn ranking_invariant_under_monotone_rescale(pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..20)) {
            let mut a: Vec<ScoredInstance> = pairs.iter().enumerate()
                .map(|(i, &(s, m))| ScoredInstance::new(i as Label, s, m).unwrap()).collect();
            // the fused score is a strictly monotone function of S·mS, so
            // ranking by the raw product must agree
            let mut b: Vec<ScoredInstance> = a.iter().map(|x| ScoredInstance { fused: x.s * x.ms, ..*x }).collect();
            rank_instances(&mut a);
            rank_instances(&mut b);
            let ids = |v: &[ScoredInstance]| v.iter().map(|x| x.id).collect::<Vec<_>>();
            prop_assert_eq!(ids(&a), ids(&b));
        }
    }

    #[test]
    fn score_sidecar_round_trip() {
        let inst = vec![
            ScoredInstance::new(3, 0.5, 0.75).unwrap(),
            ScoredInstance::new(0, 1.0, 0.25).unwrap(),
        ];
        let back: Vec<ScoredInstance> = parse_scores(&format_scores(&inst)).unwrap();
        assert_eq!(back, inst);
        assert!(parse_scores::<f64>("1 0.5\n").is_err());
        assert!(matches!(
            parse_scores::<f64>("\n1 0.5 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        let ranked = filter_ranked(&inst, 0.5);
        assert_eq!(ranked.len(), 2);
        assert_eq!(ranked[0].id, 3);
        assert_eq!(filter_ranked(&inst, 0.6).len(), 1);
    }

    fn flat_grid(nx: usize, ny: usize, z: impl Fn(f64, f64) -> f64) -> Vec<Vec3> {
        let mut pts = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let (x, y) = (i as f64 * 0.25, j as f64 * 0.25);
                pts.push(Vec3::new(x, y, z(x, y)));
            }
        }
        pts
    }

    #[test]
    fn perfect_plane_hits_floors() {
        let cloud = PointCloud::new("p", flat_grid(8, 8, |_, _| 1.0)).unwrap();
        let normals = vec![Vec3::unit_z(); cloud.len()];
        let l = InstanceLabeling::new(vec![0; cloud.len()]).unwrap();
        let p = infer_growth_params(
            &cloud,
            &normals,
            &l,
            &GrowthParams::default(),
            &InferenceFloors::default(),
        )
        .unwrap();
        assert_eq!(p.t_dist, 0.01);
        assert_eq!(p.t_norm, 0.02);
        assert_eq!(p.k_growth, 16);
    }

    #[test]
    fn inference_takes_the_maximum() {
        // two flat patches, each with a single lifted point; the fitted
        // planes tilt slightly, so compare against brute-force residuals
        let mut pts = flat_grid(6, 6, |_, _| 0.0);
        let mut b = flat_grid(6, 6, |_, _| 5.0);
        pts[14].z = 0.02;
        b[14].z = 5.07;
        pts.extend(b);
        let cloud = PointCloud::new("two", pts).unwrap();
        let normals = vec![Vec3::unit_z(); cloud.len()];
        let labels: Vec<Label> = (0..cloud.len()).map(|i| (i / 36) as Label).collect();
        let l = InstanceLabeling::new(labels).unwrap();
        let p = infer_growth_params(
            &cloud,
            &normals,
            &l,
            &GrowthParams::default(),
            &InferenceFloors::default(),
        )
        .unwrap();
        let mut expected: f64 = 0.0;
        for members in l.instances().values() {
            let m = fit_plane_with(cloud.points(), None, members).unwrap();
            for &i in members {
                expected = expected.max(m.distance(cloud.point(i)));
            }
        }
        assert_eq!(p.t_dist, expected);
        assert!(p.t_dist > 0.06 && p.t_dist < 0.07);
    }

    #[test]
    fn inference_matches_residual_scan_on_noisy_roof() {
        let roof = generate_roof(&RoofSpec {
            kind: RoofKind::Hip,
            noise_sigma: 0.015,
            seed: 4,
            ..RoofSpec::default()
        })
        .unwrap();
        let idx = NeighborIndex::build(&roof.cloud).unwrap();
        let normals = estimate_normals(&roof.cloud, &idx, 16).unwrap().normals;
        let p = infer_growth_params(
            &roof.cloud,
            &normals,
            &roof.labels,
            &GrowthParams::default(),
            &InferenceFloors::default(),
        )
        .unwrap();
        let mut max_res: f64 = 0.0;
        for members in roof.labels.instances().values() {
            let m = fit_plane_with(roof.cloud.points(), None, members).unwrap();
            for &i in members {
                max_res = max_res.max(m.distance(roof.cloud.point(i)));
            }
        }
        assert!((p.t_dist - max_res).abs() < 1e-12);
    }

    #[test]
    fn inference_invariant_to_id_permutation() {
        let roof = generate_roof(&RoofSpec {
            kind: RoofKind::Pyramid,
            noise_sigma: 0.01,
            ..RoofSpec::default()
        })
        .unwrap();
        let idx = NeighborIndex::build(&roof.cloud).unwrap();
        let normals = estimate_normals(&roof.cloud, &idx, 16).unwrap().normals;
        let permuted =
            InstanceLabeling::new(roof.labels.labels().iter().map(|&l| [7, 2, 9, 0][l as usize]).collect()).unwrap();
        let base = GrowthParams::default();
        let f = InferenceFloors::default();
        assert_eq!(
            infer_growth_params(&roof.cloud, &normals, &roof.labels, &base, &f).unwrap(),
            infer_growth_params(&roof.cloud, &normals, &permuted, &base, &f).unwrap()
        );
    }

    #[test]
    fn inference_fails_without_usable_instance() {
        let cloud = PointCloud::new("x", flat_grid(3, 3, |_, _| 0.0)).unwrap();
        let normals = vec![Vec3::unit_z(); 9];
        let mut labels = vec![NOISE; 9];
        labels[0] = 0;
        labels[1] = 0;
        let l = InstanceLabeling::new(labels).unwrap();
        let e = infer_growth_params(
            &cloud,
            &normals,
            &l,
            &GrowthParams::default(),
            &InferenceFloors::default(),
        );
        assert!(matches!(e, Err(Error::CannotInferParameters(_))));
        let idx = NeighborIndex::build(&cloud).unwrap();
        let c = complete_planes(
            &cloud,
            &idx,
            &normals,
            &InstanceLabeling::all_noise(9),
            &CompletionOptions::default(),
        )
        .unwrap();
        assert!(matches!(c.status, CompletionStatus::Skipped { .. }));
        assert_eq!(c.labeling, InstanceLabeling::all_noise(9));
    }

    fn setup(spec: RoofSpec) -> (crate::synthetic::SyntheticRoof, NeighborIndex, Vec<Vec3>) {
        let roof = generate_roof(&spec).unwrap();
        let idx = NeighborIndex::build(&roof.cloud).unwrap();
        let normals = estimate_normals(&roof.cloud, &idx, 16).unwrap().normals;
        (roof, idx, normals)
    }

    #[test]
    fn complete_labeling_is_fixed_point() {
        let (roof, idx, normals) = setup(RoofSpec {
            kind: RoofKind::Hip,
            noise_sigma: 0.01,
            outlier_fraction: 0.01,
            ..RoofSpec::default()
        });
        let c = complete_planes(&roof.cloud, &idx, &normals, &roof.labels, &CompletionOptions::default()).unwrap();
        assert_eq!(c.labeling, roof.labels);
        assert!(matches!(c.status, CompletionStatus::Completed { new_instances: 0, .. }));
    }

    #[test]
    fn deleted_plane_is_recovered() {
        let (roof, idx, normals) = setup(RoofSpec {
            kind: RoofKind::Hip,
            noise_sigma: 0.01,
            seed: 2,
            ..RoofSpec::default()
        });
        let deleted: Vec<usize> = (0..roof.cloud.len()).filter(|&i| roof.labels.get(i) == 2).collect();
        let mut labels = roof.labels.labels().to_vec();
        for &i in &deleted {
            labels[i] = NOISE;
        }
        let input = InstanceLabeling::new(labels).unwrap();
        let c = complete_planes(&roof.cloud, &idx, &normals, &input, &CompletionOptions::default()).unwrap();
        assert!(matches!(c.status, CompletionStatus::Completed { new_instances: 1, .. }));
        let recovered = deleted.iter().filter(|&&i| c.labeling.get(i) == 4).count();
        assert!(
            recovered as f64 >= 0.95 * deleted.len() as f64,
            "{recovered}/{}",
            deleted.len()
        );
        for i in 0..roof.cloud.len() {
            if input.get(i) != NOISE {
                assert_eq!(c.labeling.get(i), input.get(i));
            }
        }
    }

    #[test]
    fn random_scatter_yields_no_new_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = flat_grid(20, 20, |_, _| 0.0);
        for _ in 0..300 {
            pts.push(Vec3::new(
                rng.gen_range(0.0..5.0),
                rng.gen_range(0.0..5.0),
                rng.gen_range(1.0..6.0),
            ));
        }
        let cloud = PointCloud::new("s", pts).unwrap();
        let idx = NeighborIndex::build(&cloud).unwrap();
        let normals = estimate_normals(&cloud, &idx, 16).unwrap().normals;
        let labels: Vec<Label> = (0..cloud.len()).map(|i| if i < 400 { 0 } else { NOISE }).collect();
        let l = InstanceLabeling::new(labels).unwrap();
        let c = complete_planes(&cloud, &idx, &normals, &l, &CompletionOptions::default()).unwrap();
        assert_eq!(c.labeling, l);
    }

    #[test]
    fn small_instances_are_dissolved() {
        let (roof, idx, normals) = setup(RoofSpec::default());
        let mut labels = roof.labels.labels().to_vec();
        for l in labels.iter_mut().take(5) {
            *l = 9;
        }
        let input = InstanceLabeling::new(labels).unwrap();
        let c = complete_planes(&roof.cloud, &idx, &normals, &input, &CompletionOptions::default()).unwrap();
        assert!(c.labeling.labels().iter().all(|&l| l != 9));
    }

    #[test]
    fn fast_refinement_keeps_perfect_labeling() {
        let (roof, idx, _) = setup(RoofSpec {
            kind: RoofKind::LShape,
            ..RoofSpec::default()
        });
        let normals = roof.true_normals();
        let out = refine_boundaries_fast(&roof.cloud, &idx, &normals, &roof.labels, 20.0, 8).unwrap();
        assert_eq!(out, roof.labels);
    }

    #[test]
    fn normal_term_breaks_distance_ties() {
        // plane A is z = 0, plane B is x = 0; the probe sits 0.3 m from both,
        // so only its normal decides
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                pts.push(Vec3::new(0.5 + i as f64 * 0.2, j as f64 * 0.2, 0.0));
                labels.push(0);
                pts.push(Vec3::new(0.0, j as f64 * 0.2, 0.5 + i as f64 * 0.2));
                labels.push(1);
            }
        }
        pts.push(Vec3::new(0.3, 0.5, 0.3));
        labels.push(NOISE);
        let cloud = PointCloud::new("t", pts).unwrap();
        let idx = NeighborIndex::build(&cloud).unwrap();
        let l = InstanceLabeling::new(labels).unwrap();
        let probe = cloud.len() - 1;
        for (probe_normal, expected) in [(Vec3::unit_z(), 0), (Vec3::unit_x(), 1)] {
            let mut normals: Vec<Vec3> = (0..probe)
                .map(|i| if l.get(i) == 0 { Vec3::unit_z() } else { Vec3::unit_x() })
                .collect();
            normals.push(probe_normal);
            for lambda in [2.0, 20.0, 200.0] {
                let opts = RefineOptions {
                    lambda,
                    k_b: 12,
                    iterations: 1,
                    noise_gate: Some(1.0),
                };
                let out = refine_boundaries(&cloud, &idx, &normals, &l, &opts).unwrap();
                assert_eq!(out.get(probe), expected);
            }
        }
    }
}
