//! Run configuration: every tunable with its default, loaded from a
//! `key = value` text file (`#` starts a comment) and overridable key by key.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::normals::DEFAULT_NORMAL_K;
use crate::geometry::DEFAULT_LAMBDA;
use crate::postprocess::{CompletionOptions, InferenceFloors, PipelineConfig};
use crate::scalar::Real;
use crate::superpoints::{CoarseConfig, GrowthParams, RefineOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub normal_k: usize,
    pub feature_k: usize,
    pub contour_k: usize,
    pub contour_tau: f64,
    pub growth_t_dist: f64,
    pub growth_t_norm: f64,
    pub growth_k: usize,
    pub growth_min_region: usize,
    pub growth_refit_period: usize,
    pub refine_lambda: f64,
    pub refine_k: usize,
    pub refine_iterations: usize,
    pub superpoint_n: usize,
    pub seed: u64,
    pub completion_min_points: usize,
    pub floor_t_dist: f64,
    pub floor_t_norm: f64,
    pub iou_threshold: f64,
    pub keep_fraction: f64,
    pub density_spacing: f64,
    pub density_max_shift: f64,
    pub max_offset: f64,
    pub swap_radius: f64,
    /// Worker threads for batch commands; 0 uses every core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            normal_k: DEFAULT_NORMAL_K,
            feature_k: crate::features::DEFAULT_FEATURE_K,
            contour_k: 16,
            contour_tau: std::f64::consts::FRAC_PI_2,
            growth_t_dist: 0.05,
            growth_t_norm: 0.1,
            growth_k: 16,
            growth_min_region: 10,
            growth_refit_period: 32,
            refine_lambda: DEFAULT_LAMBDA,
            refine_k: crate::superpoints::DEFAULT_REFINE_K,
            refine_iterations: crate::superpoints::DEFAULT_LOCAL_ITERATIONS,
            superpoint_n: crate::superpoints::DEFAULT_POINTS_PER_SUPERPOINT,
            seed: 0,
            completion_min_points: 10,
            floor_t_dist: 0.01,
            floor_t_norm: 0.02,
            iou_threshold: crate::metrics::DEFAULT_IOU_THRESHOLD,
            keep_fraction: crate::degrade::DEFAULT_KEEP_FRACTION,
            density_spacing: crate::degrade::DEFAULT_SPACING,
            density_max_shift: crate::degrade::DEFAULT_SHIFT_FRACTION * crate::degrade::DEFAULT_SPACING,
            max_offset: crate::degrade::DEFAULT_MAX_OFFSET,
            swap_radius: crate::degrade::DEFAULT_SWAP_RADIUS,
            threads: 0,
        }
    }
}

pub const KEYS: [&str; 24] = [
    "normal_k",
    "feature_k",
    "contour_k",
    "contour_tau",
    "growth_t_dist",
    "growth_t_norm",
    "growth_k",
    "growth_min_region",
    "growth_refit_period",
    "refine_lambda",
    "refine_k",
    "refine_iterations",
    "superpoint_n",
    "seed",
    "completion_min_points",
    "floor_t_dist",
    "floor_t_norm",
    "iou_threshold",
    "keep_fraction",
    "density_spacing",
    "density_max_shift",
    "max_offset",
    "swap_radius",
    "threads",
];

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: key.to_string(),
        reason: reason.into(),
    }
}

fn parse_num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| invalid(key, format!("cannot parse {value:?}")))
}

impl RunConfig {
    /// Sets one key from its textual value without validating ranges.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "normal_k" => self.normal_k = parse_num(key, v)?,
            "feature_k" => self.feature_k = parse_num(key, v)?,
            "contour_k" => self.contour_k = parse_num(key, v)?,
            "contour_tau" => self.contour_tau = parse_num(key, v)?,
            "growth_t_dist" => self.growth_t_dist = parse_num(key, v)?,
            "growth_t_norm" => self.growth_t_norm = parse_num(key, v)?,
            "growth_k" => self.growth_k = parse_num(key, v)?,
            "growth_min_region" => self.growth_min_region = parse_num(key, v)?,
            "growth_refit_period" => self.growth_refit_period = parse_num(key, v)?,
            "refine_lambda" => self.refine_lambda = parse_num(key, v)?,
            "refine_k" => self.refine_k = parse_num(key, v)?,
            "refine_iterations" => self.refine_iterations = parse_num(key, v)?,
            "superpoint_n" => self.superpoint_n = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "completion_min_points" => self.completion_min_points = parse_num(key, v)?,
            "floor_t_dist" => self.floor_t_dist = parse_num(key, v)?,
            "floor_t_norm" => self.floor_t_norm = parse_num(key, v)?,
            "iou_threshold" => self.iou_threshold = parse_num(key, v)?,
            "keep_fraction" => self.keep_fraction = parse_num(key, v)?,
            "density_spacing" => self.density_spacing = parse_num(key, v)?,
            "density_max_shift" => self.density_max_shift = parse_num(key, v)?,
            "max_offset" => self.max_offset = parse_num(key, v)?,
            "swap_radius" => self.swap_radius = parse_num(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            _ => return Err(invalid(key, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "normal_k" => self.normal_k.to_string(),
            "feature_k" => self.feature_k.to_string(),
            "contour_k" => self.contour_k.to_string(),
            "contour_tau" => self.contour_tau.to_string(),
            "growth_t_dist" => self.growth_t_dist.to_string(),
            "growth_t_norm" => self.growth_t_norm.to_string(),
            "growth_k" => self.growth_k.to_string(),
            "growth_min_region" => self.growth_min_region.to_string(),
            "growth_refit_period" => self.growth_refit_period.to_string(),
            "refine_lambda" => self.refine_lambda.to_string(),
            "refine_k" => self.refine_k.to_string(),
            "refine_iterations" => self.refine_iterations.to_string(),
            "superpoint_n" => self.superpoint_n.to_string(),
            "seed" => self.seed.to_string(),
            "completion_min_points" => self.completion_min_points.to_string(),
            "floor_t_dist" => self.floor_t_dist.to_string(),
            "floor_t_norm" => self.floor_t_norm.to_string(),
            "iou_threshold" => self.iou_threshold.to_string(),
            "keep_fraction" => self.keep_fraction.to_string(),
            "density_spacing" => self.density_spacing.to_string(),
            "density_max_shift" => self.density_max_shift.to_string(),
            "max_offset" => self.max_offset.to_string(),
            "swap_radius" => self.swap_radius.to_string(),
            "threads" => self.threads.to_string(),
            _ => return None,
        })
    }

    /// Parses and validates a config text. Keys may appear at most once.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = Self::parse_unvalidated(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`RunConfig::parse`] but leaves range checks to the caller, so
    /// later overrides can still fix a value.
    pub fn parse_unvalidated(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: n + 1,
                message: format!("expected `key = value`, found {line:?}"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("duplicate key {key:?}"),
                });
            }
            cfg.set(key, value).map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg = Self::load_unvalidated(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_unvalidated(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_unvalidated(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key).expect("known key"));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let at_least = |key: &str, v: usize, min: usize| {
            if v < min {
                Err(invalid(key, format!("must be >= {min}, got {v}")))
            } else {
                Ok(())
            }
        };
        let open_closed = |key: &str, v: f64, lo: f64, hi: f64| {
            if v > lo && v <= hi {
                Ok(())
            } else {
                Err(invalid(key, format!("must lie in ({lo}, {hi}], got {v}")))
            }
        };
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive, got {v}")))
            }
        };
        let nonnegative = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be nonnegative, got {v}")))
            }
        };
        at_least("normal_k", self.normal_k, 3)?;
        at_least("feature_k", self.feature_k, 3)?;
        at_least("contour_k", self.contour_k, 4)?;
        if !(self.contour_tau > 0.0 && self.contour_tau < std::f64::consts::TAU) {
            return Err(invalid(
                "contour_tau",
                format!("must lie in (0, 2π), got {}", self.contour_tau),
            ));
        }
        positive("growth_t_dist", self.growth_t_dist)?;
        open_closed("growth_t_norm", self.growth_t_norm, 0.0, 1.0)?;
        at_least("growth_k", self.growth_k, 3)?;
        at_least("growth_min_region", self.growth_min_region, 3)?;
        at_least("growth_refit_period", self.growth_refit_period, 1)?;
        positive("refine_lambda", self.refine_lambda)?;
        at_least("refine_k", self.refine_k, 2)?;
        at_least("refine_iterations", self.refine_iterations, 1)?;
        at_least("superpoint_n", self.superpoint_n, 2)?;
        at_least("completion_min_points", self.completion_min_points, 1)?;
        positive("floor_t_dist", self.floor_t_dist)?;
        open_closed("floor_t_norm", self.floor_t_norm, 0.0, 1.0)?;
        open_closed("iou_threshold", self.iou_threshold, 0.0, 1.0)?;
        open_closed("keep_fraction", self.keep_fraction, 0.0, 1.0)?;
        positive("density_spacing", self.density_spacing)?;
        nonnegative("density_max_shift", self.density_max_shift)?;
        if self.density_max_shift >= self.density_spacing / 2.0 {
            return Err(invalid(
                "density_max_shift",
                format!("must be below density_spacing / 2 = {}", self.density_spacing / 2.0),
            ));
        }
        nonnegative("max_offset", self.max_offset)?;
        positive("swap_radius", self.swap_radius)?;
        Ok(())
    }

    pub fn growth_params<T: Real>(&self) -> GrowthParams<T> {
        GrowthParams {
            t_dist: T::lit(self.growth_t_dist),
            t_norm: T::lit(self.growth_t_norm),
            k_growth: self.growth_k,
            min_region: self.growth_min_region,
            refit_period: self.growth_refit_period,
        }
    }

    pub fn coarse_config<T: Real>(&self) -> CoarseConfig<T> {
        CoarseConfig {
            growth: self.growth_params(),
            refine: RefineOptions {
                lambda: T::lit(self.refine_lambda),
                k_b: self.refine_k,
                iterations: self.refine_iterations,
                noise_gate: Some(T::lit(self.growth_t_dist)),
            },
        }
    }

    pub fn pipeline_config<T: Real>(&self) -> PipelineConfig<T> {
        PipelineConfig {
            normal_k: self.normal_k,
            segmenter: self.coarse_config(),
            completion: CompletionOptions {
                min_points: self.completion_min_points,
                base: self.growth_params(),
                floors: InferenceFloors {
                    t_dist: T::lit(self.floor_t_dist),
                    t_norm: T::lit(self.floor_t_norm),
                },
            },
            lambda: T::lit(self.refine_lambda),
            k_b: self.refine_k,
        }
    }
}
