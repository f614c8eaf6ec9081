//! Command-line front end: argument parsing, config resolution and the six
//! subcommands. `run` returns the process exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use roofseg::config::RunConfig;
use roofseg::degrade;
use roofseg::features::compute_features;
use roofseg::geometry::index::NeighborIndex;
use roofseg::geometry::normals::normals_or_estimate;
use roofseg::io;
use roofseg::kan::gradient_check_suite;
use roofseg::metrics::{evaluate, BatchReport};
use roofseg::postprocess::{pipeline, CompletionStatus};
use roofseg::superpoints::quality::{superpoint_quality, SuperpointQuality};
use roofseg::superpoints::{generate_superpoints, SuperpointPartition};
use roofseg::{InstanceLabeling, PointCloud64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "roofseg", version, about = "Roof plane segmentation toolkit")]
pub struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key (`key=value`); repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Shortcut for `--set seed=N`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Shortcut for `--set threads=N`; 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-point feature table (linearity, planarity, scattering, verticality, alpha/2π, contour flag).
    Features {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Coarse and fine superpoint partitions with an optional quality report.
    Superpoints {
        #[arg(long)]
        input: PathBuf,
        /// Fine partition: one group id per point.
        #[arg(long)]
        output: PathBuf,
        /// Ground-truth labels; a labeled XYZ input is used otherwise.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Quality JSON path; defaults to `<output stem>.quality.json` when labels exist.
        #[arg(long)]
        quality: Option<PathBuf>,
        /// Also write the coarse partition here.
        #[arg(long)]
        coarse: Option<PathBuf>,
    },
    /// Segmenter or external labels, then plane completion and boundary refinement.
    Segment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// External instance labels replacing the built-in segmenter.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Write `<stem>.raw`, `<stem>.completed` and `<stem>.refined` labelings next to the output.
        #[arg(long)]
        trace: bool,
    },
    /// Batch metrics over label files matched by name.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        allow_missing: bool,
    },
    /// Apply one degradation operator to every cloud in a directory.
    Degrade {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        op: DegradeOp,
    },
    /// Finite-difference gradient check of random Fourier KAN layers.
    KanCheck {
        #[arg(long, default_value_t = 100)]
        draws: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegradeOp {
    Downsample,
    Density,
    Precision,
    Corrupt,
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "error: {m}"),
            Failure::Invariant(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl From<roofseg::Error> for Failure {
    fn from(e: roofseg::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

/// File config, then `--set` overrides in order, then shortcuts; validated last.
pub fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load_unvalidated(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Invalid(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Failure::Invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Features { input, output } => cmd_features(input, output, &cfg),
        Command::Superpoints {
            input,
            output,
            labels,
            quality,
            coarse,
        } => cmd_superpoints(
            input,
            output,
            labels.as_deref(),
            quality.as_deref(),
            coarse.as_deref(),
            &cfg,
        ),
        Command::Segment {
            input,
            output,
            labels,
            trace,
        } => cmd_segment(input, output, labels.as_deref(), *trace, &cfg),
        Command::Eval {
            gt,
            pred,
            report,
            allow_missing,
        } => cmd_eval(gt, pred, report, *allow_missing, &cfg),
        Command::Degrade { input, output, op } => cmd_degrade(input, output, *op, &cfg),
        Command::KanCheck { draws } => cmd_kan_check(*draws, &cfg),
    })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Invariant(format!("JSON encoding failed: {e}")))
}

fn load_input(path: &Path) -> CliResult<(PointCloud64, Option<InstanceLabeling>)> {
    Ok(io::load_cloud::<f64>(path)?)
}

/// `dir/stem.tag.ext` next to `path`, where `ext` defaults to `txt`.
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "txt".into());
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

pub fn cmd_features(input: &Path, output: &Path, cfg: &RunConfig) -> CliResult<()> {
    let (cloud, _) = load_input(input)?;
    let index = NeighborIndex::build(&cloud)?;
    let features = compute_features(&cloud, &index, cfg.feature_k, cfg.contour_k, cfg.contour_tau)?;
    let mut out = String::with_capacity(features.len() * 48);
    for f in &features {
        let r = f.to_row();
        let _ = writeln!(out, "{} {} {} {} {} {}", r[0], r[1], r[2], r[3], r[4], r[5]);
    }
    write_file(output, out)?;
    println!("features: {} rows -> {}", features.len(), output.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct StageQuality {
    groups: usize,
    #[serde(flatten)]
    quality: SuperpointQuality,
}

#[derive(Debug, Serialize)]
struct QualityReport {
    sample_id: String,
    points: usize,
    superpoint_n: usize,
    fine: StageQuality,
    coarse: StageQuality,
}

fn check_partition(p: &SuperpointPartition, n: usize) -> CliResult<()> {
    if p.n_points() != n {
        return Err(Failure::Invariant(format!(
            "partition covers {} points, cloud has {n}",
            p.n_points()
        )));
    }
    p.validate().map_err(|e| Failure::Invariant(e.to_string()))
}

pub fn cmd_superpoints(
    input: &Path,
    output: &Path,
    labels: Option<&Path>,
    quality: Option<&Path>,
    coarse_out: Option<&Path>,
    cfg: &RunConfig,
) -> CliResult<()> {
    let (cloud, embedded) = load_input(input)?;
    let gt = match labels {
        Some(p) => Some(io::load_labeling(p, Some(cloud.len()))?),
        None => embedded,
    };
    if quality.is_some() && gt.is_none() {
        return Err(Failure::Invalid(
            "--quality needs ground-truth labels (--labels or a labeled XYZ input)".into(),
        ));
    }
    let index = NeighborIndex::build(&cloud)?;
    let normals = normals_or_estimate(&cloud, &index, cfg.normal_k)?;
    let sp = generate_superpoints(
        &cloud,
        &index,
        &normals,
        &cfg.coarse_config::<f64>(),
        cfg.superpoint_n,
        cfg.seed,
    )?;
    check_partition(&sp.coarse, cloud.len())?;
    check_partition(&sp.fine, cloud.len())?;
    if !sp.fine.refines(&sp.coarse) {
        return Err(Failure::Invariant(
            "fine partition does not refine the coarse one".into(),
        ));
    }

    let fine_text = io::format_partition(sp.fine.groups(), cloud.len())?;
    let coarse_text = match coarse_out {
        Some(_) => Some(io::format_partition(sp.coarse.groups(), cloud.len())?),
        None => None,
    };
    let report = match &gt {
        Some(gt) => {
            let stage = |p: &SuperpointPartition| -> CliResult<StageQuality> {
                Ok(StageQuality {
                    groups: p.len(),
                    quality: superpoint_quality(&cloud, p, gt)?,
                })
            };
            let report = QualityReport {
                sample_id: cloud.id().to_string(),
                points: cloud.len(),
                superpoint_n: cfg.superpoint_n,
                fine: stage(&sp.fine)?,
                coarse: stage(&sp.coarse)?,
            };
            let path = quality
                .map(Path::to_path_buf)
                .unwrap_or_else(|| output.with_extension("quality.json"));
            Some((path, to_json(&report)?))
        }
        None => None,
    };

    write_file(output, fine_text)?;
    if let (Some(p), Some(text)) = (coarse_out, coarse_text) {
        write_file(p, text)?;
    }
    if let Some((p, text)) = report {
        write_file(&p, text)?;
    }
    println!(
        "superpoints: {} coarse, {} fine -> {}",
        sp.coarse.len(),
        sp.fine.len(),
        output.display()
    );
    Ok(())
}

pub fn cmd_segment(input: &Path, output: &Path, labels: Option<&Path>, trace: bool, cfg: &RunConfig) -> CliResult<()> {
    let (cloud, _) = load_input(input)?;
    let external = match labels {
        Some(p) => Some(io::load_labeling(p, Some(cloud.len()))?),
        None => None,
    };
    let result = pipeline(&cloud, external.as_ref(), &cfg.pipeline_config::<f64>())?;
    for (name, l) in [
        ("raw", &result.raw),
        ("completed", &result.completed),
        ("refined", &result.refined),
    ] {
        if l.len() != cloud.len() {
            return Err(Failure::Invariant(format!(
                "{name} labeling has {} entries for {} points",
                l.len(),
                cloud.len()
            )));
        }
    }
    io::save_labeling(&result.refined, output)?;
    if trace {
        io::save_labeling(&result.raw, sibling(output, "raw"))?;
        io::save_labeling(&result.completed, sibling(output, "completed"))?;
        io::save_labeling(&result.refined, sibling(output, "refined"))?;
    }
    let completion = match &result.completion {
        CompletionStatus::Completed { new_instances, .. } => format!("{new_instances} planes completed"),
        CompletionStatus::Skipped { reason } => format!("completion skipped ({reason})"),
    };
    println!(
        "segment: {} instances, {completion} -> {}",
        result.refined.instance_count(),
        output.display()
    );
    Ok(())
}

/// Reads a labeling from a one-column label file or a labeled XYZ file.
fn read_labels(path: &Path) -> CliResult<InstanceLabeling> {
    match io::xyz_column_count(path)? {
        1 => Ok(io::load_labeling(path, None)?),
        4 => Ok(io::load_xyz::<f64>(path, true)?.1.expect("label column requested")),
        c => Err(Failure::Invalid(format!(
            "{}: expected 1 or 4 columns, found {c}",
            path.display()
        ))),
    }
}

/// `*.txt` files in `dir`, keyed by file stem and sorted.
fn label_files(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::Invalid(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Failure::Invalid(format!("cannot read directory {}: {e}", dir.display())))?
            .path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            if let Some(stem) = path.file_stem() {
                files.push((stem.to_string_lossy().into_owned(), path));
            }
        }
    }
    files.sort();
    Ok(files)
}

pub fn cmd_eval(gt_dir: &Path, pred_dir: &Path, report: &Path, allow_missing: bool, cfg: &RunConfig) -> CliResult<()> {
    let gt_files = label_files(gt_dir)?;
    if gt_files.is_empty() {
        return Err(Failure::Invalid(format!("no .txt label files in {}", gt_dir.display())));
    }
    let pred_files: std::collections::BTreeMap<String, PathBuf> = label_files(pred_dir)?.into_iter().collect();
    let mut missing = Vec::new();
    let mut pairs = Vec::new();
    for (id, gt_path) in gt_files {
        match pred_files.get(&id) {
            Some(p) => pairs.push((id, gt_path, p.clone())),
            None => missing.push(id),
        }
    }
    let samples = pairs
        .par_iter()
        .map(|(id, g, p)| -> CliResult<_> {
            let gt = read_labels(g)?;
            let pred = read_labels(p)?;
            evaluate(id.clone(), &gt, &pred, cfg.iou_threshold)
                .map_err(|e| Failure::Invalid(format!("sample {id}: {e}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let batch = BatchReport::new(samples, missing);
    write_file(report, to_json(&batch)?)?;
    match &batch.aggregate {
        Some(a) => println!(
            "eval: {} samples, cov {:.4}, wcov {:.4}, f1 {:.4}, accuracy {:.4}",
            a.samples, a.cov, a.wcov, a.f1, a.accuracy
        ),
        None => println!("eval: no matched samples"),
    }
    if !batch.missing.is_empty() {
        let msg = format!("missing predictions for: {}", batch.missing.join(", "));
        if allow_missing {
            eprintln!("warning: {msg}");
        } else {
            return Err(Failure::Invalid(msg));
        }
    }
    Ok(())
}

/// FNV-1a over the sample name; mixed with the run seed so samples differ.
pub fn sample_seed(base: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ base
}

struct DegradeInput {
    name: String,
    path: PathBuf,
    cloud: PointCloud64,
    labels: Option<InstanceLabeling>,
}

#[derive(Serialize)]
struct ManifestSample {
    id: String,
    input: String,
    cloud: String,
    labels: Option<String>,
    seed: u64,
    points_in: usize,
    points_out: usize,
}

#[derive(Serialize)]
struct Manifest {
    operator: DegradeOp,
    seed: u64,
    params: std::collections::BTreeMap<&'static str, f64>,
    samples: Vec<ManifestSample>,
}

/// Clouds (`.xyz` or `.ply`) in `dir`; labels come from a sibling
/// `<stem>.txt` when present, otherwise from a fourth XYZ column.
fn degrade_inputs(dir: &Path) -> CliResult<Vec<DegradeInput>> {
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::Invalid(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Failure::Invalid(format!("cannot read directory {}: {e}", dir.display())))?
            .path();
        let ext = path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase());
        if path.is_file() && matches!(ext.as_deref(), Some("xyz") | Some("ply")) {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Invalid(format!("no .xyz or .ply clouds in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|path| {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let (cloud, embedded) = load_input(&path)?;
            let side = path.with_extension("txt");
            let labels = if side.is_file() {
                Some(io::load_labeling(&side, Some(cloud.len()))?)
            } else {
                embedded
            };
            Ok(DegradeInput {
                name,
                path,
                cloud,
                labels,
            })
        })
        .collect()
}

fn need_labels(s: &DegradeInput, op: DegradeOp) -> CliResult<&InstanceLabeling> {
    s.labels
        .as_ref()
        .ok_or_else(|| Failure::Invalid(format!("sample {}: operator {op:?} needs labels", s.name)))
}

fn apply_degrade(
    s: &DegradeInput,
    op: DegradeOp,
    cfg: &RunConfig,
    seed: u64,
) -> CliResult<(PointCloud64, Option<InstanceLabeling>)> {
    Ok(match op {
        DegradeOp::Downsample => degrade::downsample(&s.cloud, s.labels.as_ref(), cfg.keep_fraction, seed)?,
        DegradeOp::Density => {
            let labels = need_labels(s, op)?;
            let planes = degrade::fit_label_planes(&s.cloud, labels)?;
            let c = degrade::density_variation(
                &s.cloud,
                labels,
                &planes,
                cfg.density_spacing,
                cfg.density_max_shift,
                seed,
            )?;
            (c, s.labels.clone())
        }
        DegradeOp::Precision => (
            degrade::precision_reduction(&s.cloud, cfg.max_offset, seed)?,
            s.labels.clone(),
        ),
        DegradeOp::Corrupt => {
            let labels = need_labels(s, op)?;
            let index = NeighborIndex::build(&s.cloud)?;
            let l = degrade::corrupt_boundaries(&s.cloud, &index, labels, cfg.swap_radius, seed)?;
            (s.cloud.clone(), Some(l))
        }
    })
}

pub fn cmd_degrade(input: &Path, output: &Path, op: DegradeOp, cfg: &RunConfig) -> CliResult<()> {
    if input == output {
        return Err(Failure::Invalid(
            "output directory must differ from the input directory".into(),
        ));
    }
    let inputs = degrade_inputs(input)?;
    let results = inputs
        .par_iter()
        .map(|s| {
            let seed = sample_seed(cfg.seed, &s.name);
            let (cloud, labels) = apply_degrade(s, op, cfg, seed)?;
            Ok((
                seed,
                io::format_xyz(&cloud, None)?,
                labels.map(|l| io::format_labeling(&l)),
                cloud.len(),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut params = std::collections::BTreeMap::new();
    match op {
        DegradeOp::Downsample => {
            params.insert("keep_fraction", cfg.keep_fraction);
        }
        DegradeOp::Density => {
            params.insert("spacing", cfg.density_spacing);
            params.insert("max_shift", cfg.density_max_shift);
        }
        DegradeOp::Precision => {
            params.insert("max_offset", cfg.max_offset);
        }
        DegradeOp::Corrupt => {
            params.insert("radius", cfg.swap_radius);
        }
    }
    let mut samples = Vec::with_capacity(inputs.len());
    let mut writes = Vec::new();
    for (s, (seed, xyz, labels, n_out)) in inputs.iter().zip(results) {
        let cloud_name = format!("{}.xyz", s.name);
        let label_name = labels.as_ref().map(|_| format!("{}.txt", s.name));
        writes.push((cloud_name.clone(), xyz));
        if let (Some(n), Some(text)) = (&label_name, labels) {
            writes.push((n.clone(), text));
        }
        samples.push(ManifestSample {
            id: s.name.clone(),
            input: s.path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            cloud: cloud_name,
            labels: label_name,
            seed,
            points_in: s.cloud.len(),
            points_out: n_out,
        });
    }
    let manifest = to_json(&Manifest {
        operator: op,
        seed: cfg.seed,
        params,
        samples,
    })?;

    fs::create_dir_all(output).map_err(|e| Failure::Invalid(format!("cannot create {}: {e}", output.display())))?;
    for (name, text) in writes {
        write_file(&output.join(name), text)?;
    }
    write_file(&output.join("manifest.json"), manifest)?;
    println!("degrade: {} samples ({op:?}) -> {}", inputs.len(), output.display());
    Ok(())
}

pub fn cmd_kan_check(draws: usize, cfg: &RunConfig) -> CliResult<()> {
    if draws == 0 {
        return Err(Failure::Invalid("--draws must be at least 1".into()));
    }
    let report = gradient_check_suite(draws, cfg.seed)?;
    println!(
        "kan-check: {} draws, max relative error {:e}",
        report.draws, report.max_relative_error
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "gradient check failed: max relative error {:e}",
            report.max_relative_error
        )))
    }
}
