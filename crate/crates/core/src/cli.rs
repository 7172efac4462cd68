//! Command-line front end: `track`, `eval`, `synth` and `bench`.
//!
//! All console numbers go through Rust's formatting machinery, which never
//! consults the locale, so decimals always use a point.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use image::{Rgb, RgbImage};
use serde::Serialize;

use crate::mask_io::{load_depth, load_mask, read_curves, write_curves, BinaryMask};
use crate::metrics::{l1_l2, match_instances, DiscretizedCurve, Summary, DEFAULT_SAMPLES};
use crate::spline::BSplineCurve;
use crate::synthgen::{presets, write_sequence, GroundTruthDocument, Scenario, ScenarioSpec};
use crate::tracker::{track_frame, track_frame_3d, FrameResult, Stage, TrackerConfig};

#[derive(Debug, Parser)]
#[command(name = "dlotrack", version, about = "Fit cubic B-splines to masks of cables and ropes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit curves to a sequence of masks (optionally with depth).
    Track(TrackArgs),
    /// Score curve documents against masks (L1/L2) or reference curves (L3).
    Eval(EvalArgs),
    /// Render a synthetic scenario to masks plus ground truth.
    Synth(SynthArgs),
    /// Measure per-stage latency.
    Bench(BenchArgs),
}

/// Tracker configuration: optional JSON file, then per-field overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON file with any subset of the tracker fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "j-th")]
    pub j_th: Option<f64>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long = "open-kernel")]
    pub open_kernel: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> anyhow::Result<TrackerConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("{}: cannot read config", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("{}: invalid config", path.display()))?
            }
            None => TrackerConfig::default(),
        };
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.j_th {
            cfg.j_th = v;
        }
        if let Some(v) = self.w {
            cfg.w = v;
        }
        if let Some(v) = self.open_kernel {
            cfg.open_kernel = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Mask images; processed in lexicographic order.
    #[arg(long, required = true, num_args = 1..)]
    pub mask: Vec<PathBuf>,
    /// Depth maps paired with the masks by sorted position.
    #[arg(long, num_args = 1..)]
    pub depth: Vec<PathBuf>,
    /// Output directory for `<stem>.json` documents.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `<stem>_overlay.png`.
    #[arg(long)]
    pub overlay: bool,
    /// Continue with the remaining frames after an error.
    #[arg(long = "keep-going")]
    pub keep_going: bool,
    /// Gray level above which a mask pixel is foreground.
    #[arg(long, default_value_t = 127)]
    pub threshold: u8,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Curve documents, one per frame, in lexicographic order.
    #[arg(long, required = true, num_args = 1..)]
    pub curves: Vec<PathBuf>,
    /// Masks to score against (L1/L2).
    #[arg(long, num_args = 1.., conflicts_with_all = ["reference", "ground_truth"])]
    pub mask: Vec<PathBuf>,
    /// Reference curve documents (L3).
    #[arg(long, num_args = 1.., conflicts_with = "ground_truth")]
    pub reference: Vec<PathBuf>,
    /// Ground-truth file written by `synth` (L3).
    #[arg(long = "ground-truth")]
    pub ground_truth: Option<PathBuf>,
    /// Samples per curve.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 127)]
    pub threshold: u8,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the number of frames.
    #[arg(long)]
    pub frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Mask images to benchmark; defaults to the built-in HD frame.
    #[arg(long, num_args = 1.., conflicts_with = "preset")]
    pub mask: Vec<PathBuf>,
    /// Built-in scenario to render and benchmark.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Untimed passes before measuring.
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,
    #[arg(long, default_value_t = 127)]
    pub threshold: u8,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Parses the process arguments and runs the selected command.
pub fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    execute(cli.command, &mut stdout.lock())
}

pub fn execute(command: Command, out: &mut impl Write) -> anyhow::Result<()> {
    match command {
        Command::Track(a) => cmd_track(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

fn sorted(paths: &[PathBuf]) -> Vec<PathBuf> {
    let mut v = paths.to_vec();
    v.sort();
    v
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "frame".into(), |s| s.to_string_lossy().into_owned())
}

const PALETTE: [[u8; 3]; 6] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
];

/// Mask in dark gray with each instance drawn in its own color.
#[must_use]
pub fn render_overlay(mask: &BinaryMask, curves: &[BSplineCurve]) -> RgbImage {
    let (w, h) = (mask.width() as u32, mask.height() as u32);
    let mut img = RgbImage::from_fn(w, h, |x, y| {
        let on = mask.data()[y as usize * mask.width() + x as usize];
        if on {
            Rgb([90, 90, 90])
        } else {
            Rgb([0, 0, 0])
        }
    });
    for (i, c) in curves.iter().enumerate() {
        let color = Rgb(PALETTE[i % PALETTE.len()]);
        let [t0, t1] = c.t_range();
        let n = ((t1 - t0) * 2.0).ceil().max(2.0) as usize;
        for p in c.sample(n) {
            let (x, y) = (p[0].round(), p[1].round());
            if x >= 0.0 && y >= 0.0 && (x as u32) < w && (y as u32) < h {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
    }
    img
}

fn track_one(
    mask_path: &Path,
    depth_path: Option<&Path>,
    args: &TrackArgs,
    cfg: &TrackerConfig,
) -> anyhow::Result<FrameResult> {
    let mask = load_mask(mask_path, args.threshold)?;
    let result = match depth_path {
        Some(dp) => {
            let depth = load_depth(dp)?;
            track_frame_3d(&mask, &depth, cfg).with_context(|| dp.display().to_string())?
        }
        None => track_frame(&mask, cfg).with_context(|| mask_path.display().to_string())?,
    };
    let name = stem(mask_path);
    let doc = result.to_document(&mask_path.display().to_string());
    write_curves(&doc, &args.out.join(format!("{name}.json")))?;
    if args.overlay {
        let path = args.out.join(format!("{name}_overlay.png"));
        render_overlay(&mask, &result.instances)
            .save(&path)
            .with_context(|| format!("{}: cannot write overlay", path.display()))?;
    }
    Ok(result)
}

pub fn cmd_track(args: &TrackArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let masks = sorted(&args.mask);
    let depths = sorted(&args.depth);
    if !depths.is_empty() && depths.len() != masks.len() {
        bail!("{} depth maps for {} masks", depths.len(), masks.len());
    }
    fs::create_dir_all(&args.out).with_context(|| args.out.display().to_string())?;
    writeln!(out, "frame\tinstances\telapsed_ms")?;
    let mut failures = 0usize;
    for (i, mask_path) in masks.iter().enumerate() {
        match track_one(mask_path, depths.get(i).map(PathBuf::as_path), args, &cfg) {
            Ok(r) => writeln!(out, "{}\t{}\t{:.3}", stem(mask_path), r.instances.len(), r.elapsed_ms)?,
            Err(e) if args.keep_going => {
                eprintln!("error: {e:#}");
                failures += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if failures > 0 {
        bail!("{failures} of {} frames failed", masks.len());
    }
    Ok(())
}

fn load_curve_set(path: &Path) -> anyhow::Result<Vec<BSplineCurve>> {
    let doc = read_curves(path)?;
    doc.instances
        .iter()
        .map(|i| BSplineCurve::from_instance(i).with_context(|| path.display().to_string()))
        .collect()
}

fn discretize(curves: &[BSplineCurve], samples: usize) -> anyhow::Result<Vec<DiscretizedCurve>> {
    Ok(curves
        .iter()
        .map(|c| DiscretizedCurve::from_curve(c, samples))
        .collect::<crate::Result<_>>()?)
}

/// Drops trailing coordinates so both sides share a dimension.
fn common_dim(a: Vec<DiscretizedCurve>, b: Vec<DiscretizedCurve>) -> anyhow::Result<(Vec<DiscretizedCurve>, Vec<DiscretizedCurve>)> {
    let dim = |v: &[DiscretizedCurve]| v.iter().map(|c| c.points()[0].len()).min();
    let d = match (dim(&a), dim(&b)) {
        (Some(x), Some(y)) => x.min(y),
        _ => return Ok((a, b)),
    };
    let proj = |v: Vec<DiscretizedCurve>| -> crate::Result<Vec<DiscretizedCurve>> {
        v.into_iter().map(|c| c.project(d)).collect()
    };
    Ok((proj(a)?, proj(b)?))
}

#[derive(Debug, Serialize)]
struct EvalFrame {
    frame: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    missing: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    redundant: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Aggregate {
    count: usize,
    mean: f64,
    /// Population standard deviation (divides by N).
    std: f64,
}

impl From<Summary> for Aggregate {
    fn from(s: Summary) -> Self {
        Self {
            count: s.count,
            mean: s.mean,
            std: s.std,
        }
    }
}

#[derive(Debug, Serialize)]
struct EvalReport {
    std_kind: &'static str,
    frames: Vec<EvalFrame>,
    aggregate: BTreeMap<&'static str, Aggregate>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

pub fn cmd_eval(args: &EvalArgs, out: &mut impl Write) -> anyhow::Result<()> {
    if args.samples < 2 {
        bail!("--samples must be at least 2");
    }
    let curves = sorted(&args.curves);
    let mut frames = Vec::with_capacity(curves.len());
    if !args.mask.is_empty() {
        let masks = sorted(&args.mask);
        if masks.len() != curves.len() {
            bail!("{} curve documents for {} masks", curves.len(), masks.len());
        }
        for (cp, mp) in curves.iter().zip(&masks) {
            let set = load_curve_set(cp)?;
            let mask = load_mask(mp, args.threshold)?;
            let (l1, l2) = l1_l2(&mask, &set, args.samples).with_context(|| cp.display().to_string())?;
            frames.push(EvalFrame {
                frame: stem(cp),
                l1: Some(l1),
                l2: Some(l2),
                l3: None,
                missing: None,
                redundant: None,
            });
        }
    } else {
        let references: Vec<Vec<DiscretizedCurve>> = if let Some(gt) = &args.ground_truth {
            let doc = GroundTruthDocument::load(gt)?;
            (0..doc.frames.len())
                .map(|f| doc.curves(f).with_context(|| gt.display().to_string()))
                .collect::<anyhow::Result<_>>()?
        } else if !args.reference.is_empty() {
            sorted(&args.reference)
                .iter()
                .map(|p| discretize(&load_curve_set(p)?, args.samples))
                .collect::<anyhow::Result<_>>()?
        } else {
            bail!("one of --mask, --reference or --ground-truth is required");
        };
        if references.len() != curves.len() {
            bail!("{} curve documents for {} reference frames", curves.len(), references.len());
        }
        for (cp, reference) in curves.iter().zip(references) {
            let pred = discretize(&load_curve_set(cp)?, args.samples)?;
            let (pred, reference) = common_dim(pred, reference)?;
            let m = match_instances(&pred, &reference);
            frames.push(EvalFrame {
                frame: stem(cp),
                l1: None,
                l2: None,
                l3: m.mean_l3().or((pred.is_empty() && reference.is_empty()).then_some(0.0)),
                missing: Some(m.missing),
                redundant: Some(m.redundant),
            });
        }
    }

    let mut aggregate = BTreeMap::new();
    type Column = (&'static str, fn(&EvalFrame) -> Option<f64>);
    let columns: [Column; 3] =
        [("l1", |f| f.l1), ("l2", |f| f.l2), ("l3", |f| f.l3)];
    for (name, get) in columns {
        let vals: Vec<f64> = frames.iter().filter_map(get).collect();
        if let Some(s) = Summary::of(&vals) {
            aggregate.insert(name, Aggregate::from(s));
        }
    }

    if args.json {
        let report = EvalReport {
            std_kind: "population",
            frames,
            aggregate,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(());
    }
    writeln!(out, "# aggregate rows: mean ± population std (divides by N)")?;
    let l3_mode = args.mask.is_empty();
    if l3_mode {
        writeln!(out, "frame\tl3\tmissing\tredundant")?;
        for f in &frames {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                f.frame,
                fmt_opt(f.l3),
                f.missing.unwrap_or(0),
                f.redundant.unwrap_or(0)
            )?;
        }
        if let Some(a) = aggregate.get("l3") {
            writeln!(out, "mean±std\t{:.4}±{:.4}", a.mean, a.std)?;
        }
    } else {
        writeln!(out, "frame\tl1\tl2")?;
        for f in &frames {
            writeln!(out, "{}\t{}\t{}", f.frame, fmt_opt(f.l1), fmt_opt(f.l2))?;
        }
        if let (Some(a), Some(b)) = (aggregate.get("l1"), aggregate.get("l2")) {
            writeln!(out, "mean±std\t{:.4}±{:.4}\t{:.4}±{:.4}", a.mean, a.std, b.mean, b.std)?;
        }
    }
    Ok(())
}

fn preset(name: &str) -> anyhow::Result<ScenarioSpec> {
    presets::by_name(name).with_context(|| {
        format!("unknown preset {name:?}; available: {}", presets::NAMES.join(", "))
    })
}

pub fn cmd_synth(args: &SynthArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let mut spec = match (&args.scenario, &args.preset) {
        (Some(path), _) => ScenarioSpec::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => bail!("one of --scenario or --preset is required"),
    };
    if let Some(f) = args.frames {
        spec.frames = f;
    }
    let gt = write_sequence(&spec, args.seed, &args.out)?;
    writeln!(out, "wrote {} frames and {}", spec.frames, gt.display())?;
    Ok(())
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Latency distribution of one stage (or the total) in milliseconds.
#[derive(Debug, Clone, Serialize)]
pub struct LatencyStats {
    pub stage: String,
    pub samples: usize,
    pub min: f64,
    pub median: f64,
    pub p95: f64,
}

impl LatencyStats {
    /// # Panics
    /// On an empty sample set.
    #[must_use]
    pub fn of(stage: &str, values: &[f64]) -> Self {
        assert!(!values.is_empty(), "no timing samples");
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            stage: stage.into(),
            samples: v.len(),
            min: v[0],
            median: median(&v),
            p95: percentile(&v, 0.95),
        }
    }
}

/// Tracks every mask `warmup + reps` times and summarizes the timed passes.
/// Fails if two passes over the same mask disagree on the fitted curves.
pub fn benchmark(
    masks: &[BinaryMask],
    cfg: &TrackerConfig,
    reps: usize,
    warmup: usize,
) -> anyhow::Result<Vec<LatencyStats>> {
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    let mut per_stage: BTreeMap<Stage, Vec<f64>> = BTreeMap::new();
    let mut total = Vec::new();
    let mut first: Vec<Option<Vec<BSplineCurve>>> = vec![None; masks.len()];
    for pass in 0..warmup + reps {
        for (i, mask) in masks.iter().enumerate() {
            let start = Instant::now();
            let r = track_frame(mask, cfg)?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            match &first[i] {
                Some(prev) if *prev != r.instances => bail!("frame {i}: output changed between passes"),
                Some(_) => {}
                None => first[i] = Some(r.instances.clone()),
            }
            if pass >= warmup {
                for (stage, ms) in r.stage_timings {
                    per_stage.entry(stage).or_default().push(ms);
                }
                total.push(wall);
            }
        }
    }
    let mut stats: Vec<LatencyStats> = per_stage
        .iter()
        .map(|(s, v)| LatencyStats::of(&s.to_string(), v))
        .collect();
    stats.push(LatencyStats::of("total", &total));
    Ok(stats)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let cfg = args.config.resolve()?;
    let masks: Vec<BinaryMask> = if args.mask.is_empty() {
        let spec = preset(args.preset.as_deref().unwrap_or("hd"))?;
        let scenario = Scenario::new(spec, args.seed)?;
        (0..scenario.frames())
            .map(|f| scenario.render(f).map(|r| r.mask))
            .collect::<crate::Result<_>>()?
    } else {
        sorted(&args.mask)
            .iter()
            .map(|p| load_mask(p, args.threshold))
            .collect::<crate::Result<_>>()?
    };
    let stats = benchmark(&masks, &cfg, args.reps, args.warmup)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&stats)?)?;
        return Ok(());
    }
    writeln!(out, "stage\tsamples\tmin_ms\tmedian_ms\tp95_ms")?;
    for s in &stats {
        writeln!(
            out,
            "{}\t{}\t{:.3}\t{:.3}\t{:.3}",
            s.stage, s.samples, s.min, s.median, s.p95
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.95), 19.0);
        assert_eq!(median(&v), 10.5);
        assert_eq!(median(&[3.0]), 3.0);
        let s = LatencyStats::of("x", &[5.0]);
        assert_eq!((s.min, s.median, s.p95), (5.0, 5.0, 5.0));
    }

    #[test]
    fn config_overrides_apply_on_top_of_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"k": 12, "m": 0.1}"#).unwrap();
        let args = ConfigArgs {
            config: Some(path),
            m: Some(0.2),
            ..ConfigArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.k, cfg.m, cfg.p), (12, 0.2, 10));
    }

    #[test]
    fn invalid_override_is_rejected() {
        let args = ConfigArgs {
            open_kernel: Some(4),
            ..ConfigArgs::default()
        };
        assert!(args.resolve().is_err());
    }

    #[test]
    fn cli_parses_every_subcommand() {
        Cli::command_factory_check();
        let c = Cli::try_parse_from(["dlotrack", "track", "--mask", "a.png", "b.png", "--out", "o", "--j-th", "3"]).unwrap();
        match c.command {
            Command::Track(a) => {
                assert_eq!(a.mask.len(), 2);
                assert_eq!(a.config.j_th, Some(3.0));
            }
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["dlotrack", "eval", "--curves", "a.json", "--mask", "m.png"]).is_ok());
        assert!(Cli::try_parse_from(["dlotrack", "synth", "--preset", "plain", "--out", "o"]).is_ok());
        assert!(Cli::try_parse_from(["dlotrack", "bench", "--reps", "1", "--warmup", "0"]).is_ok());
        assert!(Cli::try_parse_from(["dlotrack"]).is_err());
    }

    impl Cli {
        fn command_factory_check() {
            use clap::CommandFactory;
            Cli::command().debug_assert();
        }
    }
}
