//! Command-line surface.
//!
//! Every table is CSV with a header row, written to `--out` or stdout.
//! Exit codes: 0 success, 2 config error, 3 data or format error,
//! 4 feasibility error.

use std::path::{Path, PathBuf};

use cbar_core::benchmark::BuildConfig;
use cbar_core::distances::{
    linear_fit, probe_distances, r_squared, relative_std_percent, toy_mix_sweep, ProbeConfig,
    SampleSet, SelectMode, ToyClusters, ToyMixRow,
};
use cbar_core::transforms::{sample_augmentation, AugmentationScheme};
use cbar_core::{Registry, Seed};
use clap::{Args, Parser, Subcommand};

use crate::build::{render_selected, run_build, write_outcome};
use crate::cbf::{read_features, write_features, FeatureFile};
use crate::config::{self, budget, existing, nonneg, output, RunConfig};
use crate::dataset::{list_images, sample_subset, synthetic_subset};
use crate::error::{CliError, Result};
use crate::featurize::{featurize_embedded, featurize_plan, FeaturizePlan};
use crate::measure::{choose, correlate, distance_table, join_errors, rank_rows, split};
use crate::render::{render_dataset, RenderSpec};
use crate::selection::{
    parse_augmentations, parse_corruptions, parse_schemes, parse_severities, severities_for,
};
use crate::severity_config::load_registry;
use crate::tables::{num, read_error_table, read_scheme_errors, TableWriter};
use crate::toy::real_mix_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "cbar",
    version,
    about = "Perceptual transform distances and dissimilar benchmark construction"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Run config file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed. Required when the CI environment variable is set.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Severity table (TOML) replacing the built-in one.
    #[arg(long, global = true)]
    pub severity_table: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write transformed copies of an image directory.
    Render(RenderArgs),
    /// Compute corruption centers and augmentation features.
    Featurize(FeaturizeArgs),
    /// Minimal sample distance of each augmentation scheme to each center.
    Msd(DistanceArgs),
    /// Mean discrepancy of each augmentation scheme to each center.
    Mmd(DistanceArgs),
    /// Spearman correlation between MSD and error, per corruption.
    Correlate(CorrelateArgs),
    /// Order augmentation samples round robin by closeness to centers.
    RankAugs(RankArgs),
    /// Pick the closest, farthest, or random k of the ranked samples.
    Subset(SubsetArgs),
    /// Relative spread of a probe distance over resampled image subsets.
    VarianceProbe(ProbeArgs),
    /// Select ten dissimilar corruptions matching the reference error.
    BuildBenchmark(BuildArgs),
    /// MMD and MSD of a two-cluster mixture across mixing fractions.
    ToyMix(ToyArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Clean image directory.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `reference`, `cbar`, `all`, `none`, or a comma list.
    #[arg(long, default_value = "none")]
    pub corruptions: String,
    /// Like `1-5` or `2,4`; defaults to each corruption's full range.
    #[arg(long)]
    pub severities: Option<String>,
    /// Comma list of base augmentations.
    #[arg(long, default_value = "")]
    pub augmentations: String,
    /// Powerset scheme indices, like `0,5,100-110` or `all`.
    #[arg(long, default_value = "")]
    pub schemes: String,
    /// Draws per scheme.
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
}

#[derive(Debug, Args)]
pub struct ImageSource {
    /// Clean image directory.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Use this many procedural images instead of a directory.
    #[arg(long, conflicts_with = "dataset")]
    pub synthetic: Option<usize>,
    /// Side length of procedural images.
    #[arg(long, default_value_t = 32)]
    pub size: usize,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub source: ImageSource,
    /// Embedded clean and rendered images (CBF1) to use instead of the
    /// built-in extractor.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Image subset size.
    #[arg(long)]
    pub images: Option<usize>,
    #[arg(long, default_value = "reference")]
    pub corruptions: String,
    #[arg(long)]
    pub severities: Option<String>,
    /// Draws averaged into each corruption center.
    #[arg(long)]
    pub corruption_draws: Option<usize>,
    /// One corruption draw per image instead of every draw on every image.
    #[arg(long)]
    pub paired: bool,
    /// Powerset scheme indices, like `0,5,100-110` or `all`.
    #[arg(long, default_value = "all")]
    pub schemes: String,
    /// Draws per scheme.
    #[arg(long)]
    pub augmentation_draws: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FeatureInput {
    /// Feature files (CBF1) from one extractor.
    #[arg(long = "features", num_args = 1..)]
    pub features: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub input: FeatureInput,
    /// Samples per scheme, taken in file order.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: FeatureInput,
    /// `scheme,corruption,error` table.
    #[arg(long)]
    pub errors: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot data `scheme,corruption,msd,error`.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub input: FeatureInput,
    /// Corruption labels (`name/severity`) whose centers to use; all by default.
    #[arg(long, value_delimiter = ',')]
    pub centers: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    #[command(flatten)]
    pub rank: RankArgs,
    #[arg(long)]
    pub k: usize,
    /// `closest`, `farthest`, or `random`.
    #[arg(long, default_value = "closest")]
    pub mode: String,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub source: ImageSource,
    #[arg(long)]
    pub corruption: String,
    #[arg(long, default_value_t = 3)]
    pub severity: u8,
    /// Subset sizes to probe.
    #[arg(long, value_delimiter = ',', default_value = "25,100,400")]
    pub images: Vec<usize>,
    #[arg(long)]
    pub corruption_draws: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Powerset scheme whose first draw is the probe.
    #[arg(long, default_value_t = 511)]
    pub probe_scheme: usize,
    /// Reuse one seed for every repeat.
    #[arg(long)]
    pub force_same_seed: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: FeatureInput,
    /// Error table of the new corruptions, severities 1-10.
    #[arg(long)]
    pub errors: Option<PathBuf>,
    /// Error table of the reference benchmark.
    #[arg(long)]
    pub reference_errors: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub budget_factor: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Allowed distance of a candidate's average error from the
    /// reference, in percentage points.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Relative half-width of the accepted severity-group spread.
    #[arg(long)]
    pub spread_band: Option<f64>,
    /// Render the selected benchmark from this clean directory.
    #[arg(long)]
    pub render_from: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
    )]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Mix real feature rows instead of synthetic clusters.
    #[arg(long = "features", num_args = 1..)]
    pub features: Vec<PathBuf>,
    /// Row group of the target cluster (with `--features`).
    #[arg(long)]
    pub target: Option<String>,
    /// Row group of the other cluster (with `--features`).
    #[arg(long)]
    pub other: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parsed flags, config file, seed and registry.
pub struct Context {
    pub cfg: RunConfig,
    pub seed: Seed,
    pub registry: Registry,
}

/// Runs the command line and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            eprintln!("cbar: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = config::resolve_seed(cli.global.seed, &cfg, config::ci_mode())?;
    let jobs = cli.global.jobs.or(cfg.jobs);
    if jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let table = cli
        .global
        .severity_table
        .clone()
        .or_else(|| cfg.severity_table.clone());
    let registry = load_registry(table.as_deref())?;
    let ctx = Context {
        cfg,
        seed,
        registry,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&ctx, cli.command))
}

fn dispatch(ctx: &Context, command: Command) -> Result<()> {
    match command {
        Command::Render(a) => cmd_render(ctx, a),
        Command::Featurize(a) => cmd_featurize(ctx, a),
        Command::Msd(a) => cmd_distances(ctx, a, true),
        Command::Mmd(a) => cmd_distances(ctx, a, false),
        Command::Correlate(a) => cmd_correlate(ctx, a),
        Command::RankAugs(a) => cmd_rank(ctx, a),
        Command::Subset(a) => cmd_subset(ctx, a),
        Command::VarianceProbe(a) => cmd_probe(ctx, a),
        Command::BuildBenchmark(a) => cmd_build(ctx, a),
        Command::ToyMix(a) => cmd_toy(ctx, a),
    }
}

fn cmd_render(ctx: &Context, a: RenderArgs) -> Result<()> {
    let severities = a.severities.as_deref().map(parse_severities).transpose()?;
    let mut specs = Vec::new();
    for name in parse_corruptions(&a.corruptions)? {
        for severity in severities_for(&name, severities.as_deref())? {
            specs.push(RenderSpec::Corruption {
                name: name.clone(),
                severity,
            });
        }
    }
    for name in parse_augmentations(&a.augmentations)? {
        specs.push(RenderSpec::Augmentation { name });
    }
    let schemes = if a.schemes.trim().is_empty() {
        Vec::new()
    } else {
        parse_schemes(&a.schemes)?
    };
    if !schemes.is_empty() && a.draws == 0 {
        return Err(CliError::Config("--draws must be at least 1".into()));
    }
    for index in schemes {
        specs.extend((0..a.draws).map(|draw| RenderSpec::Scheme { index, draw }));
    }
    let dataset = existing("--dataset", a.dataset, ctx.cfg.dataset.as_ref())?;
    let out = output("--out", a.out, ctx.cfg.output.as_ref())?;
    let records = render_dataset(&dataset, &specs, &out, ctx.seed, &ctx.registry)?;
    eprintln!("rendered {} files", records.len());
    Ok(())
}

fn load_source(
    ctx: &Context,
    src: &ImageSource,
    n: Option<usize>,
    seed: Seed,
) -> Result<cbar_core::ImageSubset> {
    match src.synthetic {
        Some(count) => {
            if count == 0 || src.size == 0 {
                return Err(CliError::Config(
                    "--synthetic and --size must be at least 1".into(),
                ));
            }
            let pool = synthetic_subset(count, src.size, seed.derive("synthetic-pool", 0));
            match n {
                Some(n) => {
                    let ids = cbar_core::image::choose_subset(&pool.ids, n, seed)?;
                    let images = ids
                        .iter()
                        .map(|id| {
                            pool.images[pool.ids.iter().position(|p| p == id).unwrap()].clone()
                        })
                        .collect();
                    Ok(cbar_core::ImageSubset::new(ids, images)?)
                }
                None => Ok(pool),
            }
        }
        None => {
            let dir = existing("--dataset", src.dataset.clone(), ctx.cfg.dataset.as_ref())?;
            sample_subset(&dir, n, seed)
        }
    }
}

fn read_all(paths: &[PathBuf], cfg: &RunConfig) -> Result<FeatureFile> {
    let paths: Vec<PathBuf> = if paths.is_empty() {
        cfg.features.clone().unwrap_or_default()
    } else {
        paths.to_vec()
    };
    if paths.is_empty() {
        return Err(CliError::Config("--features is required".into()));
    }
    for p in &paths {
        if !p.exists() {
            return Err(CliError::Config(format!(
                "feature file {} does not exist",
                p.display()
            )));
        }
    }
    FeatureFile::merge(
        paths
            .iter()
            .map(|p| read_features(p))
            .collect::<Result<_>>()?,
    )
}

fn cmd_featurize(ctx: &Context, a: FeaturizeArgs) -> Result<()> {
    let out = output("--out", a.out, ctx.cfg.output.as_ref())?;
    let n = budget("--images", a.images, ctx.cfg.images, config::DEFAULT_IMAGES)?;
    let subset_seed = ctx.seed.derive("featurize-subset", 0);
    let file = if let Some(emb) = a.embeddings {
        if !emb.exists() {
            return Err(CliError::Config(format!(
                "embeddings {} do not exist",
                emb.display()
            )));
        }
        let dir = existing("--dataset", a.source.dataset, ctx.cfg.dataset.as_ref())?;
        let all = list_images(&dir)?;
        let ids = cbar_core::image::choose_subset(&all, n.min(all.len()), subset_seed)?;
        featurize_embedded(&read_features(&emb)?, &ids)?
    } else {
        let extractor = ctx.cfg.extractor()?;
        let severities = a.severities.as_deref().map(parse_severities).transpose()?;
        let mut centers = Vec::new();
        for name in parse_corruptions(&a.corruptions)? {
            for s in severities_for(&name, severities.as_deref())? {
                centers.push((name.clone(), s));
            }
        }
        let schemes = if a.schemes.trim().is_empty() {
            Vec::new()
        } else {
            parse_schemes(&a.schemes)?
        };
        let plan = FeaturizePlan {
            centers,
            corruption_draws: budget(
                "--corruption-draws",
                a.corruption_draws,
                ctx.cfg.corruption_draws,
                config::DEFAULT_CORRUPTION_DRAWS,
            )?,
            paired: a.paired,
            schemes,
            augmentation_draws: budget(
                "--augmentation-draws",
                a.augmentation_draws,
                ctx.cfg.augmentation_draws,
                config::DEFAULT_AUGMENTATION_DRAWS,
            )?,
            seed: ctx.seed,
        };
        let subset = load_source(ctx, &a.source, Some(n), subset_seed)?;
        featurize_plan(&extractor, &ctx.registry, &subset, &plan)?
    };
    write_features(&out, &file)?;
    eprintln!("wrote {} feature rows of dim {}", file.rows.len(), file.dim);
    Ok(())
}

fn cmd_distances(ctx: &Context, a: DistanceArgs, msd: bool) -> Result<()> {
    let file = read_all(&a.input.features, &ctx.cfg)?;
    let b = budget(
        "--budget",
        a.budget,
        ctx.cfg.msd_budget,
        config::DEFAULT_MSD_BUDGET,
    )?;
    let rows = distance_table(&split(&file), b)?;
    if msd {
        let mut w = TableWriter::create(
            a.out.as_deref(),
            &["scheme", "corruption", "msd", "nearest", "samples"],
        )?;
        for r in rows {
            w.row([
                r.scheme,
                r.corruption,
                num(r.msd),
                r.nearest,
                r.samples.to_string(),
            ])?;
        }
        w.finish()
    } else {
        let mut w = TableWriter::create(
            a.out.as_deref(),
            &["scheme", "corruption", "mmd", "samples"],
        )?;
        for r in rows {
            w.row([r.scheme, r.corruption, num(r.mmd), r.samples.to_string()])?;
        }
        w.finish()
    }
}

fn cmd_correlate(ctx: &Context, a: CorrelateArgs) -> Result<()> {
    let file = read_all(&a.input.features, &ctx.cfg)?;
    let errors_path = existing("--errors", a.errors, ctx.cfg.errors.as_ref())?;
    let errors = read_scheme_errors(&errors_path)?;
    let b = budget(
        "--budget",
        a.budget,
        ctx.cfg.msd_budget,
        config::DEFAULT_MSD_BUDGET,
    )?;
    let points = join_errors(&distance_table(&split(&file), b)?, &errors)?;
    if let Some(p) = &a.points {
        let mut w = TableWriter::create(Some(p), &["scheme", "corruption", "msd", "error"])?;
        for (s, c, d, e) in &points {
            w.row([s.clone(), c.clone(), num(*d), num(*e)])?;
        }
        w.finish()?;
    }
    let mut w = TableWriter::create(
        a.out.as_deref(),
        &[
            "corruption",
            "schemes",
            "mean_msd",
            "mean_error",
            "spearman",
        ],
    )?;
    for r in correlate(&points) {
        w.row([
            r.corruption,
            r.schemes.to_string(),
            num(r.mean_msd),
            num(r.mean_error),
            num(r.spearman),
        ])?;
    }
    w.finish()
}

fn ranked(ctx: &Context, a: &RankArgs) -> Result<Vec<crate::measure::RankedAugmentation>> {
    let file = read_all(&a.input.features, &ctx.cfg)?;
    rank_rows(&split(&file), a.centers.as_deref())
}

fn write_ranked(out: Option<&Path>, rows: &[crate::measure::RankedAugmentation]) -> Result<()> {
    let mut w = TableWriter::create(out, &["rank", "id", "nearest", "distance"])?;
    for r in rows {
        w.row([
            r.rank.to_string(),
            r.id.clone(),
            r.nearest.clone(),
            num(r.distance),
        ])?;
    }
    w.finish()
}

fn cmd_rank(ctx: &Context, a: RankArgs) -> Result<()> {
    let rows = ranked(ctx, &a)?;
    write_ranked(a.out.as_deref(), &rows)
}

fn cmd_subset(ctx: &Context, a: SubsetArgs) -> Result<()> {
    let mode: SelectMode = a
        .mode
        .parse()
        .map_err(|e: cbar_core::Error| CliError::Config(e.to_string()))?;
    let rows = ranked(ctx, &a.rank)?;
    let chosen = choose(&rows, a.k, mode, ctx.seed.derive("subset", 0))?;
    write_ranked(a.rank.out.as_deref(), &chosen)
}

fn cmd_probe(ctx: &Context, a: ProbeArgs) -> Result<()> {
    if a.images.is_empty() || a.images.contains(&0) {
        return Err(CliError::Config("--images sizes must be at least 1".into()));
    }
    if a.probe_scheme >= 512 {
        return Err(CliError::Config("--probe-scheme must be below 512".into()));
    }
    let draws = budget(
        "--corruption-draws",
        a.corruption_draws,
        ctx.cfg.corruption_draws,
        config::DEFAULT_CORRUPTION_DRAWS,
    )?;
    severities_for(&a.corruption, Some(&[a.severity]))?;
    let extractor = ctx.cfg.extractor()?;
    let pool = load_source(ctx, &a.source, None, ctx.seed.derive("probe-pool", 0))?;
    let probe = sample_augmentation(
        &AugmentationScheme::from_powerset_index(a.probe_scheme),
        ctx.seed.derive("probe", 0),
    )?;
    let mut w = TableWriter::create(
        a.out.as_deref(),
        &["images", "repeats", "mean_distance", "std_percent"],
    )?;
    for &n in &a.images {
        let cfg = ProbeConfig {
            corruption: a.corruption.clone(),
            severity: a.severity,
            n_images: n,
            n_corruptions: draws,
            repeats: a.repeats,
            seed: ctx.seed.derive("probe-size", n as u64),
            force_same_seed: a.force_same_seed,
        };
        let d = probe_distances(&extractor, &ctx.registry, &probe, &pool, &cfg)?;
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let rel = relative_std_percent(&d).unwrap_or(f64::NAN);
        w.row([n.to_string(), a.repeats.to_string(), num(mean), num(rel)])?;
    }
    w.finish()
}

fn cmd_build(ctx: &Context, a: BuildArgs) -> Result<()> {
    let file = read_all(&a.input.features, &ctx.cfg)?;
    let errors = read_error_table(&existing("--errors", a.errors, ctx.cfg.errors.as_ref())?)?;
    let reference = read_error_table(&existing(
        "--reference-errors",
        a.reference_errors,
        ctx.cfg.reference_errors.as_ref(),
    )?)?;
    let render_from = a
        .render_from
        .map(|p| existing("--render-from", Some(p), None))
        .transpose()?;
    let out = output("--out", a.out, ctx.cfg.output.as_ref())?;
    let mut cfg = BuildConfig::from_reference(&reference, ctx.seed)?;
    cfg.n_candidates = budget(
        "--candidates",
        a.candidates,
        ctx.cfg.candidates,
        config::DEFAULT_CANDIDATES,
    )?;
    cfg.budget_factor = budget(
        "--budget-factor",
        a.budget_factor,
        ctx.cfg.budget_factor,
        config::DEFAULT_BUDGET_FACTOR,
    )?;
    cfg.repeats = budget(
        "--repeats",
        a.repeats,
        ctx.cfg.repeats,
        config::DEFAULT_REPEATS,
    )?;
    cfg.tolerance = nonneg(
        "--tolerance",
        a.tolerance,
        ctx.cfg.tolerance,
        config::DEFAULT_TOLERANCE,
    )?;
    cfg.spread_band = nonneg(
        "--spread-band",
        a.spread_band,
        ctx.cfg.spread_band,
        config::DEFAULT_SPREAD_BAND,
    )?;
    let outcome = run_build(&file, &errors, &reference, &cfg)?;
    for (r, run) in outcome.runs.iter().enumerate() {
        if run.shortfall() > 0 {
            eprintln!(
                "run {r}: found {} of {} candidates in {} attempts",
                run.candidates.len(),
                run.requested,
                run.attempts
            );
        }
    }
    write_outcome(&out, &outcome, &errors)?;
    if let Some(dir) = render_from {
        let records =
            render_selected(&dir, &out.join("render"), &outcome, ctx.seed, &ctx.registry)?;
        eprintln!("rendered {} files", records.len());
    }
    eprintln!(
        "selected {} (average error {:.3}, distance {:.6})",
        outcome.selected.corruptions().join(","),
        outcome.selected.avg_error,
        outcome.selected_distance
    );
    Ok(())
}

fn cmd_toy(ctx: &Context, a: ToyArgs) -> Result<()> {
    if a.samples == 0 {
        return Err(CliError::Config("--samples must be at least 1".into()));
    }
    if let Some(x) = a.alphas.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(CliError::Config(format!("alpha {x} outside [0, 1]")));
    }
    let (rows, analytic): (Vec<ToyMixRow>, Vec<f64>) = if a.features.is_empty() {
        if a.dim == 0 || !(a.separation.is_finite() && a.sigma.is_finite() && a.sigma >= 0.0) {
            return Err(CliError::Config("bad cluster geometry".into()));
        }
        let clusters = ToyClusters {
            dim: a.dim,
            separation: a.separation,
            sigma: a.sigma,
        };
        let rows = toy_mix_sweep(&clusters, &a.alphas, a.samples, ctx.seed);
        let analytic = a.alphas.iter().map(|&x| clusters.analytic_mmd(x)).collect();
        (rows, analytic)
    } else {
        let file = read_all(&a.features, &ctx.cfg)?;
        let (t, o) = match (&a.target, &a.other) {
            (Some(t), Some(o)) => (t, o),
            _ => {
                return Err(CliError::Config(
                    "--target and --other are required with --features".into(),
                ))
            }
        };
        let group = |g: &str| -> Result<SampleSet> {
            let feats: Vec<_> = file
                .rows
                .iter()
                .filter(|(id, _)| crate::featurize::group_of(id) == g)
                .map(|(_, v)| v.clone())
                .collect();
            if feats.is_empty() {
                return Err(CliError::Data(format!("no rows in group `{g}`")));
            }
            Ok(SampleSet::new(file.fingerprint, feats)?)
        };
        let (rows, gap) = real_mix_sweep(&group(t)?, &group(o)?, &a.alphas, a.samples, ctx.seed)?;
        let analytic = a.alphas.iter().map(|&x| (1.0 - x) * gap).collect();
        (rows, analytic)
    };
    let mut w = TableWriter::create(a.out.as_deref(), &["alpha", "mmd", "msd", "analytic_mmd"])?;
    for (r, an) in rows.iter().zip(&analytic) {
        w.row([num(r.alpha), num(r.mmd), num(r.msd), num(*an)])?;
    }
    w.finish()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mmd).collect();
    if let (Ok((i, s)), Ok(r2)) = (linear_fit(&xs, &ys), r_squared(&ys, &analytic)) {
        eprintln!("mmd fit: intercept {i:.6}, slope {s:.6}; r2 against analytic {r2:.6}");
    }
    Ok(())
}
