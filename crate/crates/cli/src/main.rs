//! `compsplit`: generate, calibrate, and verify compositional-generalization
//! splits over factor-annotated datasets, and run the supporting numerics
//! (similarity ladder, FPE kernels, gradient-invariance checks, parameter
//! overhead accounting).
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use compsplit_core::ain::{grad_invariance_check, AinNet, Blueprint, NetDims, ParamDescriptor};
use compsplit_core::assets;
use compsplit_core::dataset::{synth_grid, validate_dataset, DatasetTable};
use compsplit_core::factor::FactorSpace;
use compsplit_core::fpe::{fit_gaussian, kernel_profile, BasePhasor};
use compsplit_core::ladder::{ladder_similarity, LadderMode, LadderParams};
use compsplit_core::orthotopic::{
    calibrate_thresholds, id_holdout_split, orthotopic_split, ExclusionInterval, ExclusionSpec,
    SplitResult, SubspaceSelection,
};
use compsplit_core::pairwise::{pairwise_split, pairwise_suite, solve_pair_thresholds};
use compsplit_core::verify::{
    attribute_accuracies, check_compliance, exact_match, run_count, split_stats, wio,
};

mod emit;

use emit::{write_csv, write_json, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "compsplit",
    version,
    about = "Compositional-generalization split toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a schema and dataset, validate them, and report coverage.
    Ingest(IngestArgs),
    /// Generate a synthetic full-grid dataset CSV for a schema.
    Synth(SynthArgs),
    /// Calibrate the fractional exclusion size against a train fraction.
    Calibrate(CalibrateArgs),
    /// Generate a train/test split.
    #[command(subcommand)]
    Split(SplitCommand),
    /// Check a split against the compositional-generalization definition.
    Verify(VerifyArgs),
    /// Recompute split statistics from a split file.
    Stats(StatsArgs),
    /// Training-run accounting for the evaluation strategies.
    Runcount(RuncountArgs),
    /// Similarity-ladder simulation over c.
    Ladder(LadderArgs),
    /// FPE kernel profile and Gaussian fit.
    FpeKernel(FpeKernelArgs),
    /// Certify gradient invariances of an attribute-invariant network.
    AinGradcheck(AinGradcheckArgs),
    /// Parameter totals and overhead of the three blueprints over a P range.
    ParamOverhead(ParamOverheadArgs),
    /// Evaluation metrics: exact match, per-attribute accuracy, WIO.
    Metrics(MetricsArgs),
}

#[derive(Debug, Subcommand)]
enum SplitCommand {
    /// Orthotopic split at compositional similarity index c.
    Orthotopic(OrthotopicArgs),
    /// One split per task-relevant factor pair with solved thresholds.
    Pairwise(PairwiseArgs),
    /// Seeded in-distribution id holdout.
    Holdout(HoldoutArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Schema JSON path, or the name of a built-in schema.
    #[arg(long)]
    schema: String,
    /// Dataset CSV path.
    #[arg(long)]
    data: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    schema: String,
    /// Samples per assignment.
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Echoed into provenance; grid content is seed-independent.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    data: PathBuf,
    /// Compositional similarity index.
    #[arg(long)]
    c: usize,
    /// Target train fraction in (0, 1).
    #[arg(long)]
    target_train: f64,
    /// Acceptable |achieved - target| before the result is flagged.
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OrthotopicArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    data: PathBuf,
    /// Compositional similarity index; c = I gives the in-distribution holdout.
    #[arg(long)]
    c: usize,
    /// Fractional exclusion size in [0, 1].
    #[arg(long, conflicts_with = "thresholds")]
    v: Option<f64>,
    /// Per-factor interval starts (with --v), comma-separated.
    #[arg(long, value_delimiter = ',', requires = "v")]
    position: Option<Vec<usize>>,
    /// `table13` for the shipped per-dataset thresholds (keyed by schema
    /// name), or a path to an interval-list JSON.
    #[arg(long)]
    thresholds: Option<String>,
    /// Subspace selection: all, first-n, random-n.
    #[arg(long, default_value = "all")]
    selection: String,
    /// Number of subspaces for first-n / random-n.
    #[arg(long)]
    n_orthotopes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PairwiseArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    data: PathBuf,
    /// Target excluded fraction per pair.
    #[arg(long, default_value_t = 0.10)]
    target_fraction: f64,
    /// Weight of the exclusion-imbalance penalty.
    #[arg(long, default_value_t = 1.0)]
    balance_weight: f64,
    /// Restrict to one pair, e.g. `0,2` (default: the full suite).
    #[arg(long, value_delimiter = ',')]
    pair: Option<Vec<usize>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct HoldoutArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    data: PathBuf,
    /// Test fraction in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    target_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    data: PathBuf,
    /// Split JSON produced by `split`.
    #[arg(long)]
    split: PathBuf,
    /// c to check against (lower kappa bound).
    #[arg(long)]
    c: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    schema: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RuncountArgs {
    /// Number of task-relevant factors.
    #[arg(long)]
    i: usize,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LadderArgs {
    /// Number of attributes.
    #[arg(long, default_value_t = 6)]
    i: usize,
    /// Values per attribute.
    #[arg(long, default_value_t = 8)]
    cardinality: usize,
    /// Per-attribute code dimension.
    #[arg(long, default_value_t = 2048)]
    dim: usize,
    /// Holistic chunk dimension (holistic mode).
    #[arg(long, default_value_t = 1024)]
    holistic_dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// concat, superpose, or holistic.
    #[arg(long, default_value = "concat")]
    mode: String,
    /// Number of attributes fused by the holistic chunk.
    #[arg(long, default_value_t = 2)]
    holistic_n: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FpeKernelArgs {
    #[arg(long, default_value_t = 1024)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    phase_std: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Kernel sampled on [-delta-max, delta-max].
    #[arg(long, default_value_t = 5.0)]
    delta_max: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_step: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AinGradcheckArgs {
    #[arg(long, default_value_t = 8)]
    input_dim: usize,
    #[arg(long, default_value_t = 4)]
    encoded_dim: usize,
    #[arg(long, default_value_t = 16)]
    hidden_dim: usize,
    #[arg(long, default_value_t = 4)]
    compressed_dim: usize,
    /// Classes per attribute, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "3,3,3")]
    classes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// ain, monolithic, or ed.
    #[arg(long, default_value = "ain")]
    blueprint: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ParamOverheadArgs {
    #[arg(long)]
    encoder_params: u64,
    #[arg(long)]
    meta_params: u64,
    #[arg(long)]
    head_params: u64,
    #[arg(long, default_value_t = 2)]
    p_min: u64,
    #[arg(long, default_value_t = 8)]
    p_max: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Predictions CSV (same format as a dataset over task-relevant factors).
    #[arg(long, requires = "labels")]
    predictions: Option<PathBuf>,
    /// Labels CSV.
    #[arg(long, requires = "predictions")]
    labels: Option<PathBuf>,
    /// In-distribution validation accuracy (percent) for the WIO score.
    #[arg(long, requires = "val_ood")]
    val_id: Option<f64>,
    /// Out-of-distribution validation accuracy (percent).
    #[arg(long, requires = "val_id")]
    val_ood: Option<f64>,
    /// WIO weighting; larger values damp the OOD term.
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let run = RunConfig::capture();
    match dispatch(cli.command, run) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command, run: RunConfig) -> Result<u8> {
    match command {
        Command::Ingest(args) => cmd_ingest(args, run),
        Command::Synth(args) => cmd_synth(args, run),
        Command::Calibrate(args) => cmd_calibrate(args, run),
        Command::Split(SplitCommand::Orthotopic(args)) => cmd_split_orthotopic(args, run),
        Command::Split(SplitCommand::Pairwise(args)) => cmd_split_pairwise(args, run),
        Command::Split(SplitCommand::Holdout(args)) => cmd_split_holdout(args, run),
        Command::Verify(args) => cmd_verify(args, run),
        Command::Stats(args) => cmd_stats(args, run),
        Command::Runcount(args) => cmd_runcount(args, run),
        Command::Ladder(args) => cmd_ladder(args, run),
        Command::FpeKernel(args) => cmd_fpe_kernel(args, run),
        Command::AinGradcheck(args) => cmd_ain_gradcheck(args, run),
        Command::ParamOverhead(args) => cmd_param_overhead(args, run),
        Command::Metrics(args) => cmd_metrics(args, run),
    }
}

/// Resolve `--schema`: an existing file wins, otherwise a built-in name
/// (with or without a .json suffix).
fn load_schema(value: &str) -> Result<(FactorSpace, String)> {
    let path = Path::new(value);
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(value)
        .to_ascii_lowercase();
    if path.exists() {
        let space = FactorSpace::load(path).with_context(|| format!("loading schema `{value}`"))?;
        return Ok((space, stem));
    }
    let space = assets::builtin_space(&stem).with_context(|| {
        format!(
            "schema `{value}`: not a file and not a built-in name (built-ins: {})",
            assets::builtin_schema_names().join(", ")
        )
    })?;
    Ok((space, stem))
}

fn load_table(data: &Path, space: &FactorSpace) -> Result<DatasetTable> {
    DatasetTable::load(data, space).with_context(|| format!("loading dataset `{}`", data.display()))
}

#[derive(Serialize)]
struct IngestOutput<'a> {
    run_config: &'a RunConfig,
    schema: String,
    report: compsplit_core::dataset::ValidationReport,
}

fn cmd_ingest(args: IngestArgs, run: RunConfig) -> Result<u8> {
    let (space, name) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let report = validate_dataset(&table);
    println!(
        "{} rows, {} distinct assignments, sparsity {:.4}, coverage {}",
        report.rows,
        report.distinct_assignments,
        report.sparsity,
        if report.coverage_complete {
            "complete"
        } else {
            "incomplete"
        }
    );
    write_json(
        &args.out,
        "validation.json",
        &IngestOutput {
            run_config: &run,
            schema: name,
            report,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct SynthOutput<'a> {
    run_config: &'a RunConfig,
    schema: String,
    replicas: usize,
    seed: u64,
    rows: usize,
    grid_csv: String,
}

fn cmd_synth(args: SynthArgs, run: RunConfig) -> Result<u8> {
    let (space, name) = load_schema(&args.schema)?;
    let table = synth_grid(&space, args.replicas, args.seed)?;
    write_csv(&args.out, "grid.csv", &table.to_csv())?;
    println!(
        "wrote {} rows to {}",
        table.len(),
        args.out.join("grid.csv").display()
    );
    write_json(
        &args.out,
        "synth.json",
        &SynthOutput {
            run_config: &run,
            schema: name,
            replicas: args.replicas,
            seed: args.seed,
            rows: table.len(),
            grid_csv: "grid.csv".into(),
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct CalibrateOutput<'a> {
    run_config: &'a RunConfig,
    outcome: compsplit_core::orthotopic::CalibrationOutcome,
}

fn cmd_calibrate(args: CalibrateArgs, run: RunConfig) -> Result<u8> {
    let (space, _) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let outcome = calibrate_thresholds(&table, args.c, args.target_train, args.tolerance)?;
    println!(
        "achieved train fraction {:.6} (target {:.6}){}",
        outcome.achieved_train_fraction,
        outcome.target_train_fraction,
        if outcome.within_tolerance {
            ""
        } else {
            " [off target]"
        }
    );
    write_json(
        &args.out,
        "calibration.json",
        &CalibrateOutput {
            run_config: &run,
            outcome,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct SplitOutput<'a> {
    run_config: &'a RunConfig,
    #[serde(flatten)]
    split: &'a SplitResult,
}

#[derive(Serialize)]
struct StatsOutput<'a> {
    run_config: &'a RunConfig,
    stats: &'a compsplit_core::verify::SplitStats,
}

fn write_split(out: &Path, name: &str, split: &SplitResult, run: &RunConfig) -> Result<()> {
    write_json(
        out,
        name,
        &SplitOutput {
            run_config: run,
            split,
        },
    )
}

fn selection_from_args(args: &OrthotopicArgs) -> Result<SubspaceSelection> {
    Ok(match args.selection.as_str() {
        "all" => SubspaceSelection::All,
        "first-n" => {
            let n = args
                .n_orthotopes
                .context("--selection first-n requires --n-orthotopes")?;
            SubspaceSelection::FirstN { n }
        }
        "random-n" => {
            let n = args
                .n_orthotopes
                .context("--selection random-n requires --n-orthotopes")?;
            SubspaceSelection::RandomN { n, seed: args.seed }
        }
        other => bail!("unknown selection `{other}` (use all, first-n, random-n)"),
    })
}

fn exclusion_from_args(
    args: &OrthotopicArgs,
    space: &FactorSpace,
    dataset: &str,
) -> Result<ExclusionSpec> {
    match (&args.thresholds, args.v) {
        (Some(source), None) => {
            if source == "table13" {
                Ok(assets::threshold_spec(dataset, args.c, space)?)
            } else {
                let text = std::fs::read_to_string(source)
                    .with_context(|| format!("reading thresholds `{source}`"))?;
                let intervals: Vec<ExclusionInterval> = serde_json::from_str(&text)
                    .context("thresholds file must be a JSON array of intervals")?;
                Ok(ExclusionSpec::Explicit { intervals })
            }
        }
        (None, Some(v)) => Ok(ExclusionSpec::Fractional {
            v,
            position_offsets: args.position.clone(),
        }),
        (None, None) => Ok(ExclusionSpec::corner(0.0)),
        (Some(_), Some(_)) => bail!("--v and --thresholds are mutually exclusive"),
    }
}

fn cmd_split_orthotopic(args: OrthotopicArgs, run: RunConfig) -> Result<u8> {
    let (space, dataset) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let split = if args.c == space.num_task_relevant() {
        id_holdout_split(&table, 0.1, args.seed)?
    } else {
        let spec = exclusion_from_args(&args, &space, &dataset)?;
        let selection = selection_from_args(&args)?;
        orthotopic_split(&table, args.c, &spec, &selection)?
    };
    println!(
        "train {} / test {} (train fraction {:.6})",
        split.stats.train_rows, split.stats.test_rows, split.stats.train_fraction
    );
    write_split(&args.out, "split.json", &split, &run)?;
    write_json(
        &args.out,
        "stats.json",
        &StatsOutput {
            run_config: &run,
            stats: &split.stats,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct PairIndexEntry {
    pair: (usize, usize),
    factors: (String, String),
    excluded: (usize, usize),
    achieved_fraction: f64,
    train_rows: usize,
    test_rows: usize,
    split_file: String,
}

#[derive(Serialize)]
struct PairIndexOutput<'a> {
    run_config: &'a RunConfig,
    target_fraction: f64,
    balance_weight: f64,
    pairs: Vec<PairIndexEntry>,
}

fn cmd_split_pairwise(args: PairwiseArgs, run: RunConfig) -> Result<u8> {
    let (space, _) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let splits = match &args.pair {
        Some(p) => {
            if p.len() != 2 {
                bail!("--pair takes exactly two factor indices");
            }
            let pair = (p[0], p[1]);
            let thresholds =
                solve_pair_thresholds(&space, pair, args.target_fraction, args.balance_weight)?;
            vec![pairwise_split(&table, pair, &thresholds)?]
        }
        None => pairwise_suite(&table, args.target_fraction, args.balance_weight)?,
    };
    let mut entries = Vec::with_capacity(splits.len());
    for split in &splits {
        let t = split
            .config
            .pair
            .as_ref()
            .expect("pairwise split carries thresholds");
        let file = format!("split_pair_{}_{}.json", t.pair.0, t.pair.1);
        write_split(&args.out, &file, split, &run)?;
        entries.push(PairIndexEntry {
            pair: t.pair,
            factors: (
                space.factor(t.pair.0).name.clone(),
                space.factor(t.pair.1).name.clone(),
            ),
            excluded: t.excluded,
            achieved_fraction: t.achieved_fraction,
            train_rows: split.stats.train_rows,
            test_rows: split.stats.test_rows,
            split_file: file,
        });
        println!(
            "pair ({}, {}): excluded ({}, {}), achieved {:.4}",
            t.pair.0, t.pair.1, t.excluded.0, t.excluded.1, t.achieved_fraction
        );
    }
    write_json(
        &args.out,
        "pairs_index.json",
        &PairIndexOutput {
            run_config: &run,
            target_fraction: args.target_fraction,
            balance_weight: args.balance_weight,
            pairs: entries,
        },
    )?;
    Ok(0)
}

fn cmd_split_holdout(args: HoldoutArgs, run: RunConfig) -> Result<u8> {
    let (space, _) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let split = id_holdout_split(&table, args.target_fraction, args.seed)?;
    println!(
        "train {} / test {} ({})",
        split.stats.train_rows,
        split.stats.test_rows,
        if split.config.holdout.as_ref().is_some_and(|h| h.stratified) {
            "stratified"
        } else {
            "plain uniform"
        }
    );
    write_split(&args.out, "split.json", &split, &run)?;
    write_json(
        &args.out,
        "stats.json",
        &StatsOutput {
            run_config: &run,
            stats: &split.stats,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    run_config: &'a RunConfig,
    report: compsplit_core::verify::ComplianceReport,
}

fn cmd_verify(args: VerifyArgs, run: RunConfig) -> Result<u8> {
    let (space, _) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let split = SplitResult::load(&args.split)
        .with_context(|| format!("loading split `{}`", args.split.display()))?;
    let report = check_compliance(&split, &table, args.c)?;
    let satisfied = report.satisfied;
    println!(
        "c = {}: {} ({} distinct test assignments, kappa {:?}..{:?}, method {})",
        report.c,
        if satisfied { "satisfied" } else { "VIOLATED" },
        report.distinct_test_assignments,
        report.kappa.min_kappa,
        report.kappa.max_kappa,
        report.method,
    );
    for v in report.violations.iter().take(10) {
        println!(
            "  violation: assignment {:?} kappa {} ({} bound)",
            v.assignment, v.kappa, v.bound
        );
    }
    if report.violations.len() > 10 {
        println!("  ... and {} more", report.violations.len() - 10);
    }
    write_json(
        &args.out,
        "verify.json",
        &VerifyOutput {
            run_config: &run,
            report,
        },
    )?;
    Ok(if satisfied { 0 } else { 2 })
}

fn cmd_stats(args: StatsArgs, run: RunConfig) -> Result<u8> {
    let (space, _) = load_schema(&args.schema)?;
    let table = load_table(&args.data, &space)?;
    let split = SplitResult::load(&args.split)?;
    let stats = split_stats(&split, &table)?;
    println!(
        "train fraction {:.6}, test fraction {:.6}",
        stats.train_fraction, stats.test_fraction
    );
    write_json(
        &args.out,
        "stats.json",
        &StatsOutput {
            run_config: &run,
            stats: &stats,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct RuncountOutput<'a> {
    run_config: &'a RunConfig,
    counts: compsplit_core::verify::RunCount,
}

fn cmd_runcount(args: RuncountArgs, run: RunConfig) -> Result<u8> {
    let counts = run_count(args.i, args.c)?;
    println!(
        "I = {}, c = {}: orthotopic {}, pairwise {}, per-subspace {}",
        counts.i, counts.c, counts.orthotopic, counts.pairwise, counts.per_subspace
    );
    write_json(
        &args.out,
        "runcount.json",
        &RuncountOutput {
            run_config: &run,
            counts,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct LadderOutput<'a> {
    run_config: &'a RunConfig,
    params: LadderParams,
    curve: compsplit_core::ladder::LadderCurve,
}

fn cmd_ladder(args: LadderArgs, run: RunConfig) -> Result<u8> {
    let mode = match args.mode.as_str() {
        "concat" => LadderMode::Concat,
        "superpose" => LadderMode::Superpose,
        "holistic" => LadderMode::Holistic { n: args.holistic_n },
        other => bail!("unknown mode `{other}` (use concat, superpose, holistic)"),
    };
    let params = LadderParams {
        attributes: args.i,
        cardinality: args.cardinality,
        c_values: None,
        mode,
        dim: args.dim,
        holistic_dim: args.holistic_dim,
        trials: args.trials,
        seed: args.seed,
    };
    let curve = ladder_similarity(&params)?;
    for p in &curve.points {
        println!("c = {}: mean {:.6} (se {:.6})", p.c, p.mean, p.se);
    }
    write_csv(&args.out, "ladder.csv", &curve.to_csv())?;
    write_json(
        &args.out,
        "ladder.json",
        &LadderOutput {
            run_config: &run,
            params,
            curve,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct FpeKernelOutput<'a> {
    run_config: &'a RunConfig,
    dim: usize,
    phase_std: f64,
    alpha: f64,
    seed: u64,
    fit: compsplit_core::fpe::GaussianFit,
}

fn cmd_fpe_kernel(args: FpeKernelArgs, run: RunConfig) -> Result<u8> {
    if args.delta_step <= 0.0
        || args.delta_max <= 0.0
        || args.delta_step.is_nan()
        || args.delta_max.is_nan()
    {
        bail!("--delta-max and --delta-step must be positive");
    }
    let base = BasePhasor::sample(args.dim, args.phase_std, args.seed)?;
    let steps = (args.delta_max / args.delta_step).round() as i64;
    let deltas: Vec<f64> = (-steps..=steps)
        .map(|i| i as f64 * args.delta_step)
        .collect();
    let curve = kernel_profile(&base, args.alpha, &deltas);
    let fit = fit_gaussian(&curve)?;
    println!(
        "kernel over {} offsets: fitted sigma {:.6}, r^2 {:.6}",
        curve.deltas.len(),
        fit.sigma,
        fit.r_squared
    );
    write_csv(&args.out, "kernel.csv", &curve.to_csv())?;
    write_json(
        &args.out,
        "kernel_fit.json",
        &FpeKernelOutput {
            run_config: &run,
            dim: args.dim,
            phase_std: args.phase_std,
            alpha: args.alpha,
            seed: args.seed,
            fit,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct GradcheckOutput<'a> {
    run_config: &'a RunConfig,
    dims: NetDims,
    report: compsplit_core::ain::GradReport,
}

fn cmd_ain_gradcheck(args: AinGradcheckArgs, run: RunConfig) -> Result<u8> {
    let blueprint = match args.blueprint.as_str() {
        "ain" => Blueprint::Ain,
        "monolithic" => Blueprint::Monolithic,
        "ed" => Blueprint::Ed,
        other => bail!("unknown blueprint `{other}` (use ain, monolithic, ed)"),
    };
    let dims = NetDims {
        input: args.input_dim,
        encoded: args.encoded_dim,
        hidden: args.hidden_dim,
        compressed: args.compressed_dim,
        classes: args.classes.clone(),
    };
    let net = AinNet::init_with_blueprint(dims.clone(), blueprint, args.seed)?;
    let report = grad_invariance_check(&net, args.trials, args.seed)?;
    let pass = report.pass;
    println!(
        "{:?}: cross-zero {}, min own norm {:.3e}, fd max rel err {:.3e} -> {}",
        blueprint,
        report.cross_zero,
        report.min_own_norm,
        report.fd_max_rel_error,
        if pass { "PASS" } else { "FAIL" }
    );
    write_json(
        &args.out,
        "gradcheck.json",
        &GradcheckOutput {
            run_config: &run,
            dims,
            report,
        },
    )?;
    Ok(if pass { 0 } else { 2 })
}

#[derive(Serialize)]
struct OverheadOutput<'a> {
    run_config: &'a RunConfig,
    rows: Vec<compsplit_core::ain::OverheadReport>,
}

fn cmd_param_overhead(args: ParamOverheadArgs, run: RunConfig) -> Result<u8> {
    if args.p_min < 1 || args.p_min > args.p_max {
        bail!("need 1 <= p-min <= p-max");
    }
    let mut rows = Vec::new();
    let mut csv = String::from("p,monolithic,ain,ed,ain_overhead,ed_overhead\n");
    for p in args.p_min..=args.p_max {
        let report = compsplit_core::ain::param_overhead(&ParamDescriptor {
            encoder: args.encoder_params,
            meta: args.meta_params,
            head: args.head_params,
            attributes: p,
        })?;
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p, report.monolithic, report.ain, report.ed, report.ain_overhead, report.ed_overhead
        ));
        println!(
            "P = {}: monolithic {}, ain {} (+{:.2}%), ed {} (+{:.1}%)",
            p,
            report.monolithic,
            report.ain,
            report.ain_overhead * 100.0,
            report.ed,
            report.ed_overhead * 100.0
        );
        rows.push(report);
    }
    write_csv(&args.out, "overhead.csv", &csv)?;
    write_json(
        &args.out,
        "overhead.json",
        &OverheadOutput {
            run_config: &run,
            rows,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct MetricsOutput<'a> {
    run_config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_match: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attribute_accuracies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wio: Option<f64>,
}

/// Read a prediction/label CSV: `sample_id,<name>,...` with integer cells;
/// returns rows in file order.
fn load_tuples(path: &Path) -> Result<Vec<Vec<u16>>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let _header = lines.next().context("empty CSV")?;
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let mut row = Vec::with_capacity(cells.len().saturating_sub(1));
        for cell in &cells[1..] {
            row.push(
                cell.trim()
                    .parse::<u16>()
                    .with_context(|| format!("bad cell `{cell}`"))?,
            );
        }
        rows.push(row);
    }
    Ok(rows)
}

fn cmd_metrics(args: MetricsArgs, run: RunConfig) -> Result<u8> {
    let mut em = None;
    let mut accs = None;
    if let (Some(p), Some(l)) = (&args.predictions, &args.labels) {
        let preds = load_tuples(p)?;
        let labels = load_tuples(l)?;
        em = Some(exact_match(&preds, &labels)?);
        accs = Some(attribute_accuracies(&preds, &labels)?);
        println!("exact match {:.6}", em.unwrap());
    }
    let mut wio_value = None;
    if let (Some(id), Some(ood)) = (args.val_id, args.val_ood) {
        let w = wio(id, ood, args.lambda)?;
        wio_value = Some(w);
        println!("wio {:.6}", w);
    }
    if em.is_none() && wio_value.is_none() {
        bail!("nothing to compute: pass --predictions/--labels and/or --val-id/--val-ood");
    }
    write_json(
        &args.out,
        "metrics.json",
        &MetricsOutput {
            run_config: &run,
            exact_match: em,
            attribute_accuracies: accs,
            wio: wio_value,
        },
    )?;
    Ok(0)
}
