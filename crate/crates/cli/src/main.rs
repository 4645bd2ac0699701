//! Batch front end for the affine phase retrieval library.
//!
//! Subcommands build ensembles, push signals through the forward map,
//! recover them back, and audit injectivity. Artifacts cross the process
//! boundary as the library's JSON documents, so the output of one
//! subcommand feeds directly into the next.
//!
//! Exit codes: 0 on success; 1 when a requested property fails to hold
//! (recovery stalls, an `--expect` is violated, a certificate is rejected,
//! no collision turns up); 2 for usage, file, or parse errors.

mod experiments;

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affine_pr::json::{
    certificate_from_json, certificate_to_json, ensemble_from_json, ensemble_to_json,
    measurements_from_json, measurements_to_json, report_to_json, signal_from_json,
    signal_to_json, witness_from_json, witness_to_json,
};
use affine_pr::{
    certificate_from_collision, collision_from_certificate, injectivity_report, lsq_recover,
    measure, perturbed_ensemble, random_ensemble, tight_ensemble, tight_recover, verify_certificate,
    witness_scale, CollisionWitness, Ensemble, FieldTag, LsqOptions, SearchOptions, Verdict,
};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use experiments::{
    rows_to_csv, rows_to_json, ExperimentConfig, ExperimentKind, FieldChoice,
};

#[derive(Parser)]
#[command(name = "affine-pr", version, about = "Affine phase retrieval ensembles at the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct an ensemble and write it as JSON.
    Build(BuildArgs),
    /// Apply the forward map to a signal.
    Measure(MeasureArgs),
    /// Reconstruct a signal from its measurements.
    Recover(RecoverArgs),
    /// Search for collisions and report a verdict.
    Verify(VerifyArgs),
    /// Like verify, but demands a collision and writes the witness.
    Collide(CollideArgs),
    /// Turn witnesses into certificates and audit certificates.
    Certify(CertifyArgs),
    /// Run a reproducible sweep and emit one row per check.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl FieldArg {
    fn tag(self) -> FieldTag {
        match self {
            FieldArg::Real => FieldTag::Real,
            FieldArg::Complex => FieldTag::Complex,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Tight,
    Random,
    Perturbed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Exact block solve when the ensemble supports it, least squares otherwise.
    Auto,
    Tight,
    Lsq,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExpectArg {
    Injective,
    NonInjective,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NameArg {
    Tightness,
    Generic,
    Openness,
}

impl NameArg {
    fn kind(self) -> ExperimentKind {
        match self {
            NameArg::Tightness => ExperimentKind::Tightness,
            NameArg::Generic => ExperimentKind::Generic,
            NameArg::Openness => ExperimentKind::Openness,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldChoiceArg {
    Both,
    Real,
    Complex,
}

impl FieldChoiceArg {
    fn choice(self) -> FieldChoice {
        match self {
            FieldChoiceArg::Both => FieldChoice::Both,
            FieldChoiceArg::Real => FieldChoice::Real,
            FieldChoiceArg::Complex => FieldChoice::Complex,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExpectAllArg {
    AllPass,
}

#[derive(Args)]
struct BuildArgs {
    /// Scalar field of the ensemble.
    #[arg(long, value_enum)]
    field: FieldArg,
    /// Signal dimension.
    #[arg(long)]
    dim: usize,
    /// Rank of every measurement matrix.
    #[arg(long)]
    rank: usize,
    /// Construction to use.
    #[arg(long, value_enum, default_value_t = KindArg::Tight)]
    kind: KindArg,
    /// Number of measurements (random construction only).
    #[arg(long)]
    count: Option<usize>,
    /// Perturbation size (perturbed construction only).
    #[arg(long)]
    delta: Option<f64>,
    /// RNG seed (random construction only; falls back to AFFINE_PR_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the collision pair (perturbed construction only).
    #[arg(long)]
    witness_out: Option<PathBuf>,
    /// Output path for the ensemble document.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    /// Output path for the measurement document.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Restarts for the least-squares path.
    #[arg(long)]
    restarts: Option<usize>,
    /// RNG seed for the least-squares path (falls back to AFFINE_PR_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the recovered signal.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    /// RNG seed (falls back to AFFINE_PR_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Fail (exit 1) unless the verdict matches.
    #[arg(long, value_enum)]
    expect: Option<ExpectArg>,
    /// Optional path for the full report document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CollideArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    /// RNG seed (falls back to AFFINE_PR_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the witness document.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["witness", "certificate"])))]
struct CertifyArgs {
    #[arg(long)]
    ensemble: PathBuf,
    /// Build a certificate from this witness document.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Audit this certificate document instead.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Output: the certificate (with --witness) or the extracted witness
    /// (with --certificate).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    name: NameArg,
    /// Output path; rows go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, value_enum, default_value_t = FieldChoiceArg::Both)]
    field: FieldChoiceArg,
    /// Comma-separated dimension grid.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Comma-separated rank grid; empty means the experiment's default.
    #[arg(long, value_delimiter = ',')]
    ranks: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Master seed (falls back to AFFINE_PR_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated perturbation sizes (openness only).
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    /// Fail (exit 1) unless every row passes.
    #[arg(long, value_enum)]
    expect: Option<ExpectAllArg>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("affine-pr: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Build(args) => run_build(args),
        Command::Measure(args) => run_measure(args),
        Command::Recover(args) => run_recover(args),
        Command::Verify(args) => run_verify(args),
        Command::Collide(args) => run_collide(args),
        Command::Certify(args) => run_certify(args),
        Command::Experiment(args) => run_experiment_cmd(args),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|err| CliError::usage(format!("{}: {err}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|err| CliError::usage(format!("{}: {err}", path.display())))
}

fn load_ensemble(path: &Path) -> Result<Ensemble, CliError> {
    ensemble_from_json(&read_text(path)?)
        .map_err(|err| CliError::usage(format!("{}: {err}", path.display())))
}

/// The flag wins; otherwise AFFINE_PR_SEED, otherwise 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env::var("AFFINE_PR_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("AFFINE_PR_SEED is not a valid seed: {text:?}"))),
        Err(env::VarError::NotPresent) => Ok(0),
        Err(err) => Err(CliError::usage(format!("AFFINE_PR_SEED: {err}"))),
    }
}

fn run_build(args: BuildArgs) -> Result<(), CliError> {
    if args.count.is_some() && args.kind != KindArg::Random {
        return Err(CliError::usage("--count only applies to --kind random"));
    }
    if args.seed.is_some() && args.kind != KindArg::Random {
        return Err(CliError::usage("--seed only applies to --kind random"));
    }
    if args.delta.is_some() && args.kind != KindArg::Perturbed {
        return Err(CliError::usage("--delta only applies to --kind perturbed"));
    }
    if args.witness_out.is_some() && args.kind != KindArg::Perturbed {
        return Err(CliError::usage("--witness-out only applies to --kind perturbed"));
    }

    let field = args.field.tag();
    let construct = |err| CliError::usage(format!("construction: {err}"));
    let e = match args.kind {
        KindArg::Tight => tight_ensemble(field, args.dim, args.rank, None).map_err(construct)?,
        KindArg::Random => {
            let count = args
                .count
                .ok_or_else(|| CliError::usage("--kind random needs --count"))?;
            let seed = resolve_seed(args.seed)?;
            random_ensemble(field, args.dim, args.rank, count, seed).map_err(construct)?
        }
        KindArg::Perturbed => {
            let delta = args
                .delta
                .ok_or_else(|| CliError::usage("--kind perturbed needs --delta"))?;
            let w = perturbed_ensemble(field, args.dim, args.rank, delta).map_err(construct)?;
            if let Some(path) = &args.witness_out {
                let gap = collision_gap(&w.perturbed, &w.x, &w.y)?;
                let witness = CollisionWitness {
                    separation: w.x.distance(&w.y),
                    x: w.x,
                    y: w.y,
                    gap,
                };
                write_text(path, &witness_to_json(field, &witness))?;
            }
            w.perturbed
        }
    };
    write_text(&args.out, &ensemble_to_json(&e))?;
    println!(
        "built {} ensemble: field {}, d {}, r {}, m {}",
        e.meta.as_ref().map_or("custom", |m| m.kind_name()),
        e.field,
        e.d,
        e.r,
        e.m()
    );
    Ok(())
}

fn collision_gap(
    e: &Ensemble,
    x: &affine_pr::Signal,
    y: &affine_pr::Signal,
) -> Result<f64, CliError> {
    let yx = measure(e, x).map_err(|err| CliError::usage(format!("measure: {err}")))?;
    let yy = measure(e, y).map_err(|err| CliError::usage(format!("measure: {err}")))?;
    Ok(yx
        .values()
        .iter()
        .zip(yy.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn run_measure(args: MeasureArgs) -> Result<(), CliError> {
    let e = load_ensemble(&args.ensemble)?;
    let signal = signal_from_json(&read_text(&args.signal)?)
        .map_err(|err| CliError::usage(format!("{}: {err}", args.signal.display())))?;
    let y = measure(&e, &signal).map_err(|err| CliError::usage(format!("measure: {err}")))?;
    write_text(&args.out, &measurements_to_json(&y))?;
    println!("measured {} values", y.values().len());
    Ok(())
}

fn run_recover(args: RecoverArgs) -> Result<(), CliError> {
    let e = load_ensemble(&args.ensemble)?;
    let y = measurements_from_json(&read_text(&args.measurements)?)
        .map_err(|err| CliError::usage(format!("{}: {err}", args.measurements.display())))?;
    let tight = e.meta.as_ref().and_then(|m| m.tight_layout()).is_some();
    let method = match args.method {
        MethodArg::Auto if tight => MethodArg::Tight,
        MethodArg::Auto => MethodArg::Lsq,
        other => other,
    };
    match method {
        MethodArg::Tight => {
            let signal = tight_recover(&e, &y)
                .map_err(|err| CliError::domain(format!("recovery: {err}")))?;
            write_text(&args.out, &signal_to_json(&signal))?;
            println!("recovered signal (method tight)");
        }
        MethodArg::Lsq => {
            let opts = LsqOptions {
                restarts: args.restarts.unwrap_or(LsqOptions::default().restarts),
                seed: resolve_seed(args.seed)?,
                ..LsqOptions::default()
            };
            let report = lsq_recover(&e, &y, &opts)
                .map_err(|err| CliError::domain(format!("recovery: {err}")))?;
            if !report.success {
                return Err(CliError::domain(format!(
                    "recovery stalled: residual {:.3e} after {} restarts",
                    report.residual, report.restarts
                )));
            }
            write_text(&args.out, &signal_to_json(&report.signal))?;
            println!(
                "recovered signal (method lsq, residual {:.3e}, restart {} of {})",
                report.residual, report.best_restart, report.restarts
            );
        }
        MethodArg::Auto => unreachable!("auto resolved above"),
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let e = load_ensemble(&args.ensemble)?;
    let opts = SearchOptions {
        restarts: args.restarts,
        seed: resolve_seed(args.seed)?,
        ..SearchOptions::default()
    };
    let report = injectivity_report(&e, &opts)
        .map_err(|err| CliError::domain(format!("search: {err}")))?;
    if let Some(path) = &args.out {
        write_text(path, &report_to_json(e.field, &report))?;
    }
    let non_injective = match &report.verdict {
        Verdict::NoCollisionFound => {
            println!(
                "verdict: no collision found (min margin {:.3e}, {} restarts)",
                report.min_margin, report.restarts
            );
            false
        }
        Verdict::NonInjective(w) => {
            println!(
                "verdict: non-injective (gap {:.3e}, separation {:.3e})",
                w.gap, w.separation
            );
            true
        }
    };
    match args.expect {
        Some(ExpectArg::Injective) if non_injective => {
            Err(CliError::domain("expected injective but found a collision"))
        }
        Some(ExpectArg::NonInjective) if !non_injective => {
            Err(CliError::domain("expected a collision but none was found"))
        }
        _ => Ok(()),
    }
}

fn run_collide(args: CollideArgs) -> Result<(), CliError> {
    let e = load_ensemble(&args.ensemble)?;
    let opts = SearchOptions {
        restarts: args.restarts,
        seed: resolve_seed(args.seed)?,
        ..SearchOptions::default()
    };
    let report = injectivity_report(&e, &opts)
        .map_err(|err| CliError::domain(format!("search: {err}")))?;
    match report.verdict {
        Verdict::NonInjective(w) => {
            write_text(&args.out, &witness_to_json(e.field, &w))?;
            println!("found collision: gap {:.3e}, separation {:.3e}", w.gap, w.separation);
            Ok(())
        }
        Verdict::NoCollisionFound => Err(CliError::domain(format!(
            "no collision found after {} restarts (min margin {:.3e})",
            report.restarts, report.min_margin
        ))),
    }
}

fn run_certify(args: CertifyArgs) -> Result<(), CliError> {
    let e = load_ensemble(&args.ensemble)?;
    if let Some(path) = &args.witness {
        let (field, witness) = witness_from_json(&read_text(path)?)
            .map_err(|err| CliError::usage(format!("{}: {err}", path.display())))?;
        if field != e.field {
            return Err(CliError::usage(format!(
                "witness field {} does not match ensemble field {}",
                field, e.field
            )));
        }
        let cert = certificate_from_collision(&e, &witness)
            .map_err(|err| CliError::domain(format!("certificate: {err}")))?;
        let report = verify_certificate(&e, &cert)
            .map_err(|err| CliError::domain(format!("certificate: {err}")))?;
        println!("{report}");
        if let Some(fail) = report.first_failure() {
            return Err(CliError::domain(format!("certificate rejected: {}", fail.name)));
        }
        if let Some(out) = &args.out {
            write_text(out, &certificate_to_json(&cert))?;
        }
        // Confirm the witness scale survived the round trip into matrix form.
        let scale = witness_scale(&e, &witness.x, &witness.y)
            .map_err(|err| CliError::usage(format!("measure: {err}")))?;
        println!("certified witness: gap {:.3e} at scale {:.3e}", witness.gap, scale);
        Ok(())
    } else {
        let path = args.certificate.as_ref().expect("clap enforces the group");
        let cert = certificate_from_json(&read_text(path)?)
            .map_err(|err| CliError::usage(format!("{}: {err}", path.display())))?;
        let report = verify_certificate(&e, &cert)
            .map_err(|err| CliError::domain(format!("certificate: {err}")))?;
        println!("{report}");
        if let Some(fail) = report.first_failure() {
            return Err(CliError::domain(format!("certificate rejected: {}", fail.name)));
        }
        if let Some(out) = &args.out {
            let witness = collision_from_certificate(&e, &cert)
                .map_err(|err| CliError::domain(format!("extraction: {err}")))?;
            write_text(out, &witness_to_json(e.field, &witness))?;
            println!(
                "extracted witness: gap {:.3e}, separation {:.3e}",
                witness.gap, witness.separation
            );
        }
        Ok(())
    }
}

fn run_experiment_cmd(args: ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::for_kind(args.name.kind());
    cfg.field = args.field.choice();
    if !args.dims.is_empty() {
        cfg.dims = args.dims;
    }
    if !args.ranks.is_empty() {
        cfg.ranks = args.ranks;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(restarts) = args.restarts {
        cfg.restarts = restarts;
    }
    cfg.seed = resolve_seed(args.seed)?;
    if !args.deltas.is_empty() {
        cfg.deltas = args.deltas;
    }
    cfg.validate().map_err(|err| CliError::usage(format!("config: {err}")))?;

    let rows = experiments::run_experiment(&cfg)
        .map_err(|err| CliError::usage(format!("config: {err}")))?;
    let failing = rows.iter().filter(|r| !r.ok).count();
    let text = match args.format {
        FormatArg::Csv => rows_to_csv(&rows),
        FormatArg::Json => rows_to_json(&rows),
    };
    let summary = format!(
        "experiment {}: {} rows, {} failing",
        cfg.kind.name(),
        rows.len(),
        failing
    );
    match &args.out {
        Some(path) => {
            write_text(path, &text)?;
            println!("{summary}, wrote {}", path.display());
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    if args.expect.is_some() && failing > 0 {
        return Err(CliError::domain(format!(
            "{failing} of {} rows failed",
            rows.len()
        )));
    }
    Ok(())
}
