//! Argument parsing and validation. Everything a command needs is loaded and
//! checked here, so [`crate::run`] only sees well-formed inputs.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ko_core::entire_solutions::{DichotomyOptions, Operator};
use ko_core::matrixops::{PucciParams, SymMatrix};
use ko_core::nonlinearity::NonlinearitySpec;
use ko_core::radial_ode::{RadialProfile, ShootConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Verdict asserted with `--expect`; which values apply depends on the command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expectation {
    Holds,
    Fails,
    Inconclusive,
    Global,
    Blowup,
    Exists,
    NotExists,
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    /// Sum of the k largest eigenvalues.
    Pplus,
    /// Sum of the positive eigenvalues.
    Mplus,
    /// Pucci inf-operator with ellipticity constants λ ≤ Λ.
    Mminus,
}

#[derive(Debug, Parser)]
#[command(name = "ko", version, about = "Radial blow-up, growth-condition checks and entire solutions")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Write the main result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Export (r, φ) pairs and bound markers as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    plot_data: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exit with status 1 unless the verdict matches.
    #[arg(long, global = true, value_enum)]
    expect: Option<Expectation>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Classify a nonlinearity by the growth condition.
    Classify {
        #[arg(long = "f", value_name = "SPEC_JSON")]
        spec: PathBuf,
        /// Use the numerical ladder even for parametric families.
        #[arg(long)]
        numerical: bool,
    },
    /// Integrate the radial problem and report blow-up or global existence.
    #[command(allow_negative_numbers = true)]
    Shoot(ShootArgs),
    /// Evaluate an extremal operator on a symmetric matrix.
    #[command(allow_negative_numbers = true)]
    Operator(OperatorArgs),
    /// Decide existence of entire solutions and emit a certificate.
    #[command(allow_negative_numbers = true)]
    Dichotomy(DichotomyArgs),
    /// Check a stored profile: qualitative invariants and, optionally, the
    /// PDE residual on a random point cloud.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Run a grid of shooting jobs in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ShootArgs {
    #[arg(long = "f", value_name = "SPEC_JSON")]
    spec: PathBuf,
    /// ShootConfig as JSON; individual flags override its fields.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    blowup_cap: Option<f64>,
    #[arg(long)]
    min_step: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    bracket_rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct OperatorSelection {
    #[arg(long, value_enum)]
    op: OperatorKind,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda_lo: Option<f64>,
    #[arg(long)]
    lambda_hi: Option<f64>,
}

#[derive(Debug, Args)]
struct OperatorArgs {
    #[command(flatten)]
    selection: OperatorSelection,
    #[arg(long, value_name = "MATRIX_JSON", conflicts_with = "random")]
    matrix: Option<PathBuf>,
    /// Draw a random n×n matrix with entries uniform in [-bound, bound].
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    bound: f64,
}

#[derive(Debug, Args)]
struct DichotomyArgs {
    #[arg(long = "f", value_name = "SPEC_JSON")]
    spec: PathBuf,
    #[command(flatten)]
    selection: OperatorSelection,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 10.0)]
    r_max: f64,
    /// 0 selects r_max·1e-4.
    #[arg(long, default_value_t = 0.0)]
    max_step: f64,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Also write the candidate profile here and record the path.
    #[arg(long, value_name = "PATH")]
    profile_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_name = "PROFILE_CSV")]
    profile: PathBuf,
    /// Right-hand side for the residual check; defaults to the spec recorded
    /// in the profile. Invariants always use the recorded forcing.
    #[arg(long = "f", value_name = "SPEC_JSON")]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Dimension for the residual check; omit to skip it.
    #[arg(long, requires = "op")]
    n: Option<usize>,
    #[arg(long, value_enum, requires = "n")]
    op: Option<OperatorKind>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lambda_lo: Option<f64>,
    #[arg(long)]
    lambda_hi: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Radius of the point cloud; defaults to the profile's last radius
    /// (half of it for blow-up profiles).
    #[arg(long)]
    radius: Option<f64>,
    /// Allowed residual, relative to max(1, |f|).
    #[arg(long, default_value_t = 1e-6)]
    residual_tol: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Grid description, see `SweepFile`.
    #[arg(long, value_name = "JSON")]
    config: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Write every profile to `<dir>/job-<index>.csv`.
    #[arg(long, value_name = "DIR")]
    profiles_dir: Option<PathBuf>,
}

/// Sweep input: the cartesian product `specs × c × a`, each job shot with
/// `base` (whose `c` and `a` are overridden).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub specs: Vec<NonlinearitySpec>,
    pub c: Vec<f64>,
    pub a: Vec<f64>,
    #[serde(default)]
    pub base: Option<ShootConfig>,
}

/// The `spec=` trailer of a profile: a plain spec or a scaled one.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RecordedLabel {
    Scaled { scaled: f64, base: NonlinearitySpec },
    Plain(NonlinearitySpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepJob {
    pub spec: NonlinearitySpec,
    pub config: ShootConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Random { n: usize, bound: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCheck {
    pub n: usize,
    pub operator: Operator,
    pub points: usize,
    pub radius: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Classify {
        spec_path: PathBuf,
        spec: NonlinearitySpec,
        numerical: bool,
    },
    Shoot {
        spec_path: PathBuf,
        spec: NonlinearitySpec,
        config: ShootConfig,
    },
    Operator {
        source: MatrixSource,
        matrix: SymMatrix,
        operator: Operator,
    },
    Dichotomy {
        spec_path: PathBuf,
        spec: NonlinearitySpec,
        operator: Operator,
        n: usize,
        options: DichotomyOptions,
        profile_csv: Option<PathBuf>,
    },
    Verify {
        profile_path: PathBuf,
        profile: RadialProfile,
        /// The profile was shot with `factor·forcing`.
        forcing: NonlinearitySpec,
        factor: f64,
        /// Right-hand side of the equation checked by the residual.
        spec: NonlinearitySpec,
        tol: f64,
        residual: Option<ResidualCheck>,
    },
    Sweep {
        config_path: PathBuf,
        jobs: Vec<SweepJob>,
        threads: Option<usize>,
        profiles_dir: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Shoot { .. } => "shoot",
            Command::Operator { .. } => "operator",
            Command::Dichotomy { .. } => "dichotomy",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
        }
    }

    fn formats(&self) -> &'static [Format] {
        match self {
            Command::Shoot { .. } | Command::Sweep { .. } => &[Format::Csv, Format::Json],
            _ => &[Format::Json],
        }
    }

    fn expectations(&self) -> &'static [Expectation] {
        use Expectation::*;
        match self {
            Command::Classify { .. } => &[Holds, Fails, Inconclusive],
            Command::Shoot { .. } => &[Global, Blowup],
            Command::Dichotomy { .. } => &[Exists, NotExists, Inconclusive],
            Command::Verify { .. } => &[Pass, Fail],
            Command::Operator { .. } | Command::Sweep { .. } => &[],
        }
    }

    fn plots(&self) -> bool {
        matches!(self, Command::Shoot { .. } | Command::Dichotomy { .. } | Command::Verify { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub plot_data: Option<PathBuf>,
    pub seed: u64,
    pub expect: Option<Expectation>,
}

/// Parses `argv` (program name first) into a validated configuration.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let command = match cli.command {
        Sub::Classify { spec, numerical } => Command::Classify {
            spec: read_json(&spec, "--f")?,
            spec_path: spec,
            numerical,
        },
        Sub::Shoot(args) => shoot_command(args)?,
        Sub::Operator(args) => operator_command(args)?,
        Sub::Dichotomy(args) => dichotomy_command(args, cli.seed)?,
        Sub::Verify(args) => verify_command(args)?,
        Sub::Sweep(args) => sweep_command(args)?,
    };
    let name = command.name();
    let format = match cli.format {
        None => command.formats()[0],
        Some(f) if command.formats().contains(&f) => f,
        Some(f) => {
            return Err(CliError::usage(format!(
                "--format {}: not available for `{name}`",
                format_name(f)
            )))
        }
    };
    if let Some(e) = cli.expect {
        if !command.expectations().contains(&e) {
            let allowed: Vec<String> = command.expectations().iter().map(|&v| value_name(v)).collect();
            let hint = if allowed.is_empty() {
                "the command has no verdict".to_string()
            } else {
                format!("expected one of {}", allowed.join(", "))
            };
            return Err(CliError::usage(format!("--expect {}: {hint} for `{name}`", value_name(e))));
        }
    }
    if cli.plot_data.is_some() && !command.plots() {
        return Err(CliError::usage(format!("--plot-data: not available for `{name}`")));
    }
    Ok(RunConfig {
        command,
        output: cli.out,
        format,
        plot_data: cli.plot_data,
        seed: cli.seed,
        expect: cli.expect,
    })
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn format_name(f: Format) -> String {
    value_name(f)
}

pub(crate) fn read_text(path: &Path, flag: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{flag} {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path, flag: &str) -> Result<T, CliError> {
    let text = read_text(path, flag)?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{flag} {}: malformed JSON: {e}", path.display())))
}

fn check_range(flag: &str, v: f64, ok: bool, what: &str) -> Result<(), CliError> {
    if ok && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("--{flag} {v}: must be {what}")))
    }
}

fn positive(flag: &str, v: f64) -> Result<(), CliError> {
    check_range(flag, v, v > 0.0, "positive")
}

fn shoot_command(args: ShootArgs) -> Result<Command, CliError> {
    let spec: NonlinearitySpec = read_json(&args.spec, "--f")?;
    let mut cfg = match &args.config {
        Some(p) => read_json::<ShootConfig>(p, "--config")?,
        None => ShootConfig::default(),
    };
    if args.config.is_none() && args.c.is_none() {
        return Err(CliError::usage("--c is required unless --config is given"));
    }
    let overrides = [
        ("c", args.c, &mut cfg.c),
        ("a", args.a, &mut cfg.a),
        ("r-max", args.r_max, &mut cfg.r_max),
        ("rel-tol", args.rel_tol, &mut cfg.rel_tol),
        ("abs-tol", args.abs_tol, &mut cfg.abs_tol),
        ("blowup-cap", args.blowup_cap, &mut cfg.blowup_cap),
        ("min-step", args.min_step, &mut cfg.min_step),
        ("max-step", args.max_step, &mut cfg.max_step),
        ("bracket-rel-tol", args.bracket_rel_tol, &mut cfg.bracket_rel_tol),
    ];
    for (flag, value, field) in overrides {
        if let Some(v) = value {
            match flag {
                "c" => check_range(flag, v, v >= 1.0, "at least 1")?,
                "a" => check_range(flag, v, true, "finite")?,
                "max-step" => check_range(flag, v, v >= 0.0, "nonnegative")?,
                _ => positive(flag, v)?,
            }
            *field = v;
        }
    }
    cfg.check()
        .map_err(|e| CliError::usage(format!("--config {}: {e}", path_or_flags(&args.config))))?;
    Ok(Command::Shoot {
        spec_path: args.spec,
        spec,
        config: cfg,
    })
}

fn path_or_flags(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "(flags)".into())
}

fn operator_from(kind: OperatorKind, k: Option<usize>, lo: Option<f64>, hi: Option<f64>) -> Result<Operator, CliError> {
    match kind {
        OperatorKind::Pplus => match k {
            Some(k) if k >= 1 => Ok(Operator::PPlusK { k }),
            Some(k) => Err(CliError::usage(format!("--k {k}: must be at least 1"))),
            None => Err(CliError::usage("--k is required with --op pplus")),
        },
        OperatorKind::Mplus => Ok(Operator::MPlus01),
        OperatorKind::Mminus => {
            let (Some(lo), Some(hi)) = (lo, hi) else {
                return Err(CliError::usage("--lambda-lo and --lambda-hi are required with --op mminus"));
            };
            let params =
                PucciParams::new(lo, hi).map_err(|e| CliError::usage(format!("--lambda-lo {lo} --lambda-hi {hi}: {e}")))?;
            Ok(Operator::MMinus { params })
        }
    }
}

fn check_k(operator: &Operator, n: usize) -> Result<(), CliError> {
    match operator {
        Operator::PPlusK { k } if *k > n => Err(CliError::usage(format!("--k {k}: must not exceed the dimension {n}"))),
        _ => Ok(()),
    }
}

fn operator_command(args: OperatorArgs) -> Result<Command, CliError> {
    let s = args.selection;
    let operator = operator_from(s.op, s.k, s.lambda_lo, s.lambda_hi)?;
    let (source, matrix) = match (args.matrix, args.random) {
        (Some(path), None) => {
            let m: SymMatrix = read_json(&path, "--matrix")?;
            (MatrixSource::File(path), m)
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(CliError::usage("--random 0: dimension must be at least 1"));
            }
            positive("bound", args.bound)?;
            // drawn in `run`, where the seed is applied
            (MatrixSource::Random { n, bound: args.bound }, SymMatrix::zeros(n))
        }
        _ => return Err(CliError::usage("one of --matrix or --random is required")),
    };
    check_k(&operator, matrix.n())?;
    Ok(Command::Operator {
        source,
        matrix,
        operator,
    })
}

fn dichotomy_command(args: DichotomyArgs, seed: u64) -> Result<Command, CliError> {
    let spec: NonlinearitySpec = read_json(&args.spec, "--f")?;
    let s = args.selection;
    let operator = operator_from(s.op, s.k, s.lambda_lo, s.lambda_hi)?;
    if args.n == 0 {
        return Err(CliError::usage("--n 0: dimension must be at least 1"));
    }
    check_k(&operator, args.n)?;
    check_range("a", args.a, true, "finite")?;
    positive("r-max", args.r_max)?;
    check_range("max-step", args.max_step, args.max_step >= 0.0, "nonnegative")?;
    if args.points == 0 {
        return Err(CliError::usage("--points 0: need at least one point"));
    }
    Ok(Command::Dichotomy {
        spec_path: args.spec,
        spec,
        operator,
        n: args.n,
        options: DichotomyOptions {
            a: args.a,
            r_max: args.r_max,
            max_step: args.max_step,
            residual_points: args.points,
            seed,
        },
        profile_csv: args.profile_csv,
    })
}

fn verify_command(args: VerifyArgs) -> Result<Command, CliError> {
    let text = read_text(&args.profile, "--profile")?;
    let profile = RadialProfile::from_csv(&text)
        .map_err(|e| CliError::usage(format!("--profile {}: {e}", args.profile.display())))?;
    let given: Option<NonlinearitySpec> = args.spec.as_ref().map(|p| read_json(p, "--f")).transpose()?;
    let recorded = serde_json::from_str::<RecordedLabel>(&profile.spec_label).ok();
    let (forcing, factor, spec) = match (recorded, given) {
        (Some(RecordedLabel::Plain(f)), given) => (f.clone(), 1.0, given.unwrap_or(f)),
        (Some(RecordedLabel::Scaled { scaled, base }), given) => (base.clone(), scaled, given.unwrap_or(base)),
        (None, Some(f)) => (f.clone(), 1.0, f),
        (None, None) => {
            return Err(CliError::usage(format!(
                "--profile {}: recorded spec `{}` is not readable; pass --f",
                args.profile.display(),
                profile.spec_label
            )))
        }
    };
    positive("tol", args.tol)?;
    let residual = match (args.n, args.op) {
        (Some(n), Some(kind)) => {
            if n == 0 {
                return Err(CliError::usage("--n 0: dimension must be at least 1"));
            }
            let operator = operator_from(kind, args.k, args.lambda_lo, args.lambda_hi)?;
            check_k(&operator, n)?;
            let last = profile.last().r;
            let radius = match args.radius {
                Some(r) => {
                    check_range("radius", r, r > 0.0 && r <= last, &format!("in (0, {last}]"))?;
                    r
                }
                None if profile.is_global() => last,
                None => 0.5 * last,
            };
            positive("residual-tol", args.residual_tol)?;
            if args.points == 0 {
                return Err(CliError::usage("--points 0: need at least one point"));
            }
            Some(ResidualCheck {
                n,
                operator,
                points: args.points,
                radius,
                tol: args.residual_tol,
            })
        }
        _ => None,
    };
    Ok(Command::Verify {
        profile_path: args.profile,
        profile,
        forcing,
        factor,
        spec,
        tol: args.tol,
        residual,
    })
}

fn sweep_command(args: SweepArgs) -> Result<Command, CliError> {
    let file: SweepFile = read_json(&args.config, "--config")?;
    let base = file.base.unwrap_or_default();
    let mut jobs = Vec::with_capacity(file.specs.len() * file.c.len() * file.a.len());
    for spec in &file.specs {
        for &c in &file.c {
            for &a in &file.a {
                let config = ShootConfig { c, a, ..base };
                config
                    .check()
                    .map_err(|e| CliError::usage(format!("--config {}: {e}", args.config.display())))?;
                jobs.push(SweepJob {
                    spec: spec.clone(),
                    config,
                });
            }
        }
    }
    if jobs.is_empty() {
        return Err(CliError::usage(format!("--config {}: the grid is empty", args.config.display())));
    }
    if args.threads == Some(0) {
        return Err(CliError::usage("--threads 0: need at least one thread"));
    }
    Ok(Command::Sweep {
        config_path: args.config,
        jobs,
        threads: args.threads,
        profiles_dir: args.profiles_dir,
    })
}
