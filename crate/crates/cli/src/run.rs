use std::path::{Path, PathBuf};

use ko_core::entire_solutions::{
    construct_pucci_inf, dichotomy, random_ball_points, residual, Dichotomy, DichotomyOptions, EntireCandidate,
    Operator, Verdict,
};
use ko_core::matrixops::{eigenvalues, SymMatrix};
use ko_core::nonlinearity::{classify_ko, classify_ko_numerical, KoStatus, NonlinearitySpec};
use ko_core::radial_ode::{check_invariants, radius_bounds, shoot, RadialProfile, Radius, Scaled, ShootConfig};
use log::{debug, info, warn};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::args::{Command, Expectation, Format, MatrixSource, ResidualCheck, RunConfig, SweepJob};
use crate::error::CliError;
use crate::output::{
    emit, plot_rows, to_csv, to_json, write_file, OperatorReport, ResidualSummary, SweepRow, VerifyReport,
};

/// Runs the command and maps the outcome to a process exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(Outcome { verdict, code }) => {
            let expected = match (cfg.expect, &cfg.command) {
                (Some(e), _) => Some(e),
                // verification is itself an assertion
                (None, Command::Verify { .. }) => Some(Expectation::Pass),
                (None, _) => None,
            };
            match (expected, verdict) {
                (Some(want), Some(got)) if want != got => {
                    eprintln!("ko: verdict {got:?} does not match --expect {want:?}");
                    1
                }
                _ => code,
            }
        }
        Err(e) => report(&e),
    }
}

/// Prints `e` the way the binary does and returns its exit status.
pub fn report(e: &CliError) -> i32 {
    match e {
        CliError::Clap(c) => {
            let _ = c.print();
        }
        other => eprintln!("ko: error: {other}"),
    }
    e.exit_code()
}

struct Outcome {
    verdict: Option<Expectation>,
    code: i32,
}

impl Outcome {
    fn ok(verdict: Option<Expectation>) -> Self {
        Outcome { verdict, code: 0 }
    }
}

fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let out = cfg.output.as_deref();
    match &cfg.command {
        Command::Classify { spec, numerical, .. } => {
            let verdict = if *numerical { classify_ko_numerical(spec)? } else { classify_ko(spec)? };
            info!("classified {} as {:?}", spec.label(), verdict.status);
            emit(out, &to_json(&verdict))?;
            Ok(Outcome::ok(Some(match verdict.status {
                KoStatus::Holds => Expectation::Holds,
                KoStatus::Fails => Expectation::Fails,
                KoStatus::Inconclusive => Expectation::Inconclusive,
            })))
        }
        Command::Shoot { spec, config, .. } => run_shoot(cfg, spec, config),
        Command::Operator {
            source,
            matrix,
            operator,
        } => {
            let (matrix, source, seed) = match source {
                MatrixSource::File(p) => (matrix.clone(), p.display().to_string(), None),
                MatrixSource::Random { n, bound } => {
                    let mut rng = StdRng::seed_from_u64(cfg.seed);
                    (SymMatrix::random_uniform(*n, *bound, &mut rng), "random".into(), Some(cfg.seed))
                }
            };
            let report = OperatorReport {
                operator: *operator,
                value: operator.apply(&matrix)?,
                spectrum: eigenvalues(&matrix).values().to_vec(),
                matrix,
                source,
                seed,
            };
            emit(out, &to_json(&report))?;
            Ok(Outcome::ok(None))
        }
        Command::Dichotomy {
            spec,
            operator,
            n,
            options,
            profile_csv,
            ..
        } => run_dichotomy(cfg, spec, *operator, *n, options, profile_csv.as_deref()),
        Command::Verify {
            profile_path,
            profile,
            forcing,
            factor,
            spec,
            tol,
            residual,
        } => {
            let forcing = Scaled {
                base: forcing,
                factor: *factor,
            };
            run_verify(cfg, profile_path, profile, &forcing, spec, *tol, residual.as_ref())
        }
        Command::Sweep {
            jobs,
            threads,
            profiles_dir,
            ..
        } => run_sweep(cfg, jobs, *threads, profiles_dir.as_deref()),
    }
}

fn bound_markers(spec: &NonlinearitySpec, a: f64, c: f64) -> Vec<(&'static str, f64)> {
    match radius_bounds(spec, a, c) {
        Ok(Radius::Finite(b)) => vec![("radius_lower_bound", b.lower), ("radius_upper_bound", b.upper)],
        Ok(Radius::Unbounded) => vec![],
        Err(e) => {
            debug!("no radius bounds: {e}");
            vec![]
        }
    }
}

fn write_plot(cfg: &RunConfig, profile: &RadialProfile, markers: &[(&str, f64)]) -> Result<(), CliError> {
    if let Some(path) = &cfg.plot_data {
        write_file(path, &to_csv(&plot_rows(profile, markers))?)?;
        info!("plot data written to {}", path.display());
    }
    Ok(())
}

fn run_shoot(cfg: &RunConfig, spec: &NonlinearitySpec, config: &ShootConfig) -> Result<Outcome, CliError> {
    let profile = shoot(spec, config)?;
    info!(
        "shot c={} a={}: {:?} with {} samples",
        config.c,
        config.a,
        profile.status,
        profile.samples.len()
    );
    let text = match cfg.format {
        Format::Csv => profile.to_csv(),
        Format::Json => to_json(&profile),
    };
    emit(cfg.output.as_deref(), &text)?;
    write_plot(cfg, &profile, &bound_markers(spec, config.a, config.c))?;
    Ok(Outcome::ok(Some(if profile.is_global() { Expectation::Global } else { Expectation::Blowup })))
}

fn run_dichotomy(
    cfg: &RunConfig,
    spec: &NonlinearitySpec,
    operator: Operator,
    n: usize,
    options: &DichotomyOptions,
    profile_csv: Option<&Path>,
) -> Result<Outcome, CliError> {
    let Dichotomy {
        mut certificate,
        candidate,
    } = match operator {
        Operator::MMinus { params } => construct_pucci_inf(spec, n, params, options)?.into_dichotomy(n, params, options),
        _ => dichotomy(spec, operator, n, options)?,
    };
    if let Some(path) = profile_csv {
        match &candidate {
            Some(cand) => {
                write_file(path, &cand.profile.to_csv())?;
                certificate.profile_csv = Some(path.display().to_string());
            }
            None => warn!("no candidate profile to write to {}", path.display()),
        }
    }
    if let (Some(path), None) = (&cfg.plot_data, &candidate) {
        warn!("no candidate profile to plot to {}", path.display());
    }
    if let Some(cand) = &candidate {
        write_plot(cfg, &cand.profile, &[])?;
    }
    info!("dichotomy verdict {:?}", certificate.verdict);
    emit(cfg.output.as_deref(), &to_json(&certificate))?;
    Ok(Outcome::ok(Some(match certificate.verdict {
        Verdict::Exists => Expectation::Exists,
        Verdict::NotExists => Expectation::NotExists,
        Verdict::Inconclusive => Expectation::Inconclusive,
    })))
}

fn residual_summary(
    profile: &RadialProfile,
    spec: &NonlinearitySpec,
    check: &ResidualCheck,
    seed: u64,
) -> Result<ResidualSummary, CliError> {
    let cand = EntireCandidate::new(profile.clone(), check.n, check.operator, spec.clone())?;
    let mut rng = StdRng::seed_from_u64(seed);
    let points = random_ball_points(check.n, check.radius, check.points, &mut rng);
    let rep = residual(&cand, &points)?;
    let one_sided = matches!(check.operator, Operator::MPlus01);
    let worst_relative = rep
        .points
        .iter()
        .map(|p| {
            let d = if one_sided { (-p.residual()).max(0.0) } else { p.residual().abs() };
            d / p.f.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    Ok(ResidualSummary {
        operator: check.operator,
        n: check.n,
        points: check.points,
        radius: check.radius,
        max_abs: rep.max_abs,
        max_defect: rep.max_defect,
        worst_r: rep.worst_r,
        worst_relative,
        tol: check.tol,
        passed: worst_relative <= check.tol,
    })
}

fn run_verify(
    cfg: &RunConfig,
    profile_path: &Path,
    profile: &RadialProfile,
    forcing: &Scaled,
    spec: &NonlinearitySpec,
    tol: f64,
    check: Option<&ResidualCheck>,
) -> Result<Outcome, CliError> {
    let invariants = check_invariants(profile, forcing, tol);
    let violations: Vec<String> = invariants
        .violations()
        .into_iter()
        .map(|(name, v)| format!("{name}: {v:e}"))
        .collect();
    let residual = check.map(|c| residual_summary(profile, spec, c, cfg.seed)).transpose()?;
    let passed = violations.is_empty() && residual.as_ref().is_none_or(|r| r.passed);
    let report = VerifyReport {
        profile: profile_path.display().to_string(),
        seed: cfg.seed,
        invariants,
        violations,
        residual,
        passed,
    };
    emit(cfg.output.as_deref(), &to_json(&report))?;
    write_plot(cfg, profile, &[])?;
    Ok(Outcome::ok(Some(if passed { Expectation::Pass } else { Expectation::Fail })))
}

struct JobResult {
    row: SweepRow,
    profile: Option<RadialProfile>,
    error: Option<ko_core::Error>,
}

fn sweep_job(index: usize, job: &SweepJob) -> JobResult {
    let cfg = &job.config;
    let mut row = SweepRow {
        index,
        spec: job.spec.label(),
        c: cfg.c,
        a: cfg.a,
        status: "error".into(),
        r_lo: None,
        r_hi: None,
        lower_bound: None,
        upper_bound: None,
        samples: None,
        error: None,
    };
    match shoot(&job.spec, cfg) {
        Ok(p) => {
            row.samples = Some(p.samples.len());
            match p.status {
                ko_core::radial_ode::ProfileStatus::Global { .. } => row.status = "global".into(),
                ko_core::radial_ode::ProfileStatus::BlowUp { r_lo, r_hi } => {
                    row.status = "blowup".into();
                    row.r_lo = Some(r_lo);
                    row.r_hi = Some(r_hi);
                }
            }
            for (name, v) in bound_markers(&job.spec, cfg.a, cfg.c) {
                match name {
                    "radius_lower_bound" => row.lower_bound = Some(v),
                    _ => row.upper_bound = Some(v),
                }
            }
            JobResult {
                row,
                profile: Some(p),
                error: None,
            }
        }
        Err(e) => {
            row.error = Some(e.to_string());
            JobResult {
                row,
                profile: None,
                error: Some(e),
            }
        }
    }
}

fn run_sweep(
    cfg: &RunConfig,
    jobs: &[SweepJob],
    threads: Option<usize>,
    profiles_dir: Option<&Path>,
) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
    let results: Vec<JobResult> =
        pool.install(|| jobs.par_iter().enumerate().map(|(i, job)| sweep_job(i, job)).collect());

    // single collector: all files are written from this thread, in job order
    if let Some(dir) = profiles_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for r in &results {
            if let Some(p) = &r.profile {
                let path: PathBuf = dir.join(format!("job-{}.csv", r.row.index));
                write_file(&path, &p.to_csv())?;
            }
        }
    }
    let rows: Vec<SweepRow> = results.iter().map(|r| r.row.clone()).collect();
    let text = match cfg.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&rows),
    };
    emit(cfg.output.as_deref(), &text)?;

    let errors: Vec<&ko_core::Error> = results.iter().filter_map(|r| r.error.as_ref()).collect();
    for e in &errors {
        warn!("sweep job failed: {e}");
    }
    let code = if errors.iter().any(|e| e.is_numerical()) {
        3
    } else if errors.is_empty() {
        0
    } else {
        2
    };
    info!("sweep finished: {} jobs, {} failed", jobs.len(), errors.len());
    Ok(Outcome { verdict: None, code })
}
