//! Executes a parsed experiment and writes its CSV reports.
//!
//! Exit codes: 0 success, 1 a mathematical contract failed, 2 invalid
//! configuration (or unreadable/unwritable files), 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{parse_config, ExperimentConfig, RunMode};
use crate::error::{Error, Result};
use crate::semiclassical::{convergence_study, ConvergenceResult, StudyOptions};
use crate::wave_solver::{solve_cauchy, verify_solution, wellposedness_report, ModeReport, VerifySettings, WellposednessReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "LATTICE_WAVE_WORKERS";

/// Smallest fitted order accepted by a convergence run.
pub const MIN_ORDER: f64 = 1.8;

pub const MODES_HEADER: &str = "m,beta2,C,K,exponent,realized_ratio,pass";
pub const AGGREGATE_HEADER: &str = "t,l2_u,l2_du,bound,ratio";
pub const CONVERGE_HEADER: &str = "hbar,err_l2,derr_l2";
pub const SOLUTION_HEADER: &str = "k,u_re,u_im,du_re,du_im";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Worker count: the environment override, then the config, then rayon's default.
pub fn resolve_workers(config: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(vec![format!(
                "{WORKERS_ENV}='{v}' is not a positive integer"
            )])),
        },
        Err(_) => Ok(config),
    }
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

fn write_file(dir: &Path, name: &str, body: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    files.push(path);
    Ok(())
}

pub fn modes_csv(reports: &[ModeReport]) -> String {
    let mut s = format!("{MODES_HEADER}\n");
    for r in reports {
        let c = &r.certificate;
        let ratio = c.realized_ratio.unwrap_or(f64::NAN);
        let _ = writeln!(
            s,
            "{},{:?},{:?},{:?},{:?},{:?},{}",
            r.index,
            r.beta2,
            c.c,
            c.k,
            c.exponent,
            ratio,
            r.pass()
        );
    }
    s
}

pub fn aggregate_csv(report: &WellposednessReport) -> String {
    let mut s = format!("{AGGREGATE_HEADER}\n");
    for r in &report.rows {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?},{:?}", r.t, r.l2_u, r.l2_du, r.bound, r.ratio);
    }
    s
}

fn converge_table(hbars: &[f64], err: &[f64], derr: &[f64], order: f64, residual: f64) -> String {
    let mut s = format!("{CONVERGE_HEADER}\n");
    for ((h, e), d) in hbars.iter().zip(err).zip(derr) {
        let _ = writeln!(s, "{h:?},{e:?},{d:?}");
    }
    let _ = writeln!(
        s,
        "# fitted_order={order:?},fit_residual={residual:?}"
    );
    s
}

/// `hbar^{n/2}`-weighted errors.
pub fn converge_csv(result: &ConvergenceResult) -> String {
    converge_table(
        &result.hbars,
        &result.errors,
        &result.derrors,
        result.fitted_order,
        result.fit_residual,
    )
}

/// Unweighted lattice-norm errors.
pub fn converge_counting_csv(result: &ConvergenceResult) -> String {
    converge_table(
        &result.hbars,
        &result.counting_errors,
        &result.counting_derrors,
        result.counting_fitted_order,
        result.counting_fit_residual,
    )
}

/// Runs `config`, writing reports to `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    let workers = resolve_workers(config.run.workers)?;
    if config.run.mode == RunMode::Selftest {
        let results = with_pool(workers, crate::selftest::run_selftest)?;
        let summary: Vec<String> = results.iter().map(|r| r.to_string()).collect();
        let pass = results.iter().all(|r| r.pass);
        return Ok(RunOutcome {
            exit_code: if pass { EXIT_OK } else { EXIT_CONTRACT },
            files: Vec::new(),
            summary,
        });
    }
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    write_file(out_dir, "config.ini", &config.to_ini(), &mut files)?;

    let exit_code = match config.run.mode {
        RunMode::Solve | RunMode::Verify => {
            let spec = config.cauchy_spec()?;
            let verify = config.run.mode == RunMode::Verify;
            let settings = VerifySettings {
                k_scale: config.k_scale,
                audits: verify,
            };
            let (sol, reports) = with_pool(workers, || -> Result<_> {
                let sol = solve_cauchy(&spec)?;
                let reports = verify_solution(&spec, &sol, settings)?;
                Ok((sol, reports))
            })??;
            let report = wellposedness_report(&spec, &sol, Some(&reports))?;
            write_file(out_dir, "aggregate.csv", &aggregate_csv(&report), &mut files)?;
            summary.push(format!(
                "modes={} samples={} realized_constant={:?} operator_norm={:?}",
                sol.modes.len(),
                sol.sample_times.len(),
                report.realized_constant,
                report.operator_norm
            ));
            if verify {
                write_file(out_dir, "modes.csv", &modes_csv(&reports), &mut files)?;
                let failed: Vec<&ModeReport> = reports.iter().filter(|r| !r.pass()).collect();
                summary.push(format!(
                    "case={} max_realized_ratio={:?} failed_modes={}",
                    spec.case,
                    report.max_certificate_ratio,
                    failed.len()
                ));
                for r in failed.iter().take(5) {
                    summary.push(format!(
                        "  mode {}: realized_ratio={:?} audit={:?} corollary_ratio={:?}",
                        r.index, r.certificate.realized_ratio, r.audit, r.corollary_ratio
                    ));
                }
                if failed.is_empty() {
                    EXIT_OK
                } else {
                    EXIT_CONTRACT
                }
            } else {
                let mut body = format!("{SOLUTION_HEADER}\n");
                for (k, (u, du)) in sol.final_u().values().iter().zip(sol.final_du().values()).enumerate() {
                    let _ = writeln!(body, "{k},{:?},{:?},{:?},{:?}", u.re, u.im, du.re, du.im);
                }
                write_file(out_dir, "solution.csv", &body, &mut files)?;
                EXIT_OK
            }
        }
        RunMode::Converge => {
            let cspec = config.continuum_spec()?;
            let result = with_pool(workers, || convergence_study(&cspec, &config.grid.hbars, StudyOptions::default()))??;
            write_file(out_dir, "converge.csv", &converge_csv(&result), &mut files)?;
            write_file(out_dir, "converge_counting.csv", &converge_counting_csv(&result), &mut files)?;
            summary.push(format!(
                "fitted_order={:?} (u {:?}, du {:?}) fit_residual={:?} monotone={} data regularity {}",
                result.fitted_order, result.order_u, result.order_du, result.fit_residual, result.monotone, result.sobolev
            ));
            summary.extend(result.diagnostics.iter().cloned());
            if result.fitted_order >= MIN_ORDER {
                EXIT_OK
            } else {
                EXIT_CONTRACT
            }
        }
        RunMode::Selftest => unreachable!(),
    };
    Ok(RunOutcome {
        exit_code,
        files,
        summary,
    })
}

/// Reads, parses and runs a config file, printing a summary; returns the exit code.
pub fn run_config_file(path: &Path, out_override: Option<&Path>) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let out = out_override
        .map(Path::to_path_buf)
        .or_else(|| config.run.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match run(&config, &out) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            let verdict = match outcome.exit_code {
                EXIT_OK => "ok",
                _ => "contract failed",
            };
            println!("{}: {verdict}", config.run.mode.name());
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
