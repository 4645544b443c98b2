//! Verification driver, configuration and report format for the `d22` command.

pub mod config;
pub mod decimal;
pub mod error;
pub mod report;
pub mod suites;

use config::RunConfig;
use error::CliError;
use report::VerificationReport;

/// Runs the configured suites in order.
pub fn run_verify(cfg: &RunConfig) -> Result<VerificationReport, CliError> {
    let spec = cfg.chain()?;
    let mut suites = Vec::new();
    let mut solution = None;
    for &suite in &cfg.suites {
        let (report, sol) = suites::run_suite(suite, cfg, &spec)?;
        suites.push(report);
        if sol.is_some() {
            solution = sol;
        }
    }
    Ok(VerificationReport::new(
        "verify",
        cfg.clone(),
        suites,
        solution,
    ))
}

/// Largest chain the Bethe solver accepts.
pub const MAX_SOLVE_SITES: usize = 2;

/// Bethe roots, classification and certification.
pub fn run_solve(cfg: &RunConfig) -> Result<VerificationReport, CliError> {
    if cfg.n > MAX_SOLVE_SITES {
        return Err(CliError::Config(format!(
            "solve supports N ≤ {MAX_SOLVE_SITES}; N = {} means 2N = {} coupled Bethe roots against a {}-dimensional spectrum, beyond the solver's validated range",
            cfg.n,
            2 * cfg.n,
            4usize.pow(cfg.n as u32)
        )));
    }
    let spec = cfg.chain()?;
    let start = std::time::Instant::now();
    let (records, solution) = suites::tq(cfg, &spec)?;
    let suite = report::SuiteReport {
        suite: config::Suite::Tq,
        wall_clock_seconds: decimal::Decimal(start.elapsed().as_secs_f64()),
        records,
    };
    Ok(VerificationReport::new(
        "solve",
        cfg.clone(),
        vec![suite],
        Some(solution),
    ))
}
