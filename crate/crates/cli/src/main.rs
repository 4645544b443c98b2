use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use d22_cli::config::{ClassArg, RunConfig, SeedString, Suite, Tolerances};
use d22_cli::decimal::{Decimal, DecimalComplex};
use d22_cli::error::CliError;
use d22_cli::report::VerificationReport;
use d22_cli::{run_solve, run_verify, suites};
use serde::Serialize;

/// Numerical checks and Bethe-root solving for the open D₂⁽²⁾ spin chain.
///
/// Every flag can also be set through a `D22_*` environment variable.
/// Exit status: 0 all checks pass, 1 a check failed, 2 usage or config error.
#[derive(Parser)]
#[command(name = "d22", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity-check suites and emit a report.
    Verify(Common),
    /// Solve the Bethe equations, classify and certify the roots.
    Solve(Common),
    /// Print the spectra of t(u) and of the staggered XXZ transfer matrix.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Spectral parameter as `re,im`.
        #[arg(long, default_value = "0.21,0.33", env = "D22_U")]
        u: DecimalComplex,
    },
    /// Validate a saved report and print its summary.
    Report {
        /// Report file written by `verify` or `solve`.
        #[arg(env = "D22_REPORT")]
        path: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, env = "D22_CONFIG")]
    config: Option<PathBuf>,
    /// Suites to run (repeat or comma-separate); default all.
    #[arg(long, value_enum, value_delimiter = ',', env = "D22_SUITE")]
    suite: Vec<Suite>,
    #[arg(long, env = "D22_SEED")]
    seed: Option<u64>,
    /// Number of D₂⁽²⁾ sites.
    #[arg(long, env = "D22_N")]
    n: Option<usize>,
    /// Boundary class.
    #[arg(long, value_enum, env = "D22_CLASS")]
    class: Option<ClassArg>,
    /// Write the report here instead of standard output.
    #[arg(long, env = "D22_OUT")]
    out: Option<PathBuf>,
    /// Replace every tolerance with this value.
    #[arg(long, env = "D22_TOLERANCE")]
    tolerance: Option<Decimal>,
    /// Random points per identity check.
    #[arg(long, env = "D22_SAMPLES")]
    samples: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.suite.is_empty() {
            cfg.suites = self.suite.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = SeedString(seed);
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(class) = self.class {
            cfg.class = class;
            cfg.pattern = None;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        if let Some(t) = self.tolerance {
            cfg.tolerances = Tolerances::uniform(t.0);
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(path.display().to_string(), e.to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io("stdout".into(), e.to_string()))
                }
                _ => Ok(()),
            }
        }
    }
}

fn finish(report: VerificationReport) -> Result<ExitCode, CliError> {
    emit(&report.to_json(), report.config.output.as_ref())?;
    if report.config.output.is_some() {
        eprint!("{}", report.summary());
    }
    for f in report.failures() {
        eprintln!(
            "failed: {} (residual {:.3e} > {:.1e})",
            f.name, f.residual.0, f.tolerance.0
        );
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct SpectrumOutput {
    u: DecimalComplex,
    n: usize,
    class: ClassArg,
    d22: Vec<DecimalComplex>,
    xxz_staggered: Vec<DecimalComplex>,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Verify(common) => finish(run_verify(&common.resolve()?)?),
        Command::Solve(common) => finish(run_solve(&common.resolve()?)?),
        Command::Spectrum { common, u } => {
            let cfg = common.resolve()?;
            let spec = cfg.chain()?;
            let (d, x) = suites::spectra(&spec, &cfg, u.value())?;
            let out = SpectrumOutput {
                u,
                n: cfg.n,
                class: cfg.class,
                d22: d.into_iter().map(Into::into).collect(),
                xxz_staggered: x.into_iter().map(Into::into).collect(),
            };
            emit(
                &serde_json::to_string_pretty(&out).expect("serializable"),
                cfg.output.as_ref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { path } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
            let report = VerificationReport::parse(&text)?;
            print!("{}", report.summary());
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
