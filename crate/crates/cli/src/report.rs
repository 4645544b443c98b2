//! Versioned report document.

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SeedString, Suite};
use crate::decimal::{Decimal, DecimalComplex};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    /// The identity being checked, written out.
    pub equation: String,
    pub residual: Decimal,
    pub tolerance: Decimal,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, equation: &str, residual: f64, tolerance: Decimal) -> Self {
        // NaN never passes
        let pass = residual <= tolerance.0;
        Self {
            name: name.into(),
            equation: equation.to_string(),
            residual: Decimal(residual),
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub suite: Suite,
    pub wall_clock_seconds: Decimal,
    pub records: Vec<CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub tool: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub started_unix_seconds: String,
}

impl Environment {
    pub fn capture() -> Self {
        let started = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            started_unix_seconds: started.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootRecord {
    pub mus: Vec<DecimalComplex>,
    pub bae_residual: Decimal,
    /// Index of the matched eigenvalue branch of the staggered XXZ transfer matrix.
    pub branch: Option<usize>,
    pub xxz_distance: Decimal,
    pub d22_distance: Decimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionReport {
    pub status: String,
    pub starts: usize,
    pub converged_starts: usize,
    /// Sign choices for the fusion constants and the radical in x.
    pub branch_choice: String,
    pub eigenvalue_branches: usize,
    pub matched_branches: usize,
    pub root_sets: Vec<RootRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub command: String,
    pub environment: Environment,
    pub seed: SeedString,
    pub config: RunConfig,
    pub suites: Vec<SuiteReport>,
    pub solution: Option<SolutionReport>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(
        command: &str,
        config: RunConfig,
        suites: Vec<SuiteReport>,
        solution: Option<SolutionReport>,
    ) -> Self {
        let mut r = Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            environment: Environment::capture(),
            seed: config.seed,
            config,
            suites,
            solution,
            pass: false,
        };
        let pass = r.records().all(|c| c.pass);
        r.pass = pass;
        r
    }

    pub fn records(&self) -> impl Iterator<Item = &CheckRecord> {
        self.suites.iter().flat_map(|s| s.records.iter())
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report types serialize")
    }

    /// Parses and checks internal consistency: schema version, every record's
    /// pass flag against its numbers, and the overall flag.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let r: Self = serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(CliError::Report(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        for c in r.records() {
            if c.pass != (c.residual.0 <= c.tolerance.0) {
                return Err(CliError::Report(format!(
                    "record {:?} has an inconsistent pass flag",
                    c.name
                )));
            }
        }
        if r.pass != r.records().all(|c| c.pass) {
            return Err(CliError::Report(
                "overall pass flag disagrees with the records".into(),
            ));
        }
        Ok(r)
    }

    /// Human-readable summary, one line per record.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            out.push_str(&format!("[{}] {:.3}s\n", s.suite, s.wall_clock_seconds.0));
            for c in &s.records {
                out.push_str(&format!(
                    "  {} {:<48} {:>10.3e} <= {:.1e}\n",
                    if c.pass { "ok  " } else { "FAIL" },
                    c.name,
                    c.residual.0,
                    c.tolerance.0
                ));
            }
        }
        if let Some(sol) = &self.solution {
            out.push_str(&format!(
                "solution: {} root sets, {}/{} eigenvalue branches matched ({})\n",
                sol.root_sets.len(),
                sol.matched_branches,
                sol.eigenvalue_branches,
                sol.branch_choice
            ));
        }
        out.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        out
    }
}
