//! Run configuration: model parameters, suite selection, tolerances, sampling.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use d22_core::bae::{ResidualForm, SolveConfig};
use d22_core::d22::{BoundaryClass, D22Boundary};
use d22_core::transfer::{ChainSpec, StaggerPattern};
use d22_core::xxz::{AnisotropyParam, XxzBoundary};
use serde::{Deserialize, Serialize};

use crate::decimal::{Decimal, DecimalComplex};
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20240101;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ybe,
    Reflection,
    Rfactor,
    Kfactor,
    TransferFactorization,
    Fusion,
    Constraints,
    Tq,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Ybe,
        Suite::Reflection,
        Suite::Rfactor,
        Suite::Kfactor,
        Suite::TransferFactorization,
        Suite::Fusion,
        Suite::Constraints,
        Suite::Tq,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Ybe => "ybe",
            Suite::Reflection => "reflection",
            Suite::Rfactor => "rfactor",
            Suite::Kfactor => "kfactor",
            Suite::TransferFactorization => "transfer-factorization",
            Suite::Fusion => "fusion",
            Suite::Constraints => "constraints",
            Suite::Tq => "tq",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ClassArg {
    #[serde(rename = "I")]
    #[value(name = "I", alias = "1")]
    I,
    #[serde(rename = "II")]
    #[value(name = "II", alias = "2")]
    II,
}

impl From<ClassArg> for BoundaryClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::I => BoundaryClass::I,
            ClassArg::II => BoundaryClass::II,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub s: DecimalComplex,
    pub s1: DecimalComplex,
    pub s2: DecimalComplex,
    #[serde(rename = "sP")]
    pub s_p: DecimalComplex,
    #[serde(rename = "s1P")]
    pub s1_p: DecimalComplex,
    #[serde(rename = "s2P")]
    pub s2_p: DecimalComplex,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            s: 0.23.into(),
            s1: 0.51.into(),
            s2: (-0.29).into(),
            s_p: 0.41.into(),
            s1_p: (-0.33).into(),
            s2_p: 0.27.into(),
        }
    }
}

impl BoundaryConfig {
    pub fn params(&self) -> XxzBoundary {
        XxzBoundary {
            s: self.s.value(),
            s1: self.s1.value(),
            s2: self.s2.value(),
            s_p: self.s_p.value(),
            s1_p: self.s1_p.value(),
            s2_p: self.s2_p.value(),
        }
    }
}

/// Acceptance bounds per check family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ybe: Decimal,
    pub r_properties: Decimal,
    pub reflection: Decimal,
    pub rfactor: Decimal,
    pub kfactor: Decimal,
    pub commutativity: Decimal,
    pub factorization: Decimal,
    pub spectrum: Decimal,
    pub fusion: Decimal,
    pub quantum_det: Decimal,
    pub special_values: Decimal,
    pub asymptotic: Decimal,
    pub bae: Decimal,
    pub eigenvalue: Decimal,
    pub coverage: Decimal,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ybe: Decimal(1e-10),
            r_properties: Decimal(1e-10),
            reflection: Decimal(1e-9),
            rfactor: Decimal(1e-9),
            kfactor: Decimal(1e-9),
            commutativity: Decimal(1e-9),
            factorization: Decimal(1e-8),
            spectrum: Decimal(1e-8),
            fusion: Decimal(1e-10),
            quantum_det: Decimal(1e-9),
            special_values: Decimal(1e-9),
            asymptotic: Decimal(1e-6),
            bae: Decimal(1e-10),
            eigenvalue: Decimal(1e-8),
            coverage: Decimal(0.0),
        }
    }
}

impl Tolerances {
    /// Every bound replaced by `t`.
    pub fn uniform(t: f64) -> Self {
        let d = Decimal(t);
        Self {
            ybe: d,
            r_properties: d,
            reflection: d,
            rfactor: d,
            kfactor: d,
            commutativity: d,
            factorization: d,
            spectrum: d,
            fusion: d,
            quantum_det: d,
            special_values: d,
            asymptotic: d,
            bae: d,
            eigenvalue: d,
            coverage: d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Newton starts; unset means 256 per eigenvalue branch of a single site, 256·4^(N−1).
    pub starts: Option<usize>,
    pub max_iterations: usize,
    pub threshold: Decimal,
    pub dedup_tolerance: Decimal,
    pub form: ResidualForm,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveConfig::default();
        Self {
            starts: None,
            max_iterations: d.max_iterations,
            threshold: Decimal(d.threshold),
            dedup_tolerance: Decimal(d.dedup_tolerance),
            form: d.form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    pub eta: DecimalComplex,
    pub class: ClassArg,
    pub boundary: BoundaryConfig,
    /// Defaults to the pattern matching `class`.
    pub pattern: Option<StaggerPattern>,
    pub suites: Vec<Suite>,
    pub tolerances: Tolerances,
    /// Random points per identity check.
    pub samples: usize,
    /// Kept as a string: JSON readers may round integers above 2^53.
    pub seed: SeedString,
    pub solver: SolverConfig,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedString(pub u64);

impl Serialize for SeedString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for SeedString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.trim()
            .parse()
            .map(SeedString)
            .map_err(|_| serde::de::Error::custom(format!("seed must be a u64, got {s:?}")))
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 1,
            eta: 0.37.into(),
            class: ClassArg::I,
            boundary: BoundaryConfig::default(),
            pattern: None,
            suites: Suite::ALL.to_vec(),
            tolerances: Tolerances::default(),
            samples: 20,
            seed: SeedString(DEFAULT_SEED),
            solver: SolverConfig::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn class(&self) -> BoundaryClass {
        self.class.into()
    }

    pub fn pattern(&self) -> StaggerPattern {
        self.pattern
            .unwrap_or_else(|| StaggerPattern::for_class(self.class()))
    }

    pub fn seed(&self) -> u64 {
        self.seed.0
    }

    /// Model specification; fails on invalid η, chain size or stagger.
    pub fn chain(&self) -> Result<ChainSpec, CliError> {
        let eta =
            AnisotropyParam::new(self.eta.value()).map_err(|e| CliError::Config(e.to_string()))?;
        let spec = ChainSpec::new(
            self.n,
            eta,
            D22Boundary {
                class: self.class(),
                params: self.boundary.params(),
            },
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        self.pattern()
            .check_class(self.class())
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        Ok(spec)
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            starts: self.solver.starts.unwrap_or_else(|| {
                SolveConfig::default().starts * 4usize.pow(self.n.saturating_sub(1).min(8) as u32)
            }),
            max_iterations: self.solver.max_iterations,
            threshold: self.solver.threshold.0,
            dedup_tolerance: self.solver.dedup_tolerance.0,
            seed: self.seed(),
            form: self.solver.form,
            ..SolveConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert!(text.contains("\"re\": \"0.37\""));
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        cfg.chain().unwrap();
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"n": 2, "class": "II", "eta": {"re": "0.5", "im": "0.1"}}"#)
                .unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.pattern(), StaggerPattern::Shifted);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"eta": {"re": 0.37, "im": "0"}}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"n": 4}"#).unwrap();
        assert!(cfg.chain().is_err());
        let cfg: RunConfig =
            serde_json::from_str(r#"{"class": "I", "pattern": "shifted"}"#).unwrap();
        assert!(cfg.chain().is_err());
    }
}
