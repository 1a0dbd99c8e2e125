//! Seeded verification suites and their reports.

mod report;
mod suites;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{
    per_suite_path, save_report, save_reports, Aggregate, Outcome, SuiteReport, TrialRecord, Value,
};

use crate::error::{Error, Result};
use crate::numeric::Tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Thm1,
    Per1,
    Per1dual,
    Per2,
    Per3,
    Gamma,
    Theta,
    Equivalence,
    All,
}

impl SuiteKind {
    pub const INDIVIDUAL: [SuiteKind; 8] = [
        SuiteKind::Thm1,
        SuiteKind::Per1,
        SuiteKind::Per1dual,
        SuiteKind::Per2,
        SuiteKind::Per3,
        SuiteKind::Gamma,
        SuiteKind::Theta,
        SuiteKind::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Thm1 => "thm1",
            SuiteKind::Per1 => "per1",
            SuiteKind::Per1dual => "per1dual",
            SuiteKind::Per2 => "per2",
            SuiteKind::Per3 => "per3",
            SuiteKind::Gamma => "gamma",
            SuiteKind::Theta => "theta",
            SuiteKind::Equivalence => "equivalence",
            SuiteKind::All => "all",
        }
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Random,
    Harmonic,
    Gabor,
    Riesz,
    Onb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// A `(d, N)` pair written as `dxN` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub d: usize,
    pub n: usize,
}

impl FromStr for Dims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (d, n) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::ConfigInvalid(format!("dims must look like 3x6, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::ConfigInvalid(format!("bad dimension {v:?} in {s:?}")))
        };
        Ok(Dims {
            d: parse(d)?,
            n: parse(n)?,
        })
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.d, self.n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: SuiteKind,
    pub dims: Vec<Dims>,
    pub trials: usize,
    pub seed: u64,
    pub tol: Tol,
    pub generator: GeneratorKind,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: SuiteKind::All,
            dims: vec![Dims { d: 3, n: 6 }],
            trials: 100,
            seed: 0,
            tol: Tol::default(),
            generator: GeneratorKind::Random,
            output_path: None,
            format: OutputFormat::Json,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::ConfigInvalid("trials must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::ConfigInvalid(
                "at least one dims entry is required".into(),
            ));
        }
        self.tol
            .validate()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        for dims in &self.dims {
            if dims.d == 0 || dims.n < dims.d {
                return Err(Error::ConfigInvalid(format!(
                    "dims {dims} must satisfy 1 ≤ d ≤ N"
                )));
            }
            match self.generator {
                GeneratorKind::Riesz | GeneratorKind::Onb if dims.n != dims.d => {
                    return Err(Error::ConfigInvalid(format!(
                        "generator {:?} needs N = d, got {dims}",
                        self.generator
                    )));
                }
                GeneratorKind::Gabor
                    if crate::generators::gabor_lattice(dims.d, dims.n).is_none() =>
                {
                    return Err(Error::ConfigInvalid(format!(
                        "no Gabor lattice a, b | d with (d/a)(d/b) = N for {dims}"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Runs one suite; `SuiteKind::All` is rejected here (see [`run`]).
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    if cfg.suite == SuiteKind::All {
        return Err(Error::ConfigInvalid(
            "run_suite takes a single suite; use run for `all`".into(),
        ));
    }
    let start = Instant::now();
    let columns = suites::columns(cfg.suite);
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let dims = cfg.dims[trial % cfg.dims.len()];
            let seed = crate::generators::sub_seed(cfg.seed, cfg.suite.stream(), trial as u64);
            let ctx = suites::TrialContext {
                trial,
                seed,
                dims,
                generator: cfg.generator,
                tol: cfg.tol,
            };
            match suites::run_trial(cfg.suite, &ctx) {
                Ok((values, outcome)) => TrialRecord {
                    trial,
                    seed,
                    d: dims.d,
                    n: dims.n,
                    values,
                    outcome,
                    error: None,
                },
                Err(e) => TrialRecord {
                    trial,
                    seed,
                    d: dims.d,
                    n: dims.n,
                    values: vec![Value::Missing; columns.len()],
                    outcome: Outcome::Fail,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SuiteReport::new(cfg, columns, records, wall_time_ms))
}

/// Runs the configured suite, expanding `all` into every individual suite.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    let kinds: Vec<SuiteKind> = if cfg.suite == SuiteKind::All {
        SuiteKind::INDIVIDUAL.to_vec()
    } else {
        vec![cfg.suite]
    };
    kinds
        .into_iter()
        .map(|suite| {
            run_suite(&ExperimentConfig {
                suite,
                ..cfg.clone()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse() {
        assert_eq!("3x6".parse::<Dims>().unwrap(), Dims { d: 3, n: 6 });
        assert!("3-6".parse::<Dims>().is_err());
        assert!("ax6".parse::<Dims>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            dims: vec![Dims { d: 4, n: 3 }],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            generator: GeneratorKind::Onb,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            generator: GeneratorKind::Gabor,
            dims: vec![Dims { d: 4, n: 8 }],
            ..Default::default()
        };
        assert!(cfg.validate().is_ok());
        let cfg = ExperimentConfig {
            generator: GeneratorKind::Gabor,
            dims: vec![Dims { d: 4, n: 5 }],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn run_suite_rejects_all() {
        assert!(matches!(
            run_suite(&ExperimentConfig::default()),
            Err(Error::ConfigInvalid(_))
        ));
    }
}
