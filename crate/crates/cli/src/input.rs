use std::ops::RangeInclusive;
use std::path::Path;

use ergo_core::averages::Horizon;
use ergo_core::io::{CertificateFile, FiniteCase, LoadedSystem, SampledCase, SystemDescription};
use ergo_core::maximal::lambda_grid;
use ergo_core::{ExactInvariant, Rational, Scalar};

use crate::error::{CliError, CliResult};
use crate::SystemArg;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn line_of(e: &serde_json::Error) -> Option<usize> {
    Some(e.line()).filter(|&l| l > 0)
}

pub fn load_system(path: &Path) -> CliResult<LoadedSystem> {
    let text = read_text(path)?;
    let desc: SystemDescription = serde_json::from_str(&text).map_err(|e| CliError::config(path, line_of(&e), e))?;
    desc.load().map_err(|e| CliError::config(path, None, e))
}

pub fn load_system_arg(arg: &SystemArg) -> CliResult<LoadedSystem> {
    let loaded = load_system(&arg.system)?;
    match arg.truncate {
        Some(level) => loaded
            .truncated(level)
            .map_err(|e| CliError::config(&arg.system, None, e)),
        None => Ok(loaded),
    }
}

pub fn load_certificate(path: &Path) -> CliResult<CertificateFile> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::config(path, line_of(&e), e))
}

pub fn require_finite<'a>(loaded: &'a LoadedSystem, path: &Path, command: &str) -> CliResult<&'a FiniteCase<Rational>> {
    loaded
        .as_finite()
        .ok_or_else(|| CliError::config(path, None, format!("{command} needs a finite system")))
}

pub fn require_sampled<'a>(loaded: &'a LoadedSystem, path: &Path, command: &str) -> CliResult<&'a SampledCase<f64>> {
    loaded
        .as_sampled()
        .ok_or_else(|| CliError::config(path, None, format!("{command} needs a sampled system")))
}

/// Inclusive `A..B` (also accepts `A..=B`).
pub fn parse_range(text: &str, what: &str) -> CliResult<RangeInclusive<u64>> {
    let bad = || CliError::Usage(format!("{what} must look like A..B, got {text:?}"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(CliError::Usage(format!("{what} {text:?} is empty")));
    }
    Ok(a..=b)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    FromSystem,
    Grid,
    Constant(String),
    PerCycle(Vec<String>),
}

impl LambdaSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let text = text.trim();
        Ok(match text {
            "system" => LambdaSpec::FromSystem,
            "grid" => LambdaSpec::Grid,
            _ => {
                let parts: Vec<String> = text.split(',').map(|p| p.trim().to_string()).collect();
                for p in &parts {
                    Rational::parse(p).map_err(|e| CliError::Usage(format!("--lambda: {e}")))?;
                }
                if parts.len() == 1 {
                    LambdaSpec::Constant(parts.into_iter().next().unwrap())
                } else {
                    LambdaSpec::PerCycle(parts)
                }
            }
        })
    }

    /// The invariant functions to test at horizon `N`.
    pub fn finite(&self, case: &FiniteCase<Rational>, path: &Path, horizon: Horizon) -> CliResult<Vec<ExactInvariant>> {
        let parse = |v: &String| Rational::parse(v).map_err(CliError::from);
        Ok(match self {
            LambdaSpec::FromSystem => vec![case
                .lambda
                .clone()
                .ok_or_else(|| CliError::config(path, None, "no lambda in system file; pass --lambda"))?],
            LambdaSpec::Grid => lambda_grid(&case.system, &case.f, horizon)?,
            LambdaSpec::Constant(c) => vec![ExactInvariant::constant(&case.system, parse(c)?)],
            LambdaSpec::PerCycle(values) => vec![ExactInvariant::new(
                &case.system,
                values.iter().map(parse).collect::<CliResult<_>>()?,
            )?],
        })
    }

    pub fn single_finite(&self, case: &FiniteCase<Rational>, path: &Path) -> CliResult<ExactInvariant> {
        if *self == LambdaSpec::Grid {
            return Err(CliError::Usage(
                "--lambda grid is only accepted by verify-maximal".into(),
            ));
        }
        Ok(self.finite(case, path, Horizon::Full)?.remove(0))
    }

    pub fn sampled(&self, case: &SampledCase<f64>, path: &Path) -> CliResult<f64> {
        match self {
            LambdaSpec::FromSystem => case
                .lambda
                .ok_or_else(|| CliError::config(path, None, "no lambda in system file; pass --lambda")),
            LambdaSpec::Constant(c) => Ok(f64::parse(c)?),
            _ => Err(CliError::Usage(
                "sampled systems take a single constant --lambda".into(),
            )),
        }
    }
}
