//! JSON interchange: system description files and decomposition
//! certificates. Rationals travel as `"p/q"` strings, floats as decimal
//! strings.

use serde::{Deserialize, Serialize};

use crate::decomposition::{Block, DecompositionCertificate};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::{golden_alpha, Evaluator, FiniteSystem, InvariantFunction, Observable, OrbitStart, SampledSystem};
use crate::Rational;

/// Catalog observable as written in a system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorSpec {
    Coordinate,
    Cosine,
    FirstSymbol { symbol: usize },
    Indicator { lo: String, hi: String },
    SymbolTable { values: Vec<String> },
}

/// Top-level system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemDescription {
    Finite {
        map: Vec<usize>,
        cycle_weights: Vec<String>,
        f: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<Vec<String>>,
    },
    Rotation {
        /// `"golden"` or a decimal / `"p/q"` string.
        alpha: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        f: EvaluatorSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<String>,
    },
    BernoulliShift {
        p: String,
        seed: u64,
        f: EvaluatorSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<String>,
    },
    MarkovShift {
        matrix: Vec<Vec<String>>,
        stationary: Vec<String>,
        seed: u64,
        f: EvaluatorSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<String>,
    },
}

/// A finite system with its observable and (optional) invariant function.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCase<S> {
    pub system: FiniteSystem<S>,
    pub f: Observable<S>,
    pub lambda: Option<InvariantFunction<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCase<F> {
    pub system: SampledSystem<F>,
    pub start: OrbitStart<F>,
    pub f: Evaluator<F>,
    pub lambda: Option<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSystem {
    Finite(FiniteCase<Rational>),
    Sampled(SampledCase<f64>),
}

impl LoadedSystem {
    /// `φ_s` of the observable. Sampled systems have closed-form observables
    /// only and cannot be truncated.
    pub fn truncated(&self, level: u64) -> Result<LoadedSystem> {
        match self {
            LoadedSystem::Finite(case) => Ok(LoadedSystem::Finite(FiniteCase {
                f: crate::averages::truncate_observable(&case.f, level)?,
                ..case.clone()
            })),
            LoadedSystem::Sampled(_) => Err(Error::TruncationOnSampledSystem),
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteCase<Rational>> {
        match self {
            LoadedSystem::Finite(c) => Some(c),
            LoadedSystem::Sampled(_) => None,
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledCase<f64>> {
        match self {
            LoadedSystem::Sampled(c) => Some(c),
            LoadedSystem::Finite(_) => None,
        }
    }
}

fn parse_all<S: Scalar>(values: &[String]) -> Result<Vec<S>> {
    values.iter().map(|v| S::parse(v)).collect()
}

fn render_all<S: Scalar>(values: &[S]) -> Vec<String> {
    values.iter().map(Scalar::render).collect()
}

impl EvaluatorSpec {
    pub fn to_evaluator(&self) -> Result<Evaluator<f64>> {
        Ok(match self {
            EvaluatorSpec::Coordinate => Evaluator::Coordinate,
            EvaluatorSpec::Cosine => Evaluator::Cosine,
            EvaluatorSpec::FirstSymbol { symbol } => Evaluator::FirstSymbol { symbol: *symbol },
            EvaluatorSpec::Indicator { lo, hi } => Evaluator::Indicator {
                lo: f64::parse(lo)?,
                hi: f64::parse(hi)?,
            },
            EvaluatorSpec::SymbolTable { values } => Evaluator::SymbolTable {
                values: parse_all(values)?,
            },
        })
    }
}

fn parse_alpha(alpha: &str) -> Result<f64> {
    if alpha.trim().eq_ignore_ascii_case("golden") {
        Ok(golden_alpha())
    } else {
        f64::parse(alpha)
    }
}

impl SystemDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("system descriptions serialize")
    }

    /// Describes a finite case with the given `λ`.
    pub fn from_finite<S: Scalar>(
        system: &FiniteSystem<S>,
        f: &Observable<S>,
        lambda: Option<&InvariantFunction<S>>,
    ) -> Self {
        SystemDescription::Finite {
            map: system.map().to_vec(),
            cycle_weights: render_all(&system.cycle_weights()),
            f: render_all(f.values()),
            lambda: lambda.map(|l| render_all(l.per_cycle())),
        }
    }

    /// Validates and builds the model objects.
    pub fn load(&self) -> Result<LoadedSystem> {
        match self {
            SystemDescription::Finite {
                map,
                cycle_weights,
                f,
                lambda,
            } => {
                let system = FiniteSystem::new(map.clone(), parse_all(cycle_weights)?)?;
                let f = Observable::new(parse_all(f)?);
                f.check_against(&system)?;
                let lambda = lambda
                    .as_ref()
                    .map(|l| InvariantFunction::new(&system, parse_all(l)?))
                    .transpose()?;
                Ok(LoadedSystem::Finite(FiniteCase { system, f, lambda }))
            }
            SystemDescription::Rotation {
                alpha,
                x0,
                seed,
                f,
                lambda,
            } => {
                let system = SampledSystem::rotation(parse_alpha(alpha)?)?.with_seed(seed.unwrap_or(0));
                let start = match (x0, seed) {
                    (Some(x), _) => OrbitStart::Point(f64::parse(x)?),
                    (None, Some(_)) => OrbitStart::Seeded,
                    (None, None) => OrbitStart::Point(0.0),
                };
                sampled_case(system, start, f, lambda)
            }
            SystemDescription::BernoulliShift { p, seed, f, lambda } => {
                let system = SampledSystem::bernoulli_shift(f64::parse(p)?, *seed)?;
                sampled_case(system, OrbitStart::Seeded, f, lambda)
            }
            SystemDescription::MarkovShift {
                matrix,
                stationary,
                seed,
                f,
                lambda,
            } => {
                let matrix = matrix.iter().map(|r| parse_all(r)).collect::<Result<Vec<_>>>()?;
                let system = SampledSystem::markov_shift(matrix, parse_all(stationary)?, *seed)?;
                sampled_case(system, OrbitStart::Seeded, f, lambda)
            }
        }
    }
}

fn sampled_case(
    system: SampledSystem<f64>,
    start: OrbitStart<f64>,
    f: &EvaluatorSpec,
    lambda: &Option<String>,
) -> Result<LoadedSystem> {
    let f = f.to_evaluator()?;
    system.supports(&f)?;
    let lambda = lambda.as_deref().map(f64::parse).transpose()?;
    Ok(LoadedSystem::Sampled(SampledCase {
        system,
        start,
        f,
        lambda,
    }))
}

/// Certificate file. `x` names the orbit start so that the verifier can
/// rebuild the window from the system file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    pub m: usize,
    #[serde(rename = "N")]
    pub horizon: usize,
    pub blocks: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<usize>>,
    pub tail_start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_sums: Option<Vec<String>>,
    pub total_sum: String,
    pub lower_bound: String,
}

impl CertificateFile {
    pub fn from_certificate<S: Scalar>(cert: &DecompositionCertificate<S>, x: Option<usize>) -> Self {
        Self {
            x,
            m: cert.m,
            horizon: cert.horizon,
            blocks: cert.blocks.iter().map(|b| [b.start, b.len]).collect(),
            gaps: Some(cert.gaps.clone()),
            tail_start: cert.tail_start,
            block_sums: Some(render_all(&cert.block_sums)),
            total_sum: cert.total_sum.render(),
            lower_bound: cert.lower_bound.render(),
        }
    }

    /// Rebuilds the certificate. Missing `gaps` default to every position
    /// before the tail not covered by a block; missing `block_sums` are
    /// left empty, which the verifier reports.
    pub fn to_certificate<S: Scalar>(&self) -> Result<DecompositionCertificate<S>> {
        let blocks: Vec<Block> = self.blocks.iter().map(|&[start, len]| Block { start, len }).collect();
        let gaps = match &self.gaps {
            Some(g) => g.clone(),
            None => {
                let mut covered = vec![false; self.tail_start];
                for b in &blocks {
                    for c in covered.iter_mut().take(b.end().min(self.tail_start)).skip(b.start) {
                        *c = true;
                    }
                }
                (0..self.tail_start).filter(|&k| !covered[k]).collect()
            }
        };
        let block_sums = match &self.block_sums {
            Some(s) => parse_all(s)?,
            None => Vec::new(),
        };
        Ok(DecompositionCertificate {
            m: self.m,
            horizon: self.horizon,
            blocks,
            gaps,
            tail_start: self.tail_start,
            block_sums,
            total_sum: S::parse(&self.total_sum)?,
            lower_bound: S::parse(&self.lower_bound)?,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }
}
