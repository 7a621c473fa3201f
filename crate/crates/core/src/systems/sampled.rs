//! Parametric infinite systems evaluated along sampled orbits: circle
//! rotations, Bernoulli shifts and stationary Markov shifts.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::finite::OrbitTrace;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerance for stochastic-matrix and stationarity checks.
pub const MARKOV_TOLERANCE: f64 = 1e-12;

/// Bits read ahead to rebuild a `[0, 1)` coordinate from a binary stream.
/// 53 bits saturate the `f64` mantissa.
pub const COORDINATE_BITS: usize = 53;

#[derive(Debug, Clone, PartialEq)]
pub enum SampledKind<F> {
    /// `x ↦ x + α mod 1` on the circle with Lebesgue measure.
    Rotation { alpha: F },
    /// One-sided shift on `{0,1}^ℕ` with i.i.d. symbols, `P(1) = p`.
    /// The doubling map `x ↦ 2x mod 1` is this shift at `p = 1/2`, read
    /// through the coordinate observable.
    BernoulliShift { p: F },
    /// One-sided shift on a stationary Markov chain.
    MarkovShift { matrix: Vec<Vec<F>>, stationary: Vec<F> },
}

impl<F> SampledKind<F> {
    pub fn name(&self) -> &'static str {
        match self {
            SampledKind::Rotation { .. } => "rotation",
            SampledKind::BernoulliShift { .. } => "bernoulli_shift",
            SampledKind::MarkovShift { .. } => "markov_shift",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSystem<F> {
    kind: SampledKind<F>,
    seed: u64,
}

/// Closed catalog of observables on sampled systems.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator<F> {
    /// The point of `[0, 1)` itself (rotation), or the number whose binary
    /// digits are the symbol stream (Bernoulli shift).
    Coordinate,
    /// `cos(2π x)` of the coordinate.
    Cosine,
    /// `1` if the current symbol equals `symbol`, else `0`.
    FirstSymbol { symbol: usize },
    /// `1` on `[lo, hi)` of the coordinate, else `0`.
    Indicator { lo: F, hi: F },
    /// `values[s]` where `s` is the current symbol.
    SymbolTable { values: Vec<F> },
}

impl<F: Real> Evaluator<F> {
    pub fn name(&self) -> &'static str {
        match self {
            Evaluator::Coordinate => "coordinate",
            Evaluator::Cosine => "cosine",
            Evaluator::FirstSymbol { .. } => "first_symbol",
            Evaluator::Indicator { .. } => "indicator",
            Evaluator::SymbolTable { .. } => "symbol_table",
        }
    }

    /// Known `‖f‖∞` of the catalog entry.
    pub fn sup_norm(&self) -> F {
        match self {
            Evaluator::Coordinate | Evaluator::Cosine | Evaluator::FirstSymbol { .. } => F::one(),
            Evaluator::Indicator { .. } => F::one(),
            Evaluator::SymbolTable { values } => values.iter().fold(F::zero(), |acc, v| acc.max(v.abs())),
        }
    }

    fn on_coordinate(&self, x: F) -> F {
        match self {
            Evaluator::Coordinate => x,
            Evaluator::Cosine => (F::lit(std::f64::consts::TAU) * x).cos(),
            Evaluator::Indicator { lo, hi } => {
                if x >= *lo && x < *hi {
                    F::one()
                } else {
                    F::zero()
                }
            }
            _ => unreachable!("symbolic evaluator on coordinate"),
        }
    }

    fn on_symbol(&self, s: usize) -> F {
        match self {
            Evaluator::FirstSymbol { symbol } => {
                if s == *symbol {
                    F::one()
                } else {
                    F::zero()
                }
            }
            Evaluator::SymbolTable { values } => values[s],
            _ => unreachable!("coordinate evaluator on symbol"),
        }
    }

    fn uses_coordinate(&self) -> bool {
        matches!(
            self,
            Evaluator::Coordinate | Evaluator::Cosine | Evaluator::Indicator { .. }
        )
    }
}

impl<F: fmt::Display> fmt::Display for SampledSystem<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SampledKind::Rotation { alpha } => write!(f, "rotation(alpha={alpha})"),
            SampledKind::BernoulliShift { p } => write!(f, "bernoulli_shift(p={p}, seed={})", self.seed),
            SampledKind::MarkovShift { stationary, .. } => {
                write!(f, "markov_shift(states={}, seed={})", stationary.len(), self.seed)
            }
        }
    }
}

/// Start state of a sampled orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitStart<F> {
    /// Explicit point of `[0, 1)`; rotations only.
    Point(F),
    /// Use the system's own seed: a uniform start for rotations, the symbol
    /// stream for shifts.
    Seeded,
}

fn open_unit<F: Real>(v: F, what: &str) -> Result<()> {
    if v > F::zero() && v < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidSampledSystem(format!("{what} = {v} must lie in (0, 1)")))
    }
}

impl<F: Real> SampledSystem<F> {
    pub fn rotation(alpha: F) -> Result<Self> {
        open_unit(alpha, "alpha")?;
        Ok(Self {
            kind: SampledKind::Rotation { alpha },
            seed: 0,
        })
    }

    /// Rotation by the golden mean `(√5 − 1)/2`.
    pub fn golden_rotation() -> Self {
        Self::rotation(golden_alpha()).expect("golden mean lies in (0, 1)")
    }

    pub fn bernoulli_shift(p: F, seed: u64) -> Result<Self> {
        open_unit(p, "p")?;
        Ok(Self {
            kind: SampledKind::BernoulliShift { p },
            seed,
        })
    }

    /// The doubling map, realized as the fair-coin shift.
    pub fn doubling(seed: u64) -> Self {
        Self::bernoulli_shift(F::lit(0.5), seed).expect("1/2 lies in (0, 1)")
    }

    pub fn markov_shift(matrix: Vec<Vec<F>>, stationary: Vec<F>, seed: u64) -> Result<Self> {
        let d = matrix.len();
        let tol = F::lit(MARKOV_TOLERANCE);
        if d == 0 || stationary.len() != d || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidSampledSystem(
                "transition matrix must be square and match the stationary vector".into(),
            ));
        }
        if matrix
            .iter()
            .flatten()
            .chain(&stationary)
            .any(|v| *v < F::zero() || !v.is_finite())
        {
            return Err(Error::InvalidSampledSystem("negative or non-finite probability".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            let sum = row.iter().fold(F::zero(), |a, &b| a + b);
            if (sum - F::one()).abs() > tol {
                return Err(Error::InvalidSampledSystem(format!("row {i} sums to {sum}")));
            }
        }
        let total = stationary.iter().fold(F::zero(), |a, &b| a + b);
        if (total - F::one()).abs() > tol {
            return Err(Error::InvalidSampledSystem(format!(
                "stationary vector sums to {total}"
            )));
        }
        for j in 0..d {
            let image = (0..d).fold(F::zero(), |a, i| a + stationary[i] * matrix[i][j]);
            if (image - stationary[j]).abs() > tol {
                return Err(Error::InvalidSampledSystem(format!(
                    "stationary vector is not invariant at state {j}: (πP)_j = {image}, π_j = {}",
                    stationary[j]
                )));
            }
        }
        Ok(Self {
            kind: SampledKind::MarkovShift { matrix, stationary },
            seed,
        })
    }

    pub fn kind(&self) -> &SampledKind<F> {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks that `f` is defined on this system's state space.
    pub fn supports(&self, f: &Evaluator<F>) -> Result<()> {
        let ok = match (&self.kind, f) {
            (SampledKind::Rotation { .. }, e) => e.uses_coordinate(),
            (SampledKind::BernoulliShift { .. }, Evaluator::FirstSymbol { symbol }) => *symbol < 2,
            (SampledKind::BernoulliShift { .. }, Evaluator::SymbolTable { values }) => values.len() == 2,
            (SampledKind::BernoulliShift { .. }, e) => e.uses_coordinate(),
            (SampledKind::MarkovShift { stationary, .. }, Evaluator::FirstSymbol { symbol }) => {
                *symbol < stationary.len()
            }
            (SampledKind::MarkovShift { stationary, .. }, Evaluator::SymbolTable { values }) => {
                values.len() == stationary.len()
            }
            (SampledKind::MarkovShift { .. }, _) => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownObservableForSystem {
                observable: f.name().into(),
                system: self.kind.name().into(),
            })
        }
    }

    /// Space average `∫ f dμ` when it is known in closed form.
    pub fn space_average(&self, f: &Evaluator<F>) -> Option<F> {
        let half = F::lit(0.5);
        match (&self.kind, f) {
            (SampledKind::Rotation { .. } | SampledKind::BernoulliShift { .. }, Evaluator::Cosine) => {
                // Lebesgue for the rotation; for the shift only at p = 1/2.
                match &self.kind {
                    SampledKind::BernoulliShift { p } if *p != half => None,
                    _ => Some(F::zero()),
                }
            }
            (SampledKind::Rotation { .. }, Evaluator::Coordinate) => Some(half),
            (SampledKind::Rotation { .. }, Evaluator::Indicator { lo, hi }) => {
                Some((hi.min(F::one()) - lo.max(F::zero())).max(F::zero()))
            }
            (SampledKind::BernoulliShift { p }, Evaluator::Coordinate) => Some(*p),
            (SampledKind::BernoulliShift { p }, Evaluator::FirstSymbol { symbol }) => {
                Some(if *symbol == 1 { *p } else { F::one() - *p })
            }
            (SampledKind::BernoulliShift { p }, Evaluator::SymbolTable { values }) => {
                Some(values[0] * (F::one() - *p) + values[1] * *p)
            }
            (SampledKind::MarkovShift { stationary, .. }, Evaluator::FirstSymbol { symbol }) => {
                Some(stationary[*symbol])
            }
            (SampledKind::MarkovShift { stationary, .. }, Evaluator::SymbolTable { values }) => {
                Some(stationary.iter().zip(values).fold(F::zero(), |a, (&p, &v)| a + p * v))
            }
            _ => None,
        }
    }

    fn symbol_stream(&self, len: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match &self.kind {
            SampledKind::BernoulliShift { p } => {
                let p = p.to_f64().expect("finite p");
                (0..len).map(|_| usize::from(rng.gen::<f64>() < p)).collect()
            }
            SampledKind::MarkovShift { matrix, stationary } => {
                let draw = |rng: &mut ChaCha8Rng, probs: &[F]| {
                    let u = rng.gen::<f64>();
                    let mut acc = 0.0;
                    for (i, p) in probs.iter().enumerate() {
                        acc += p.to_f64().expect("finite probability");
                        if u < acc {
                            return i;
                        }
                    }
                    // Rounding can leave u ≥ acc; fall back to the last state with mass.
                    probs.iter().rposition(|p| *p > F::zero()).unwrap_or(0)
                };
                let mut out = Vec::with_capacity(len);
                if len > 0 {
                    let mut s = draw(&mut rng, stationary);
                    out.push(s);
                    while out.len() < len {
                        s = draw(&mut rng, &matrix[s]);
                        out.push(s);
                    }
                }
                out
            }
            SampledKind::Rotation { .. } => unreachable!("rotations have no symbol stream"),
        }
    }

    /// Evaluates `f` along `m` steps of the orbit.
    pub fn sample_orbit(
        &self,
        start: OrbitStart<F>,
        m: usize,
        f: &Evaluator<F>,
    ) -> Result<OrbitTrace<F, OrbitStart<F>>> {
        if m == 0 {
            return Err(Error::ZeroHorizon);
        }
        self.supports(f)?;
        let f_values = match &self.kind {
            SampledKind::Rotation { alpha } => {
                let mut x = match start {
                    OrbitStart::Point(x) => {
                        if !(x >= F::zero() && x < F::one()) {
                            return Err(Error::InvalidSampledSystem(format!("start point {x} outside [0, 1)")));
                        }
                        x
                    }
                    OrbitStart::Seeded => F::lit(ChaCha8Rng::seed_from_u64(self.seed).gen::<f64>()),
                };
                let mut values = Vec::with_capacity(m);
                for _ in 0..m {
                    values.push(f.on_coordinate(x));
                    x = (x + *alpha).fract();
                }
                values
            }
            SampledKind::BernoulliShift { .. } | SampledKind::MarkovShift { .. } => {
                if let OrbitStart::Point(_) = start {
                    return Err(Error::InvalidSampledSystem(
                        "shift orbits start from the system seed, not a point".into(),
                    ));
                }
                if f.uses_coordinate() {
                    let bits = self.symbol_stream(m + COORDINATE_BITS);
                    let half = F::lit(0.5);
                    (0..m)
                        .map(|k| {
                            // Horner from the far end keeps every partial sum exact.
                            let x = bits[k..k + COORDINATE_BITS]
                                .iter()
                                .rev()
                                .fold(F::zero(), |acc, &b| (acc + F::from_usize(b).unwrap()) * half);
                            f.on_coordinate(x)
                        })
                        .collect()
                } else {
                    self.symbol_stream(m).into_iter().map(|s| f.on_symbol(s)).collect()
                }
            }
        };
        Ok(OrbitTrace {
            start,
            f_values,
            lambda_value: None,
        })
    }
}

/// `(√5 − 1)/2`.
pub fn golden_alpha<F: Real>() -> F {
    (F::lit(5.0).sqrt() - F::one()) / F::lit(2.0)
}
