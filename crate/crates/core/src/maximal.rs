//! Exact verification of the maximal ergodic inequality on finite systems:
//! per-horizon verdicts, the `N` sweep, the truncation extension from bounded
//! to general observables, and the `λ` constructions that yield the
//! pointwise ergodic theorem.

use std::ops::RangeInclusive;

use crate::averages::{
    exceedance_from_profile, limit_as_invariant, limit_averages, maximal_profile, truncate_observable, ExceedanceSet,
    Horizon,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::systems::{FiniteSystem, InvariantFunction, Observable};

/// `∫_{E_N}(f − λ)` and whether it is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalVerdict<S> {
    pub horizon: Horizon,
    /// `λ` per cycle.
    pub lambda: Vec<S>,
    pub integral: S,
    pub holds: bool,
    pub exceedance: ExceedanceSet<S>,
}

/// Evaluates `∫_{E_N}(f − λ) = Σ_{x ∈ E_N} μ(x)(f(x) − λ(x))`.
pub fn maximal_integral<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    horizon: Horizon,
    lambda: &InvariantFunction<S>,
) -> Result<MaximalVerdict<S>> {
    lambda.check_against(system)?;
    let profile = maximal_profile(system, f, horizon)?;
    let exceedance = exceedance_from_profile(system, &profile, lambda);
    let integral = (0..system.len())
        .filter(|&x| exceedance.contains(x))
        .fold(S::zero(), |acc, x| {
            acc + system.weight(x).clone() * (f.at(x).clone() - lambda.at(x).clone())
        });
    Ok(MaximalVerdict {
        horizon,
        lambda: lambda.per_cycle().to_vec(),
        holds: integral >= S::zero(),
        integral,
        exceedance,
    })
}

/// Result of sweeping `N` over a range.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremSweep<S> {
    pub verdicts: Vec<MaximalVerdict<S>>,
    /// `E_N ⊆ E_{N+1}` for every consecutive pair in the range.
    pub nested: bool,
    /// Verdicts at `N ≥` max cycle length all coincide (vacuous if the range
    /// never reaches that length).
    pub stabilized: bool,
    /// The stabilized verdict, i.e. the inequality over `{f* > λ}` itself.
    pub full: MaximalVerdict<S>,
}

impl<S: Scalar> TheoremSweep<S> {
    pub fn all_hold(&self) -> bool {
        self.full.holds && self.verdicts.iter().all(|v| v.holds)
    }

    pub fn is_consistent(&self) -> bool {
        self.all_hold() && self.nested && self.stabilized
    }
}

/// One verdict per `N` in `horizons`, plus nesting and stabilization checks
/// and the verdict for `f*` itself.
pub fn verify_maximal_theorem<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: &InvariantFunction<S>,
    horizons: RangeInclusive<usize>,
) -> Result<TheoremSweep<S>> {
    if horizons.is_empty() {
        return Err(Error::EmptyHorizonRange);
    }
    let verdicts = horizons
        .map(|n| maximal_integral(system, f, Horizon::Finite(n), lambda))
        .collect::<Result<Vec<_>>>()?;
    let nested = verdicts
        .windows(2)
        .all(|w| w[0].exceedance.is_subset_of(&w[1].exceedance));
    let stable_from = system.max_cycle_len();
    let same = |a: &MaximalVerdict<S>, b: &MaximalVerdict<S>| {
        a.integral == b.integral && a.exceedance.members == b.exceedance.members
    };
    let full = maximal_integral(system, f, Horizon::Full, lambda)?;
    let stabilized = verdicts
        .iter()
        .filter(|v| matches!(v.horizon, Horizon::Finite(n) if n >= stable_from))
        .all(|v| same(v, &full));
    Ok(TheoremSweep {
        verdicts,
        nested,
        stabilized,
        full,
    })
}

/// Invariant functions spanning below, onto, inside and above the range of
/// `f*_N`, for sweeping the inequality over many `λ`.
pub fn lambda_grid<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    horizon: Horizon,
) -> Result<Vec<InvariantFunction<S>>> {
    let profile = maximal_profile(system, f, horizon)?;
    let lo = profile.values.iter().cloned().reduce(S::min_of).expect("nonempty");
    let hi = profile.values.iter().cloned().reduce(S::max_of).expect("nonempty");
    let two = S::from_count(2);
    let per_cycle_min: Vec<S> = system
        .cycles()
        .iter()
        .map(|c| {
            c.iter()
                .map(|&x| profile.values[x].clone())
                .reduce(S::min_of)
                .expect("nonempty cycle")
        })
        .collect();
    let per_cycle_max: Vec<S> = system
        .cycles()
        .iter()
        .map(|c| {
            c.iter()
                .map(|&x| profile.values[x].clone())
                .reduce(S::max_of)
                .expect("nonempty cycle")
        })
        .collect();
    let mut grid = vec![
        InvariantFunction::constant(system, lo.clone() - S::one()),
        InvariantFunction::constant(system, lo.clone()),
        InvariantFunction::constant(system, (lo + hi.clone()) / two),
        InvariantFunction::constant(system, hi.clone()),
        InvariantFunction::constant(system, hi + S::one()),
        InvariantFunction::constant(system, S::zero()),
        InvariantFunction::new(system, per_cycle_min)?,
        InvariantFunction::new(system, per_cycle_max)?,
    ];
    grid.push(limit_as_invariant(system, f)?);
    Ok(grid)
}

/// The inequality for `f` against `λ` and for `−f` against `−λ`, together
/// with the pointwise identity `Ā(−f) = −A̲(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegationReport<S> {
    pub direct: MaximalVerdict<S>,
    pub negated: MaximalVerdict<S>,
    pub limit_identity: bool,
    /// `∫Ā(−f) ≤ ∫(−f)`, i.e. `−∫A̲(f) ≤ −∫f`.
    pub negated_integral_bound: bool,
}

impl<S: Scalar> NegationReport<S> {
    pub fn holds(&self) -> bool {
        self.direct.holds && self.negated.holds && self.limit_identity && self.negated_integral_bound
    }
}

pub fn negation_check<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: &InvariantFunction<S>,
    horizon: Horizon,
) -> Result<NegationReport<S>> {
    let direct = maximal_integral(system, f, horizon, lambda)?;
    let neg_f = f.negated();
    let negated = maximal_integral(system, &neg_f, horizon, &lambda.negated())?;
    let of_f = limit_averages(system, f)?;
    let of_neg = limit_averages(system, &neg_f)?;
    let limit_identity = of_neg.upper.iter().zip(&of_f.lower).all(|(u, l)| *u == -l.clone());
    let negated_integral_bound =
        of_neg.integral_upper <= of_neg.integral_f && -of_f.integral_lower.clone() <= -of_f.integral_f.clone();
    Ok(NegationReport {
        direct,
        negated,
        limit_identity,
        negated_integral_bound,
    })
}

/// One truncation level `s` of the extension argument.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationStep<S> {
    pub level: u64,
    /// `∫_{(φ_s)*_N > λ}(φ_s − λ)`.
    pub integral: S,
    /// `μ({(φ_s)*_N > λ} △ {f*_N > λ})`.
    pub symmetric_difference: S,
    /// `‖φ_s − f‖₁`.
    pub l1_distance: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport<S> {
    pub horizon: Horizon,
    pub steps: Vec<TruncationStep<S>>,
    pub untruncated: MaximalVerdict<S>,
}

impl<S: Scalar> TruncationReport<S> {
    pub fn all_nonnegative(&self) -> bool {
        self.steps.iter().all(|s| s.integral >= S::zero())
    }

    /// The last level reproduces the untruncated integral exactly.
    pub fn reaches_untruncated(&self) -> bool {
        self.steps
            .last()
            .is_some_and(|s| s.integral == self.untruncated.integral)
    }

    pub fn symmetric_difference_vanishes(&self) -> bool {
        self.steps.last().is_some_and(|s| s.symmetric_difference.is_zero())
    }

    pub fn symmetric_difference_nonincreasing(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].symmetric_difference <= w[0].symmetric_difference)
    }

    pub fn l1_nonincreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[1].l1_distance <= w[0].l1_distance)
    }

    pub fn holds(&self) -> bool {
        self.all_nonnegative() && self.reaches_untruncated() && self.symmetric_difference_vanishes()
    }
}

/// Runs `s = 1, …, ⌈‖f‖∞⌉` (at least one level) and compares each truncated
/// inequality with the untruncated one.
pub fn verify_truncation_extension<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: &InvariantFunction<S>,
    horizon: Horizon,
) -> Result<TruncationReport<S>> {
    let untruncated = maximal_integral(system, f, horizon, lambda)?;
    let top = f.sup_norm().ceil_u64().max(1);
    let steps = (1..=top)
        .map(|level| {
            let phi = truncate_observable(f, level)?;
            let verdict = maximal_integral(system, &phi, horizon, lambda)?;
            let flipped: Vec<bool> = verdict
                .exceedance
                .members
                .iter()
                .zip(&untruncated.exceedance.members)
                .map(|(a, b)| a != b)
                .collect();
            Ok(TruncationStep {
                level,
                integral: verdict.integral,
                symmetric_difference: system.mass(&flipped),
                l1_distance: crate::averages::l1_distance(system, &phi, f),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncationReport {
        horizon,
        steps,
        untruncated,
    })
}

/// One `n` of a `λ_n` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStep<S> {
    pub n: u64,
    pub lambda: Vec<S>,
    /// `∫λ_n`.
    pub integral_lambda: S,
    /// `{g* > λ_n} = X` at the stabilized horizon.
    pub full_exceedance: bool,
    /// `∫_{g* > λ_n}(g − λ_n)`; equals `∫g − ∫λ_n` when the set is full.
    pub theorem_integral: S,
}

/// One of the two sweeps behind the pointwise ergodic theorem: `g = f⁺` with
/// `λ_n = Ā(f⁺) ∧ n − 1/n`, or `g = f` with `λ_n = Ā(f) − 1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweep<S> {
    /// `∫g`.
    pub integral_observable: S,
    /// `∫Ā(g)`, the limit of `∫λ_n`.
    pub integral_limit: S,
    pub steps: Vec<LambdaStep<S>>,
    /// First `n` with `n > max Ā(g)` at which the capped part `∫(Ā(g) ∧ n)`
    /// repeats its previous value; from there `∫λ_n = ∫Ā(g) − 1/n` exactly.
    pub converged_at: Option<u64>,
}

impl<S: Scalar> LambdaSweep<S> {
    pub fn all_full(&self) -> bool {
        self.steps.iter().all(|s| s.full_exceedance)
    }

    /// `∫g ≥ ∫λ_n` for every `n`.
    pub fn bounded(&self) -> bool {
        self.steps
            .iter()
            .all(|s| self.integral_observable >= s.integral_lambda && s.theorem_integral >= S::zero())
    }

    pub fn nondecreasing(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[0].integral_lambda <= w[1].integral_lambda)
    }

    /// Once converged, `∫Ā(g) − ∫λ_n = 1/n` exactly for every later `n`.
    pub fn reaches_limit(&self) -> bool {
        let Some(from) = self.converged_at else {
            return false;
        };
        self.steps.iter().filter(|s| s.n >= from).all(|s| {
            self.integral_limit.clone() - s.integral_lambda.clone()
                == S::one() / S::from_u64(s.n).expect("n representable")
        })
    }

    pub fn holds(&self) -> bool {
        self.all_full() && self.bounded() && self.nondecreasing() && self.reaches_limit()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryReport<S> {
    /// `g = f⁺`, `λ_n = Ā(f⁺) ∧ n − 1/n`.
    pub positive_part: LambdaSweep<S>,
    /// `g = f`, `λ_n = Ā(f) − 1/n`.
    pub observable: LambdaSweep<S>,
    pub convergence: crate::averages::ConvergenceReport<S>,
}

impl<S: Scalar> CorollaryReport<S> {
    pub fn holds(&self) -> bool {
        self.positive_part.holds()
            && self.observable.holds()
            && self.convergence.converges_everywhere()
            && self.convergence.chain_holds()
    }
}

fn lambda_sweep<S: Scalar>(
    system: &FiniteSystem<S>,
    g: &Observable<S>,
    n_max: u64,
    capped: bool,
) -> Result<LambdaSweep<S>> {
    let limit = limit_as_invariant(system, g)?;
    let integral_limit = system.integrate(limit.values());
    let integral_observable = system.integrate(g.values());
    let max_limit = limit.per_cycle().iter().cloned().reduce(S::max_of).expect("nonempty");
    let stable = Horizon::Finite(system.max_cycle_len());

    let mut steps = Vec::with_capacity(n_max as usize);
    let mut converged_at = None;
    let mut prev_capped: Option<S> = None;
    for n in 1..=n_max {
        let n_s = S::from_u64(n).expect("n representable");
        let cap = |v: &S| {
            if capped {
                v.clone().min_of(n_s.clone())
            } else {
                v.clone()
            }
        };
        let capped_limit: Vec<S> = limit.per_cycle().iter().map(cap).collect();
        let integral_capped = system.integrate(
            &(0..system.len())
                .map(|x| capped_limit[system.cycle_of(x)].clone())
                .collect::<Vec<_>>(),
        );
        if converged_at.is_none() && n_s > max_limit && prev_capped.as_ref() == Some(&integral_capped) {
            converged_at = Some(n);
        }
        prev_capped = Some(integral_capped);

        let inv_n = S::one() / n_s.clone();
        let per_cycle: Vec<S> = capped_limit.into_iter().map(|v| v - inv_n.clone()).collect();
        let lambda = InvariantFunction::new(system, per_cycle)?;
        let verdict = maximal_integral(system, g, stable, &lambda)?;
        steps.push(LambdaStep {
            n,
            integral_lambda: system.integrate(lambda.values()),
            full_exceedance: verdict.exceedance.members.iter().all(|&m| m),
            theorem_integral: verdict.integral,
            lambda: lambda.per_cycle().to_vec(),
        });
    }
    Ok(LambdaSweep {
        integral_observable,
        integral_limit,
        steps,
        converged_at,
    })
}

/// Runs both `λ_n` sweeps for `n = 1, …, n_max` plus the exact limit chain.
pub fn corollary_lambda_sweep<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    n_max: u64,
) -> Result<CorollaryReport<S>> {
    f.check_against(system)?;
    Ok(CorollaryReport {
        positive_part: lambda_sweep(system, &f.positive_part(), n_max, true)?,
        observable: lambda_sweep(system, f, n_max, false)?,
        convergence: limit_averages(system, f)?,
    })
}
