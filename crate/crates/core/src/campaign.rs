//! Seeded property campaigns over random finite systems.
//!
//! Each seed is an independent case; cases run on the rayon pool and are
//! merged in seed order, so reports do not depend on scheduling.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::averages::{limit_averages, maximal_at, maximal_profile, Horizon};
use crate::decomposition::{build_inputs_for_all, decompose, integrated_bound_demo, verify_certificate};
use crate::error::{Error, Result};
use crate::io::SystemDescription;
use crate::maximal::{
    corollary_lambda_sweep, lambda_grid, maximal_integral, negation_check, verify_maximal_theorem,
    verify_truncation_extension,
};
use crate::systems::{random_finite_system, RandomCase};
use crate::{Rational, Scalar};

/// Property families a campaign can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// `∫_{E_N}(f − λ) ≥ 0` for every `N ≤ n` over a `λ` grid, plus nesting
    /// and stabilization of the `N` sweep.
    Theorem,
    /// Certificates for every `(x, N, m ∈ {N, 2N, 17N})` pass the verifier.
    Decomposition,
    /// Window sums averaged over `x` equal `m·∫_{E_N}(f − λ)`.
    IntegratedBound,
    /// `Ā = A̲` with `∫Ā = ∫f`, and the `−f` identity.
    Ergodic,
    /// Both `λ_n` sweeps.
    Corollary,
    /// The `φ_s` sweep.
    Truncation,
    /// `f*` equals `f*_{10p}` pointwise.
    Stabilization,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Theorem,
        Check::Decomposition,
        Check::IntegratedBound,
        Check::Ergodic,
        Check::Corollary,
        Check::Truncation,
        Check::Stabilization,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Theorem => "theorem",
            Check::Decomposition => "decomposition",
            Check::IntegratedBound => "integrated-bound",
            Check::Ergodic => "ergodic",
            Check::Corollary => "corollary",
            Check::Truncation => "truncation",
            Check::Stabilization => "stabilization",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

/// Outcome of one `(seed, check)` case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub seed: u64,
    pub check: Check,
    pub points: usize,
    /// Individual assertions evaluated.
    pub assertions: usize,
    pub failures: Vec<String>,
    /// The generated system, attached when the case failed.
    pub repro: Option<SystemDescription>,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CampaignReport {
    pub cases: Vec<CaseResult>,
}

impl CampaignReport {
    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.cases.iter().filter(|c| !c.passed())
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    pub fn assertion_count(&self) -> usize {
        self.cases.iter().map(|c| c.assertions).sum()
    }

    pub fn passed(&self) -> bool {
        self.failure_count() == 0
    }
}

struct Tally {
    assertions: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            assertions: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.assertions += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, e: Error) {
        self.assertions += 1;
        self.failures.push(format!("error: {e}"));
    }
}

fn run_check(case: &RandomCase<Rational>, check: Check, t: &mut Tally) -> Result<()> {
    let RandomCase { system, f, lambda, .. } = case;
    let n = system.len();
    match check {
        Check::Theorem => {
            for horizon in 1..=n {
                let mut grid = lambda_grid(system, f, Horizon::Finite(horizon))?;
                grid.push(lambda.clone());
                for (i, l) in grid.iter().enumerate() {
                    let v = maximal_integral(system, f, Horizon::Finite(horizon), l)?;
                    t.check(v.holds, || format!("N={horizon} λ#{i}: integral {} < 0", v.integral));
                }
            }
            let sweep = verify_maximal_theorem(system, f, lambda, 1..=n.max(system.max_cycle_len()))?;
            t.check(sweep.nested, || "E_N not nested".into());
            t.check(sweep.stabilized, || "verdicts not stable past max cycle length".into());
            t.check(sweep.all_hold(), || "sweep verdict negative".into());
        }
        Check::Decomposition => {
            for horizon in 1..=n {
                for m in [horizon, 2 * horizon, 17 * horizon] {
                    for (x, input) in build_inputs_for_all(system, f, lambda, horizon, m)?.iter().enumerate() {
                        match decompose(input) {
                            Ok(cert) => {
                                let report = verify_certificate(&cert, input);
                                t.check(report.passed(), || {
                                    format!("x={x} N={horizon} m={m}: failed {:?}", report.failed_clauses())
                                });
                                t.check(cert.total_sum >= cert.lower_bound, || {
                                    format!("x={x} N={horizon} m={m}: total below bound")
                                });
                            }
                            Err(e) => t.error(e),
                        }
                    }
                }
            }
        }
        Check::IntegratedBound => {
            for horizon in 1..=n {
                let schedule = [10 * horizon, 100 * horizon, 1000 * horizon];
                let r = integrated_bound_demo(system, f, lambda, horizon, &schedule)?;
                t.check(r.sums_match(), || format!("N={horizon}: Σ w·window ≠ m·∫"));
                t.check(r.bound_scales_inversely(), || format!("N={horizon}: bound not ∝ 1/m"));
                t.check(r.holds(), || format!("N={horizon}: bound report inconsistent"));
            }
        }
        Check::Ergodic => {
            let r = limit_averages(system, f)?;
            t.check(r.converges_everywhere(), || "Ā ≠ A̲".into());
            t.check(r.integral_upper == r.integral_f, || "∫Ā ≠ ∫f".into());
            t.check(r.chain_holds(), || "integral chain broken".into());
            let neg = negation_check(system, f, lambda, Horizon::Full)?;
            t.check(neg.holds(), || "negation identity broken".into());
        }
        Check::Corollary => {
            let n_max = corollary_n_max(case);
            let r = corollary_lambda_sweep(system, f, n_max)?;
            t.check(r.positive_part.all_full(), || "{(f⁺)* > λ_n} ≠ X".into());
            t.check(r.positive_part.bounded(), || "∫f⁺ < ∫λ_n".into());
            t.check(r.positive_part.nondecreasing(), || "∫λ_n decreased".into());
            t.check(r.positive_part.reaches_limit(), || "∫λ_n does not reach ∫Ā(f⁺)".into());
            t.check(r.observable.holds(), || "λ = Ā − 1/n sweep failed".into());
            t.check(r.holds(), || "corollary report inconsistent".into());
        }
        Check::Truncation => {
            for horizon in 1..=n {
                let r = verify_truncation_extension(system, f, lambda, Horizon::Finite(horizon))?;
                t.check(r.all_nonnegative(), || format!("N={horizon}: truncated integral < 0"));
                t.check(r.symmetric_difference_vanishes(), || {
                    format!("N={horizon}: △ mass ≠ 0 at top level")
                });
                t.check(r.reaches_untruncated(), || {
                    format!("N={horizon}: final integral differs")
                });
                t.check(r.l1_nonincreasing(), || format!("N={horizon}: ‖φ_s − f‖₁ increased"));
            }
        }
        Check::Stabilization => {
            let full = maximal_profile(system, f, Horizon::Full)?;
            for x in 0..n {
                let brute = maximal_at(system, f, x, 10 * system.period(x));
                t.check(full.values[x] == brute, || {
                    format!("x={x}: f* {} vs {brute}", full.values[x])
                });
            }
        }
    }
    Ok(())
}

/// Smallest `n_max` for the corollary sweep that passes `max Ā(f⁺)` with
/// room for the two-step convergence test.
pub fn corollary_n_max(case: &RandomCase<Rational>) -> u64 {
    let top = case.f.positive_part().sup_norm();
    top.ceil_u64() + 3
}

/// Runs one check on the system generated from `seed`.
pub fn run_case(seed: u64, n_max: usize, check: Check) -> CaseResult {
    let case = random_finite_system::<Rational>(seed, n_max);
    let mut tally = Tally::new();
    if let Err(e) = run_check(&case, check, &mut tally) {
        tally.error(e);
    }
    let repro =
        (!tally.failures.is_empty()).then(|| SystemDescription::from_finite(&case.system, &case.f, Some(&case.lambda)));
    CaseResult {
        seed,
        check,
        points: case.system.len(),
        assertions: tally.assertions,
        failures: tally.failures,
        repro,
    }
}

/// Runs every `(seed, check)` pair in parallel.
pub fn run_campaign(seeds: Range<u64>, n_max: usize, checks: &[Check]) -> CampaignReport {
    let mut cases: Vec<CaseResult> = seeds
        .into_par_iter()
        .flat_map_iter(|seed| checks.iter().map(move |&c| run_case(seed, n_max, c)))
        .collect();
    cases.sort_by_key(|c| (c.seed, c.check));
    CampaignReport { cases }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_campaign_is_clean_and_ordered() {
        let report = run_campaign(0..20, 6, &Check::ALL);
        assert_eq!(report.cases.len(), 20 * Check::ALL.len());
        assert!(report.passed(), "{:?}", report.failures().next());
        assert!(report
            .cases
            .windows(2)
            .all(|w| (w[0].seed, w[0].check) < (w[1].seed, w[1].check)));
        assert!(report.assertion_count() > 0);
    }

    #[test]
    fn check_names_parse() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("nope".parse::<Check>().is_err());
    }

    #[test]
    fn deterministic_across_runs() {
        let a = run_campaign(5..9, 8, &[Check::Theorem, Check::Decomposition]);
        let b = run_campaign(5..9, 8, &[Check::Theorem, Check::Decomposition]);
        assert_eq!(a, b);
    }
}
