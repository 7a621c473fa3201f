//! Birkhoff averages `A_k f`, maximal functions `f*_N` and `f*`, exceedance
//! sets `E_N = {f*_N > λ}`, truncations `φ_s`, and exact ergodic limits.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::summation::CompensatedSum;
use crate::systems::{FiniteSystem, InvariantFunction, Observable};

/// Horizon of a maximal function: `f*_N` for a finite `N`, or `f*` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Horizon {
    Finite(usize),
    Full,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(n) => write!(f, "{n}"),
            Horizon::Full => f.write_str("FULL"),
        }
    }
}

/// `A_1 f(x), …, A_K f(x)`; `values[k - 1] = A_k f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffProfile<S> {
    pub values: Vec<S>,
}

impl<S> BirkhoffProfile<S> {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// `A_k f(x)` for `1 ≤ k ≤ K`.
    pub fn at(&self, k: usize) -> &S {
        &self.values[k - 1]
    }
}

impl<S: Scalar> BirkhoffProfile<S> {
    /// `k·A_k − (k−1)·A_{k−1}` for each `k`, which telescopes back to
    /// `f(T^{k−1} x)`.
    pub fn telescoped_terms(&self) -> Vec<S> {
        let mut prev = S::zero();
        self.values
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let cur = S::from_count(i + 1) * a.clone();
                let term = cur.clone() - prev.clone();
                prev = cur;
                term
            })
            .collect()
    }
}

/// Per-point `f*_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalProfile<S> {
    pub horizon: Horizon,
    pub values: Vec<S>,
}

/// Flags for `E_N = {f*_N > λ}` and its mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceSet<S> {
    pub horizon: Horizon,
    pub members: Vec<bool>,
    pub mass: S,
}

impl<S> ExceedanceSet<S> {
    pub fn contains(&self, x: usize) -> bool {
        self.members[x]
    }

    pub fn is_subset_of(&self, other: &ExceedanceSet<S>) -> bool {
        self.members.iter().zip(&other.members).all(|(&a, &b)| !a || b)
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }
}

/// Pointwise limsup/liminf of `A_k f` and the integrals in the chain
/// `∫Ā ≤ ∫f ≤ ∫A̲ ≤ ∫Ā`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<S> {
    pub upper: Vec<S>,
    pub lower: Vec<S>,
    pub integral_upper: S,
    pub integral_lower: S,
    pub integral_f: S,
}

impl<S: Scalar> ConvergenceReport<S> {
    /// `Ā = A̲` everywhere.
    pub fn converges_everywhere(&self) -> bool {
        self.upper == self.lower
    }

    /// `∫Ā ≤ ∫f ≤ ∫A̲ ≤ ∫Ā`.
    pub fn chain_holds(&self) -> bool {
        self.integral_upper <= self.integral_f
            && self.integral_f <= self.integral_lower
            && self.integral_lower <= self.integral_upper
    }
}

/// Birkhoff averages along the orbit of `x`, computed with one running sum.
pub fn birkhoff_profile<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    x: usize,
    horizon: usize,
) -> Result<BirkhoffProfile<S>> {
    system.check_point(x)?;
    f.check_against(system)?;
    if horizon == 0 {
        return Err(Error::ZeroHorizon);
    }
    let mut sum = S::zero();
    let values = system
        .orbit(x)
        .take(horizon)
        .enumerate()
        .map(|(j, y)| {
            sum = sum.clone() + f.at(y).clone();
            sum.clone() / S::from_count(j + 1)
        })
        .collect();
    Ok(BirkhoffProfile { values })
}

/// Birkhoff averages of a sampled trace with compensated running sums.
pub fn sampled_birkhoff_profile<F: Real>(f_values: &[F]) -> BirkhoffProfile<F> {
    let mut acc = CompensatedSum::new();
    let values = f_values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            acc.add(v);
            acc.value() / F::from_usize(j + 1).expect("index fits")
        })
        .collect();
    BirkhoffProfile { values }
}

/// `A_k` at selected horizons only, for long sampled orbits. `ks` must be
/// nondecreasing and each `k ≤ f_values.len()`.
pub fn sampled_averages_at<F: Real>(f_values: &[F], ks: &[usize]) -> Vec<F> {
    let mut acc = CompensatedSum::new();
    let mut consumed = 0;
    ks.iter()
        .map(|&k| {
            assert!(k >= 1 && k >= consumed && k <= f_values.len(), "bad horizon {k}");
            for &v in &f_values[consumed..k] {
                acc.add(v);
            }
            consumed = k;
            acc.value() / F::from_usize(k).expect("index fits")
        })
        .collect()
}

/// `f*_N` at the start of a sampled trace: `max_{1≤k≤N} A_k`, reading the
/// first `N` values of `f_values`.
pub fn sampled_maximal_at<F: Real>(f_values: &[F], horizon: usize) -> F {
    assert!(horizon >= 1 && horizon <= f_values.len());
    let mut acc = CompensatedSum::new();
    let mut best = F::neg_infinity();
    for (j, &v) in f_values[..horizon].iter().enumerate() {
        acc.add(v);
        best = best.max(acc.value() / F::from_usize(j + 1).expect("index fits"));
    }
    best
}

/// `max_{1≤k≤N} A_k f(x)`.
pub fn maximal_at<S: Scalar>(system: &FiniteSystem<S>, f: &Observable<S>, x: usize, horizon: usize) -> S {
    let mut sum = S::zero();
    let mut best: Option<S> = None;
    for (j, y) in system.orbit(x).take(horizon).enumerate() {
        sum = sum.clone() + f.at(y).clone();
        let avg = sum.clone() / S::from_count(j + 1);
        best = Some(match best {
            Some(b) => b.max_of(avg),
            None => avg,
        });
    }
    best.expect("horizon ≥ 1")
}

/// `f*_N` at every point. For [`Horizon::Full`], each point uses its own
/// period `p(x)`: writing `k = qp + r`, `A_k` lies between `A_r` and the
/// cycle mean `A_p`, so the supremum over all `k` is attained for `k ≤ p`.
pub fn maximal_profile<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    horizon: Horizon,
) -> Result<MaximalProfile<S>> {
    f.check_against(system)?;
    if horizon == Horizon::Finite(0) {
        return Err(Error::ZeroHorizon);
    }
    let values = (0..system.len())
        .map(|x| {
            let n = match horizon {
                Horizon::Finite(n) => n,
                Horizon::Full => system.period(x),
            };
            maximal_at(system, f, x, n)
        })
        .collect();
    Ok(MaximalProfile { horizon, values })
}

/// `E_N` from an already computed maximal profile.
pub fn exceedance_from_profile<S: Scalar>(
    system: &FiniteSystem<S>,
    profile: &MaximalProfile<S>,
    lambda: &InvariantFunction<S>,
) -> ExceedanceSet<S> {
    let members: Vec<bool> = profile
        .values
        .iter()
        .zip(lambda.values())
        .map(|(fs, l)| fs > l)
        .collect();
    let mass = system.mass(&members);
    ExceedanceSet {
        horizon: profile.horizon,
        members,
        mass,
    }
}

/// `E_N = {f*_N > λ}` with strict comparison.
pub fn exceedance_set<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    horizon: Horizon,
    lambda: &InvariantFunction<S>,
) -> Result<ExceedanceSet<S>> {
    lambda.check_against(system)?;
    let profile = maximal_profile(system, f, horizon)?;
    Ok(exceedance_from_profile(system, &profile, lambda))
}

/// `φ_s = f · χ_{|f| ≤ s}`.
pub fn truncate_observable<S: Scalar>(f: &Observable<S>, level: u64) -> Result<Observable<S>> {
    if level == 0 {
        return Err(Error::ZeroTruncationLevel);
    }
    let s = S::from_u64(level).expect("level representable");
    Ok(Observable::new(
        f.values()
            .iter()
            .map(|v| if v.abs() <= s { v.clone() } else { S::zero() })
            .collect(),
    ))
}

/// `‖f − g‖₁`.
pub fn l1_distance<S: Scalar>(system: &FiniteSystem<S>, f: &Observable<S>, g: &Observable<S>) -> S {
    let diff: Vec<S> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a.clone() - b.clone()).abs())
        .collect();
    system.integrate(&diff)
}

/// Mean of `f` over each cycle, expanded per point.
pub fn cycle_means<S: Scalar>(system: &FiniteSystem<S>, f: &Observable<S>) -> Vec<S> {
    let per_cycle: Vec<S> = system
        .cycles()
        .iter()
        .map(|c| c.iter().fold(S::zero(), |acc, &x| acc + f.at(x).clone()) / S::from_count(c.len()))
        .collect();
    (0..system.len())
        .map(|x| per_cycle[system.cycle_of(x)].clone())
        .collect()
}

/// `Ā` and `A̲`: on a permutation both equal the cycle mean.
pub fn limit_averages<S: Scalar>(system: &FiniteSystem<S>, f: &Observable<S>) -> Result<ConvergenceReport<S>> {
    f.check_against(system)?;
    let upper = cycle_means(system, f);
    let lower = upper.clone();
    let integral_upper = system.integrate(&upper);
    let integral_lower = system.integrate(&lower);
    let integral_f = system.integrate(f.values());
    Ok(ConvergenceReport {
        upper,
        lower,
        integral_upper,
        integral_lower,
        integral_f,
    })
}

/// `Ā(f)` as an invariant function (constant on cycles).
pub fn limit_as_invariant<S: Scalar>(system: &FiniteSystem<S>, f: &Observable<S>) -> Result<InvariantFunction<S>> {
    f.check_against(system)?;
    InvariantFunction::from_point_values(system, cycle_means(system, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn three_cycle() -> (FiniteSystem<Rational>, Observable<Rational>) {
        let s = FiniteSystem::new(vec![1, 2, 0], vec![q(1, 3)]).unwrap();
        let f = Observable::new(vec![q(3, 1), q(-1, 1), q(-1, 1)]);
        (s, f)
    }

    /// Direct `(1/k) Σ_{j<k} f(T^j x)` with fresh sums for every `k`.
    fn direct_average(s: &FiniteSystem<Rational>, f: &Observable<Rational>, x: usize, k: usize) -> Rational {
        let mut y = x;
        let mut sum = q(0, 1);
        for _ in 0..k {
            sum += f.at(y);
            y = s.apply(y);
        }
        sum / q(k as i64, 1)
    }

    #[test]
    fn birkhoff_three_cycle() {
        let (s, f) = three_cycle();
        let p = birkhoff_profile(&s, &f, 0, 3).unwrap();
        assert_eq!(p.values, vec![q(3, 1), q(1, 1), q(1, 3)]);
        for k in 1..=3 {
            assert_eq!(*p.at(k), direct_average(&s, &f, 0, k));
        }
        assert_eq!(p.telescoped_terms(), vec![q(3, 1), q(-1, 1), q(-1, 1)]);
    }

    #[test]
    fn birkhoff_constant_observable() {
        let (s, _) = three_cycle();
        let f = Observable::constant(3, q(7, 2));
        let p = birkhoff_profile(&s, &f, 2, 10).unwrap();
        assert!(p.values.iter().all(|v| *v == q(7, 2)));
    }

    #[test]
    fn birkhoff_errors() {
        let (s, f) = three_cycle();
        assert!(matches!(
            birkhoff_profile(&s, &f, 3, 2),
            Err(Error::PointOutOfRange { .. })
        ));
        assert!(matches!(birkhoff_profile(&s, &f, 0, 0), Err(Error::ZeroHorizon)));
        let short = Observable::new(vec![q(1, 1)]);
        assert!(matches!(
            birkhoff_profile(&s, &short, 0, 2),
            Err(Error::ObservableLengthMismatch { .. })
        ));
    }

    #[test]
    fn maximal_three_cycle() {
        let (s, f) = three_cycle();
        let m3 = maximal_profile(&s, &f, Horizon::Finite(3)).unwrap();
        assert_eq!(m3.values, vec![q(3, 1), q(1, 3), q(1, 1)]);
        let m1 = maximal_profile(&s, &f, Horizon::Finite(1)).unwrap();
        assert_eq!(m1.values, f.values());
        let full = maximal_profile(&s, &f, Horizon::Full).unwrap();
        assert_eq!(full.values, m3.values);
        let m30 = maximal_profile(&s, &f, Horizon::Finite(30)).unwrap();
        assert_eq!(full.values, m30.values);
    }

    #[test]
    fn exceedance_examples() {
        let (s, f) = three_cycle();
        let zero = InvariantFunction::constant(&s, q(0, 1));
        let e3 = exceedance_set(&s, &f, Horizon::Finite(3), &zero).unwrap();
        assert_eq!(e3.members, vec![true, true, true]);
        assert_eq!(e3.mass, q(1, 1));
        let e1 = exceedance_set(&s, &f, Horizon::Finite(1), &zero).unwrap();
        assert_eq!(e1.members, vec![true, false, false]);
        assert_eq!(e1.mass, q(1, 3));
        assert!(e1.is_subset_of(&e3));

        let f0 = Observable::constant(3, q(0, 1));
        let e = exceedance_set(&s, &f0, Horizon::Finite(3), &zero).unwrap();
        assert_eq!(e.count(), 0);
        assert_eq!(e.mass, q(0, 1));
    }

    #[test]
    fn truncation_examples() {
        let s = FiniteSystem::new(vec![1, 0], vec![q(1, 2)]).unwrap();
        let f = Observable::new(vec![q(5, 1), q(-1, 1)]);
        let phi1 = truncate_observable(&f, 1).unwrap();
        assert_eq!(phi1.values(), &[q(0, 1), q(-1, 1)]);
        assert_eq!(l1_distance(&s, &phi1, &f), q(5, 2));
        let phi5 = truncate_observable(&f, 5).unwrap();
        assert_eq!(phi5, f);
        assert_eq!(l1_distance(&s, &phi5, &f), q(0, 1));

        let g = Observable::new(vec![q(3, 1), q(-1, 1), q(-1, 1)]);
        assert_eq!(
            truncate_observable(&g, 2).unwrap().values(),
            &[q(0, 1), q(-1, 1), q(-1, 1)]
        );
        assert_eq!(truncate_observable(&g, 0), Err(Error::ZeroTruncationLevel));
    }

    #[test]
    fn limits_examples() {
        let (s, f) = three_cycle();
        let r = limit_averages(&s, &f).unwrap();
        assert_eq!(r.upper, vec![q(1, 3); 3]);
        assert_eq!(r.integral_upper, q(1, 3));
        assert_eq!(r.integral_f, q(1, 3));
        assert!(r.converges_everywhere() && r.chain_holds());

        let one = FiniteSystem::new(vec![0], vec![q(1, 1)]).unwrap();
        let c = Observable::new(vec![q(-7, 3)]);
        assert_eq!(limit_averages(&one, &c).unwrap().upper, vec![q(-7, 3)]);

        // cycles {0,1} (mass 1/4 each) and {2} (mass 1/2)
        let s = FiniteSystem::new(vec![1, 0, 2], vec![q(1, 4), q(1, 2)]).unwrap();
        let f = Observable::new(vec![q(1, 1), q(3, 1), q(-5, 1)]);
        let r = limit_averages(&s, &f).unwrap();
        assert_eq!(r.upper, vec![q(2, 1), q(2, 1), q(-5, 1)]);
        assert_eq!(r.integral_upper, q(-3, 2));
        assert_eq!(r.integral_f, q(-3, 2));
    }

    #[test]
    fn sampled_profile_telescopes() {
        let values: Vec<f64> = (0..1000).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let p = sampled_birkhoff_profile(&values);
        for k in 2..=1000 {
            let term = k as f64 * p.at(k) - (k - 1) as f64 * p.at(k - 1);
            let want = values[k - 1];
            assert!((term - want).abs() <= 1e-9 * want.abs().max(1.0) + 1e-12);
        }
        let at = sampled_averages_at(&values, &[1, 10, 1000]);
        assert_eq!(at[0], *p.at(1));
        assert!((at[2] - p.at(1000)).abs() < 1e-15);
        assert_eq!(sampled_maximal_at(&[1.0, 3.0, -10.0], 3), 2.0);
    }
}
