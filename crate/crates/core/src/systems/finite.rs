//! Weighted permutations: the exact model of a measure-preserving system on a
//! finite probability space.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A permutation of `{0, …, n−1}` with strictly positive point masses that
/// are constant on cycles and sum to one.
///
/// Cycles are numbered in order of their smallest point; each cycle lists its
/// points starting from that smallest point and following the map.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem<S> {
    map: Vec<usize>,
    weights: Vec<S>,
    cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
}

/// One entry of a measure-preservation report: the point mass of `point`
/// disagrees with the total mass of its preimage.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageMismatch<S> {
    pub point: usize,
    pub point_mass: S,
    pub preimage_mass: S,
}

fn check_permutation(map: &[usize]) -> Result<()> {
    let n = map.len();
    if n == 0 {
        return Err(Error::NotAPermutation {
            n,
            detail: "empty map".into(),
        });
    }
    let mut seen = vec![false; n];
    for (i, &target) in map.iter().enumerate() {
        if target >= n {
            return Err(Error::NotAPermutation {
                n,
                detail: format!("map[{i}] = {target} is out of range"),
            });
        }
        if std::mem::replace(&mut seen[target], true) {
            return Err(Error::NotAPermutation {
                n,
                detail: format!("{target} has more than one preimage"),
            });
        }
    }
    Ok(())
}

/// Cycle decomposition of a validated permutation.
fn decompose_cycles(map: &[usize]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = map.len();
    let mut cycle_of = vec![usize::MAX; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if cycle_of[start] != usize::MAX {
            continue;
        }
        let id = cycles.len();
        let mut cycle = Vec::new();
        let mut x = start;
        while cycle_of[x] == usize::MAX {
            cycle_of[x] = id;
            cycle.push(x);
            x = map[x];
        }
        cycles.push(cycle);
    }
    (cycles, cycle_of)
}

/// Lists every point whose mass differs from the mass of its preimage under
/// `map`. Works on arbitrary maps and weights, so it can audit systems that
/// never went through [`FiniteSystem::new`].
pub fn preimage_mismatches<S: Scalar>(map: &[usize], weights: &[S]) -> Vec<PreimageMismatch<S>> {
    let n = weights.len();
    let mut preimage = vec![S::zero(); n];
    for (i, &target) in map.iter().enumerate() {
        if target < n {
            preimage[target] = preimage[target].clone() + weights[i].clone();
        }
    }
    preimage
        .into_iter()
        .zip(weights)
        .enumerate()
        .filter(|(_, (pre, w))| !pre.approx_eq(w))
        .map(|(point, (preimage_mass, w))| PreimageMismatch {
            point,
            point_mass: w.clone(),
            preimage_mass,
        })
        .collect()
}

impl<S: Scalar> FiniteSystem<S> {
    /// Builds a system from a permutation and one weight per cycle (cycles
    /// ordered by smallest point).
    pub fn new(map: Vec<usize>, cycle_weights: Vec<S>) -> Result<Self> {
        check_permutation(&map)?;
        let (cycles, cycle_of) = decompose_cycles(&map);
        if cycle_weights.len() != cycles.len() {
            return Err(Error::CycleCountMismatch {
                expected: cycles.len(),
                got: cycle_weights.len(),
            });
        }
        if let Some((cycle, w)) = cycle_weights.iter().enumerate().find(|(_, w)| **w <= S::zero()) {
            return Err(Error::WeightsNotPositive {
                cycle,
                weight: w.render(),
            });
        }
        let total = cycles
            .iter()
            .zip(&cycle_weights)
            .fold(S::zero(), |acc, (c, w)| acc + S::from_count(c.len()) * w.clone());
        if !total.approx_eq(&S::one()) {
            return Err(Error::WeightsDontSumToOne { sum: total.render() });
        }
        let weights = cycle_of.iter().map(|&c| cycle_weights[c].clone()).collect();
        Ok(Self {
            map,
            weights,
            cycles,
            cycle_of,
        })
    }

    /// Identity map on `n` points with uniform mass.
    pub fn identity(n: usize) -> Result<Self> {
        let w = S::one() / S::from_count(n.max(1));
        Self::new((0..n).collect(), vec![w; n])
    }

    /// A single `n`-cycle `i ↦ i+1 mod n` with uniform mass.
    pub fn rotation(n: usize) -> Result<Self> {
        let w = S::one() / S::from_count(n.max(1));
        Self::new((0..n).map(|i| (i + 1) % n.max(1)).collect(), vec![w])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &S {
        &self.weights[x]
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    pub fn cycle_of(&self, x: usize) -> usize {
        self.cycle_of[x]
    }

    /// Length of the cycle through `x`, i.e. the period of `x`.
    pub fn period(&self, x: usize) -> usize {
        self.cycles[self.cycle_of[x]].len()
    }

    pub fn max_cycle_len(&self) -> usize {
        self.cycles.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Per-cycle weights in cycle order.
    pub fn cycle_weights(&self) -> Vec<S> {
        self.cycles.iter().map(|c| self.weights[c[0]].clone()).collect()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `T^k x`.
    pub fn iterate(&self, x: usize, k: usize) -> usize {
        let cycle = &self.cycles[self.cycle_of[x]];
        let pos = cycle.iter().position(|&y| y == x).expect("point on its cycle");
        cycle[(pos + k) % cycle.len()]
    }

    /// Iterator over `x, T x, T² x, …` (unbounded).
    pub fn orbit(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(x), move |&y| Some(self.map[y]))
    }

    pub fn check_point(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                point: x,
                n: self.len(),
            })
        }
    }

    /// Every point where `μ(T⁻¹{j}) ≠ μ({j})`. Empty iff `T` preserves `μ`.
    pub fn validate_measure_preserving(&self) -> Vec<PreimageMismatch<S>> {
        preimage_mismatches(&self.map, &self.weights)
    }

    /// `∫ g dμ` for per-point values `g`.
    pub fn integrate(&self, values: &[S]) -> S {
        self.weights
            .iter()
            .zip(values)
            .fold(S::zero(), |acc, (w, v)| acc + w.clone() * v.clone())
    }

    /// Mass of the set flagged by `members`.
    pub fn mass(&self, members: &[bool]) -> S {
        self.weights
            .iter()
            .zip(members)
            .filter(|(_, &m)| m)
            .fold(S::zero(), |acc, (w, _)| acc + w.clone())
    }
}

/// An observable on a finite system: one value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<S> {
    values: Vec<S>,
}

impl<S: Scalar> Observable<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize) -> &S {
        &self.values[x]
    }

    /// `‖f‖∞ = max |f(x)|`.
    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, v| acc.max_of(v.abs()))
    }

    pub fn positive_part(&self) -> Self {
        Self::new(self.values.iter().map(Scalar::positive_part).collect())
    }

    pub fn negated(&self) -> Self {
        Self::new(self.values.iter().map(|v| -v.clone()).collect())
    }

    pub fn check_against(&self, system: &FiniteSystem<S>) -> Result<()> {
        if self.len() == system.len() {
            Ok(())
        } else {
            Err(Error::ObservableLengthMismatch {
                expected: system.len(),
                got: self.len(),
            })
        }
    }

    /// Values along the orbit of `x`: `f(x), f(T x), …, f(T^{m−1} x)`.
    pub fn along_orbit(&self, system: &FiniteSystem<S>, x: usize, m: usize) -> Vec<S> {
        system.orbit(x).take(m).map(|y| self.values[y].clone()).collect()
    }
}

/// A `T`-invariant function, stored per cycle and expanded per point.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantFunction<S> {
    per_cycle: Vec<S>,
    values: Vec<S>,
}

impl<S: Scalar> InvariantFunction<S> {
    /// One value per cycle of `system`.
    pub fn new(system: &FiniteSystem<S>, per_cycle: Vec<S>) -> Result<Self> {
        if per_cycle.len() != system.cycle_count() {
            return Err(Error::CycleCountMismatch {
                expected: system.cycle_count(),
                got: per_cycle.len(),
            });
        }
        let values = (0..system.len())
            .map(|x| per_cycle[system.cycle_of(x)].clone())
            .collect();
        Ok(Self { per_cycle, values })
    }

    pub fn constant(system: &FiniteSystem<S>, c: S) -> Self {
        Self::new(system, vec![c; system.cycle_count()]).expect("arity matches by construction")
    }

    /// Accepts per-point values and checks `λ∘T = λ` everywhere.
    pub fn from_point_values(system: &FiniteSystem<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != system.len() {
            return Err(Error::InvalidLambda(format!(
                "{} values for {} points",
                values.len(),
                system.len()
            )));
        }
        if let Some(x) = (0..system.len()).find(|&x| values[system.apply(x)] != values[x]) {
            return Err(Error::InvalidLambda(format!(
                "λ(T {x}) = {} differs from λ({x}) = {}",
                values[system.apply(x)].render(),
                values[x].render()
            )));
        }
        let per_cycle = system.cycles().iter().map(|c| values[c[0]].clone()).collect();
        Ok(Self { per_cycle, values })
    }

    pub fn per_cycle(&self) -> &[S] {
        &self.per_cycle
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: usize) -> &S {
        &self.values[x]
    }

    /// Exhaustive check of `λ(T x) = λ(x)` against `system`.
    pub fn is_invariant_under(&self, system: &FiniteSystem<S>) -> bool {
        self.values.len() == system.len() && (0..system.len()).all(|x| self.values[system.apply(x)] == self.values[x])
    }

    pub fn check_against(&self, system: &FiniteSystem<S>) -> Result<()> {
        if self.values.len() != system.len() {
            return Err(Error::InvalidLambda(format!(
                "{} values for {} points",
                self.values.len(),
                system.len()
            )));
        }
        if !self.is_invariant_under(system) {
            return Err(Error::InvalidLambda("not constant on cycles".into()));
        }
        Ok(())
    }

    pub fn positive_part(&self) -> Self {
        Self {
            per_cycle: self.per_cycle.iter().map(Scalar::positive_part).collect(),
            values: self.values.iter().map(Scalar::positive_part).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            per_cycle: self.per_cycle.iter().map(|v| -v.clone()).collect(),
            values: self.values.iter().map(|v| -v.clone()).collect(),
        }
    }

    /// Pointwise `λ + c` for a constant `c`.
    pub fn shifted(&self, c: &S) -> Self {
        Self {
            per_cycle: self.per_cycle.iter().map(|v| v.clone() + c.clone()).collect(),
            values: self.values.iter().map(|v| v.clone() + c.clone()).collect(),
        }
    }
}

/// Values of an observable along an orbit window, plus the (constant) value
/// of the invariant function on that orbit. `X` describes the start state:
/// a point index for finite systems, an [`OrbitStart`](super::OrbitStart)
/// for sampled ones.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace<S, X = usize> {
    pub start: X,
    pub f_values: Vec<S>,
    pub lambda_value: Option<S>,
}

impl<S, X> OrbitTrace<S, X> {
    pub fn len(&self) -> usize {
        self.f_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_values.is_empty()
    }
}

/// Table lookup of `f` along the orbit of `x0` for `m` steps.
pub fn finite_orbit<S: Scalar>(
    system: &FiniteSystem<S>,
    f: &Observable<S>,
    lambda: Option<&InvariantFunction<S>>,
    x0: usize,
    m: usize,
) -> Result<OrbitTrace<S>> {
    system.check_point(x0)?;
    f.check_against(system)?;
    if m == 0 {
        return Err(Error::ZeroHorizon);
    }
    Ok(OrbitTrace {
        start: x0,
        f_values: f.along_orbit(system, x0, m),
        lambda_value: lambda.map(|l| l.at(x0).clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn identity_on_one_point() {
        let s = FiniteSystem::new(vec![0], vec![q(1, 1)]).unwrap();
        assert_eq!(s.weights(), &[q(1, 1)]);
        assert_eq!(s.cycles(), &[vec![0]]);
    }

    #[test]
    fn three_cycle_uniform_weights() {
        let s = FiniteSystem::new(vec![1, 2, 0], vec![q(1, 3)]).unwrap();
        assert_eq!(s.weights(), &[q(1, 3), q(1, 3), q(1, 3)]);
        assert_eq!(s.cycle_count(), 1);
        assert_eq!(s.period(2), 3);
        assert!(s.validate_measure_preserving().is_empty());
    }

    #[test]
    fn rejects_non_bijection() {
        let err = FiniteSystem::new(vec![0, 0, 0], vec![q(1, 3)]).unwrap_err();
        assert!(matches!(err, Error::NotAPermutation { .. }));
        let err = FiniteSystem::new(vec![3, 0, 1], vec![q(1, 3)]).unwrap_err();
        assert!(matches!(err, Error::NotAPermutation { .. }));
        let err = FiniteSystem::<Rational>::new(vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::NotAPermutation { .. }));
    }

    #[test]
    fn rejects_bad_weights() {
        let err = FiniteSystem::new(vec![0, 1], vec![q(1, 1), q(0, 1)]).unwrap_err();
        assert!(matches!(err, Error::WeightsNotPositive { cycle: 1, .. }));
        let err = FiniteSystem::new(vec![1, 0], vec![q(1, 3)]).unwrap_err();
        assert_eq!(err, Error::WeightsDontSumToOne { sum: "2/3".into() });
        let err = FiniteSystem::new(vec![1, 0], vec![q(1, 4), q(1, 4)]).unwrap_err();
        assert!(matches!(err, Error::CycleCountMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn identity_any_positive_weights_preserved() {
        let s = FiniteSystem::new(vec![0, 1, 2], vec![q(1, 2), q(1, 3), q(1, 6)]).unwrap();
        assert!(s.validate_measure_preserving().is_empty());
    }

    #[test]
    fn unequal_weights_on_a_cycle_are_flagged() {
        // Only the points whose preimage carries a different mass are flagged:
        // T(0)=1, T(1)=2, T(2)=0 with masses (1/2, 1/4, 1/4) breaks at 0 and 1.
        let report = preimage_mismatches(&[1, 2, 0], &[q(1, 2), q(1, 4), q(1, 4)]);
        let points: Vec<_> = report.iter().map(|m| m.point).collect();
        assert_eq!(points, vec![0, 1]);
        assert_eq!(report[0].preimage_mass, q(1, 4));
        assert_eq!(report[1].preimage_mass, q(1, 2));
    }

    #[test]
    fn non_bijective_map_report() {
        let report = preimage_mismatches(&[0, 0], &[q(1, 2), q(1, 2)]);
        assert_eq!(report.len(), 2);
    }

    #[test]
    fn invariant_function_construction() {
        let s = FiniteSystem::new(vec![1, 2, 0], vec![q(1, 3)]).unwrap();
        let l = InvariantFunction::new(&s, vec![q(0, 1)]).unwrap();
        assert_eq!(l.values(), &[q(0, 1), q(0, 1), q(0, 1)]);

        // cycles: {0,1} and {2}
        let s = FiniteSystem::new(vec![1, 0, 2], vec![q(1, 4), q(1, 2)]).unwrap();
        let l = InvariantFunction::new(&s, vec![q(1, 2), q(-3, 1)]).unwrap();
        assert_eq!(l.values(), &[q(1, 2), q(1, 2), q(-3, 1)]);
        assert!(l.is_invariant_under(&s));

        let err = InvariantFunction::new(&s, vec![q(1, 1)]).unwrap_err();
        assert_eq!(err, Error::CycleCountMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn point_values_must_be_invariant() {
        let s = FiniteSystem::new(vec![1, 0, 2], vec![q(1, 4), q(1, 2)]).unwrap();
        assert!(InvariantFunction::from_point_values(&s, vec![q(1, 1), q(1, 1), q(5, 1)]).is_ok());
        let err = InvariantFunction::from_point_values(&s, vec![q(1, 1), q(2, 1), q(5, 1)]).unwrap_err();
        assert!(matches!(err, Error::InvalidLambda(_)));
    }

    #[test]
    fn orbit_trace_repeats_with_period() {
        let s = FiniteSystem::new(vec![1, 2, 0], vec![q(1, 3)]).unwrap();
        let f = Observable::new(vec![q(3, 1), q(-1, 1), q(-1, 1)]);
        let t = finite_orbit(&s, &f, None, 1, 7).unwrap();
        assert_eq!(t.f_values.len(), 7);
        for k in 3..7 {
            assert_eq!(t.f_values[k], t.f_values[k - 3]);
        }
        assert_eq!(s.iterate(1, 3), 1);
        assert_eq!(s.iterate(1, 5), 0);
        assert!(matches!(
            finite_orbit(&s, &f, None, 3, 2),
            Err(Error::PointOutOfRange { point: 3, n: 3 })
        ));
    }

    #[test]
    fn float_instantiation_accepts_dyadic_weights() {
        let s = FiniteSystem::<f64>::new(vec![1, 0, 2], vec![0.25, 0.5]).unwrap();
        assert!(s.validate_measure_preserving().is_empty());
    }
}
