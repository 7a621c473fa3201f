//! Seeded generator of random finite systems for property campaigns.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::finite::{FiniteSystem, InvariantFunction, Observable};
use crate::scalar::Scalar;

/// Bound on numerators and denominators of generated observable values.
pub const VALUE_BOUND: i64 = 100;

/// Largest raw (pre-normalization) cycle weight.
const MAX_RAW_WEIGHT: i64 = 10;

/// A generated `(system, f, λ)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCase<S> {
    pub seed: u64,
    pub system: FiniteSystem<S>,
    pub f: Observable<S>,
    pub lambda: InvariantFunction<S>,
}

fn random_value<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    let num = rng.gen_range(-VALUE_BOUND..=VALUE_BOUND);
    let den = rng.gen_range(1..=VALUE_BOUND);
    S::from_ratio(num, den)
}

/// Deterministic in `seed`. Draws `n ∈ [1, n_max]`, a uniform permutation,
/// positive cycle weights normalized to total mass one, rational values of
/// `f`, and a per-cycle `λ` picked from a grid that reaches below `min f`,
/// between the extremes, onto attained values, and above `max f`.
pub fn random_finite_system<S: Scalar>(seed: u64, n_max: usize) -> RandomCase<S> {
    assert!(n_max >= 1, "n_max must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=n_max);

    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(&mut rng);

    let cycle_lengths = {
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = map[x];
            }
            if len > 0 {
                lengths.push(len as i64);
            }
        }
        lengths
    };
    let raw: Vec<i64> = cycle_lengths
        .iter()
        .map(|_| rng.gen_range(1..=MAX_RAW_WEIGHT))
        .collect();
    let total: i64 = raw.iter().zip(&cycle_lengths).map(|(w, l)| w * l).sum();
    let cycle_weights = raw.iter().map(|&w| S::from_ratio(w, total)).collect();
    let system = FiniteSystem::new(map, cycle_weights).expect("generator builds valid systems");

    let f = Observable::new((0..n).map(|_| random_value::<S>(&mut rng)).collect());

    let lo = f.values().iter().cloned().reduce(S::min_of).expect("n ≥ 1");
    let hi = f.values().iter().cloned().reduce(S::max_of).expect("n ≥ 1");
    let per_cycle = system
        .cycles()
        .iter()
        .map(|cycle| {
            let attained = f.at(cycle[rng.gen_range(0..cycle.len())]).clone();
            let mean = cycle.iter().fold(S::zero(), |acc, &x| acc + f.at(x).clone()) / S::from_count(cycle.len());
            let grid = [
                lo.clone() - S::one(),
                (lo.clone() + hi.clone()) / S::from_count(2),
                mean,
                attained,
                S::zero(),
                hi.clone() + S::one(),
            ];
            grid[rng.gen_range(0..grid.len())].clone()
        })
        .collect();
    let lambda = InvariantFunction::new(&system, per_cycle).expect("one value per cycle");

    RandomCase {
        seed,
        system,
        f,
        lambda,
    }
}
