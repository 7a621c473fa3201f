//! Measure-preserving systems in two regimes: exact finite weighted
//! permutations and sampled parametric systems.

mod finite;
mod generator;
mod sampled;

pub use finite::{
    finite_orbit, preimage_mismatches, FiniteSystem, InvariantFunction, Observable, OrbitTrace, PreimageMismatch,
};
pub use generator::{random_finite_system, RandomCase, VALUE_BOUND};
pub use sampled::{golden_alpha, Evaluator, OrbitStart, SampledKind, SampledSystem, COORDINATE_BITS, MARKOV_TOLERANCE};
