//! Exact and sampled verification of Birkhoff averages, maximal functions
//! and the maximal ergodic inequality `∫_{f*>λ}(f − λ) ≥ 0`.
//!
//! The finite regime works over weighted permutations and is generic in the
//! scalar type; the aliases below fix it to arbitrary-precision rationals,
//! which is what every exactness claim in this crate refers to. The sampled
//! regime (rotations, Bernoulli and Markov shifts) is generic over `f32`/`f64`.

pub mod averages;
pub mod campaign;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod maximal;
pub mod scalar;
pub mod summation;
pub mod systems;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact scalar of the finite regime.
pub type Rational = num_rational::BigRational;

pub type ExactSystem = systems::FiniteSystem<Rational>;
pub type ExactObservable = systems::Observable<Rational>;
pub type ExactInvariant = systems::InvariantFunction<Rational>;
pub type SampledSystem64 = systems::SampledSystem<f64>;
pub type Evaluator64 = systems::Evaluator<f64>;
