use ergo_core::averages::{birkhoff_profile, exceedance_set, maximal_profile, Horizon};
use ergo_core::decomposition::{decompose, decompose_with, verify_certificate, BlockChoice, DecompositionInput};
use ergo_core::systems::{finite_orbit, random_finite_system, RandomCase};
use ergo_core::{Rational, Scalar};
use num_traits::Signed;
use proptest::prelude::*;

fn case(seed: u64) -> RandomCase<Rational> {
    random_finite_system(seed, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn telescoping_identity(seed in any::<u64>(), x_pick in any::<usize>(), horizon in 1usize..40) {
        let c = case(seed);
        let x = x_pick % c.system.len();
        let profile = birkhoff_profile(&c.system, &c.f, x, horizon).unwrap();
        let orbit = finite_orbit(&c.system, &c.f, None, x, horizon).unwrap();
        prop_assert_eq!(profile.telescoped_terms(), orbit.f_values);
        prop_assert_eq!(profile.at(1), c.f.at(x));
    }

    #[test]
    fn maximal_monotone_and_exceedance_nested(seed in any::<u64>()) {
        let c = case(seed);
        let mut prev = maximal_profile(&c.system, &c.f, Horizon::Finite(1)).unwrap();
        prop_assert_eq!(&prev.values[..], c.f.values());
        let mut prev_e = exceedance_set(&c.system, &c.f, Horizon::Finite(1), &c.lambda).unwrap();
        for n in 2..=c.system.len() + 2 {
            let cur = maximal_profile(&c.system, &c.f, Horizon::Finite(n)).unwrap();
            prop_assert!(prev.values.iter().zip(&cur.values).all(|(a, b)| a <= b));
            let e = exceedance_set(&c.system, &c.f, Horizon::Finite(n), &c.lambda).unwrap();
            prop_assert!(prev_e.is_subset_of(&e));
            prop_assert!(prev_e.mass <= e.mass);
            prev = cur;
            prev_e = e;
        }
    }

    #[test]
    fn termwise_domination(seed in any::<u64>(), horizon in 1usize..13) {
        let c = case(seed);
        let e = exceedance_set(&c.system, &c.f, Horizon::Finite(horizon), &c.lambda).unwrap();
        for x in 0..c.system.len() {
            let diff = c.f.at(x).clone() - c.lambda.at(x).clone();
            let weighted = if e.contains(x) { diff.clone() } else { Rational::from_ratio(0, 1) };
            prop_assert!(weighted >= diff);
            let equal = weighted == diff;
            prop_assert_eq!(equal, e.contains(x) || diff == Rational::from_ratio(0, 1));
        }
    }

    #[test]
    fn lambda_constant_and_orbits_periodic(seed in any::<u64>(), x_pick in any::<usize>()) {
        let c = case(seed);
        let x = x_pick % c.system.len();
        let p = c.system.period(x);
        prop_assert_eq!(c.system.iterate(x, p), x);
        let trace = finite_orbit(&c.system, &c.f, Some(&c.lambda), x, 3 * p).unwrap();
        for k in p..3 * p {
            prop_assert_eq!(&trace.f_values[k], &trace.f_values[k - p]);
        }
        let lambdas: Vec<_> = c.system.orbit(x).take(3 * p).map(|y| c.lambda.at(y).clone()).collect();
        let lo = lambdas.iter().min().unwrap();
        let hi = lambdas.iter().max().unwrap();
        prop_assert_eq!(hi.clone() - lo.clone(), Rational::from_ratio(0, 1));
    }

    /// Any term sequence whose membership flags are computed from a lookahead
    /// of `N` terms is a valid input; both block choices must verify.
    #[test]
    fn decomposition_sound_on_arbitrary_sequences(
        terms in prop::collection::vec(-20i64..20, 1..80),
        horizon in 1usize..8,
    ) {
        let m = terms.len();
        prop_assume!(m >= horizon);
        let mut extended: Vec<Rational> = terms.iter().map(|&t| Rational::from_ratio(t, 1)).collect();
        // pad with the first terms so every position sees N terms
        for k in 0..horizon {
            extended.push(extended[k % m].clone());
        }
        let membership: Vec<bool> = (0..m)
            .map(|k| {
                let mut s = Rational::from_ratio(0, 1);
                (0..horizon).any(|j| {
                    s += &extended[k + j];
                    s > Rational::from_ratio(0, 1)
                })
            })
            .collect();
        let bound = extended.iter().map(|v| v.abs()).max().unwrap();
        let input = DecompositionInput::from_raw(
            extended[..m].to_vec(),
            membership,
            horizon,
            bound,
            Rational::from_ratio(0, 1),
        ).unwrap();
        for choice in [BlockChoice::Shortest, BlockChoice::Longest] {
            let cert = decompose_with(&input, choice).unwrap();
            let report = verify_certificate(&cert, &input);
            prop_assert!(report.passed(), "{:?}", report.failures);
            prop_assert!(cert.total_sum >= cert.lower_bound);
            let blocks: Rational = cert.block_sums.iter().sum();
            let tail: Rational = input.weighted[cert.tail_start..].iter().sum();
            prop_assert_eq!(blocks + tail, cert.total_sum.clone());
        }
        prop_assert_eq!(decompose(&input).unwrap(), decompose(&input).unwrap());
    }
}
