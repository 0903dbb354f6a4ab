use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rademacher_walk::construction::positive_bezout;
use rademacher_walk::exact::{
    hit_probability_2d, max_interval_probability, pmf_1d, pmf_2d, residue_counts, sup_pmf,
    ExactConfig, ModPath,
};
use rademacher_walk::sequences::{run_length_decompose_values, StepSequence};
use rademacher_walk::verify::{elo_bound, verify_elo, within_elo};
use rademacher_walk::walk::{StepSampler, StepTable, Trajectory, WalkConfig};
use rademacher_walk::Rational;

fn cfg() -> ExactConfig {
    ExactConfig::default()
}

/// Step vectors of length `1..=max_len` with entries in `D..=4D`.
fn elo_instance(max_len: usize) -> impl Strategy<Value = (u64, Vec<u64>)> {
    (1u64..=3).prop_flat_map(move |d| (Just(d), prop::collection::vec(d..=4 * d, 1..=max_len)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn elo_bound_holds((half, d) in elo_instance(12)) {
        let cmp = verify_elo(&d, Rational::integer(half), &cfg()).unwrap();
        prop_assert!(cmp.pass, "{:?}", cmp);
        let max = max_interval_probability(&d, Rational::integer(half), &cfg()).unwrap();
        prop_assert!(within_elo(&max.sup, d.len()));
        prop_assert!(cmp.exact_value <= elo_bound(d.len()) + 1e-15);
    }

    #[test]
    fn pmf_1d_is_normalized_and_symmetric(d in prop::collection::vec(1u64..20, 0..10)) {
        let pmf = pmf_1d(&d, &cfg()).unwrap();
        prop_assert_eq!(pmf.total_mass(), BigRational::one());
        for &z in pmf.support() {
            prop_assert_eq!(pmf.mass(z), pmf.mass(-z));
        }
    }

    #[test]
    fn pmf_2d_has_the_square_symmetries(a in prop::collection::vec(1u64..6, 0..7)) {
        let pmf = pmf_2d(&a, &cfg()).unwrap();
        prop_assert_eq!(pmf.total_mass(), BigRational::one());
        for (x, y) in pmf.support() {
            let m = pmf.mass((x, y));
            prop_assert_eq!(&m, &pmf.mass((y, x)));
            prop_assert_eq!(&m, &pmf.mass((-x, y)));
            prop_assert_eq!(&m, &pmf.mass((x, -y)));
        }
    }

    #[test]
    fn residue_paths_agree(d in prop::collection::vec(1u64..30, 1..9), m in 1u64..17) {
        let full = residue_counts(&d, m, ModPath::Full, &cfg()).unwrap();
        let res = residue_counts(&d, m, ModPath::Residue, &cfg()).unwrap();
        prop_assert_eq!(&full, &res);
        let total: num_bigint::BigUint = res.iter().sum();
        prop_assert_eq!(total, num_bigint::BigUint::one() << d.len());
    }

    #[test]
    fn sup_pmf_bounds_every_interval(d in prop::collection::vec(1u64..8, 1..9)) {
        let sup = sup_pmf(&d, &cfg()).unwrap();
        let max = max_interval_probability(&d, Rational::integer(1), &cfg()).unwrap();
        prop_assert!(sup <= max.sup);
        prop_assert!(max.sup <= &sup * BigRational::from_integer(BigInt::from(2)));
    }

    #[test]
    fn hit_probability_is_monotone_in_horizon(a in prop::collection::vec(1u64..4, 1..7)) {
        let mut last = BigRational::zero();
        for h in 0..=a.len() {
            let p = hit_probability_2d(&a, (0, 0), h, &cfg()).unwrap();
            prop_assert!(p >= last);
            prop_assert!(p <= BigRational::one());
            last = p;
        }
    }

    #[test]
    fn bezout_identity(b1 in 1u64..5000, b2 in 1u64..5000) {
        match positive_bezout(b1, b2) {
            Ok(pair) => {
                prop_assert!(pair.identity_holds());
                prop_assert!(pair.c_prime >= 1 && pair.c_second >= 1);
                prop_assert_eq!(
                    pair.c_prime as u128 * b1 as u128,
                    pair.c_second as u128 * b2 as u128 + 1
                );
            }
            Err(_) => prop_assert!(num_integer::gcd(b1, b2) != 1),
        }
    }

    #[test]
    fn run_lengths_expand_back(mut v in prop::collection::vec(1u64..10, 1..40)) {
        v.sort_unstable();
        let dec = run_length_decompose_values(&v).unwrap();
        prop_assert_eq!(dec.expand(), v.clone());
        prop_assert_eq!(dec.total_len(), v.len() as u64);
        prop_assert!(dec.values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn recorded_paths_replay(seed in any::<u64>(), gamma in 1u64..4, n in 1u64..300) {
        let seq = StepSequence::floor_power(Rational::new(gamma, 2)).unwrap();
        let table = StepTable::from_sequence(&seq, n).unwrap();
        let path = Trajectory::record(
            &table, n, &mut StepSampler::for_trial(seed, 0), &WalkConfig::default(),
        ).unwrap();
        prop_assert!(path.is_consistent());
        prop_assert_eq!(path.len() as u64, n);
    }
}
