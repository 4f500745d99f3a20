mod common;

use proptest::prelude::*;
use qpq::analysis::classical_decoy_bound;
use qpq::protocol::{run_session_sampled, Database, QuerySpec};
use qpq::strategies::{honest, measure_resend};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dims() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=4, 2..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_compose(seed in any::<u64>(), d in dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(common::check_unitarity(&mut rng, &d), Ok(()));
    }

    #[test]
    fn partial_trace_is_consistent(seed in any::<u64>(), d in dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(common::check_partial_trace(&mut rng, &d), Ok(()));
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), d in dims(), rank in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(common::check_entropy(&mut rng, &d, rank), Ok(()));
    }

    #[test]
    fn measurement_is_normalized(seed in any::<u64>(), d in dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(common::check_measurement(&mut rng, &d), Ok(()));
    }

    #[test]
    fn decoy_bound_is_monotone(n in 2usize..=64) {
        let mut prev = f64::INFINITY;
        for m in 1..=n {
            let b = classical_decoy_bound(n, m).unwrap();
            prop_assert!(b <= prev + 1e-12);
            prop_assert!(b >= -1e-12);
            prev = b;
        }
    }

    #[test]
    fn transcripts_are_seed_stable(seed in any::<u64>(), j in 0usize..4) {
        let db = Database::standard(2, 8).unwrap();
        for strategy in [honest(2), measure_resend(2, 2)] {
            let run = || run_session_sampled(&QuerySpec::canonical(j), None, &db, &strategy, &Default::default(), seed)
                .unwrap().1.to_json().unwrap();
            prop_assert_eq!(run(), run());
        }
    }
}
