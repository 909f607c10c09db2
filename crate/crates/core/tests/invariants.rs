mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn algebra_laws((kind, p, seed) in algebra_case()) {
        check_algebra_laws(kind, p, seed)?;
    }

    #[test]
    fn matrix_products_associate((kind, p, seed) in algebra_case()) {
        check_matrix_associativity(kind, p, seed)?;
    }

    #[test]
    fn flattening_is_linear((kind, p, seed) in algebra_case()) {
        check_flatten_linearity(kind, p, seed)?;
    }

    #[test]
    fn actions_are_linear((kind, p, seed) in algebra_case()) {
        check_action_linearity(kind, p, seed)?;
    }

    #[test]
    fn witnesses_replay_and_span_is_invariant(p in prop::sample::select(vec![2u64, 3, 5, 7]), seed in any::<u64>()) {
        check_witnesses_and_invariance(p, seed)?;
    }

    #[test]
    fn closure_matches_brute_force(p in prop::sample::select(vec![2u64, 3]), seed in any::<u64>()) {
        check_micro_oracle(p, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn public_view_has_no_private_fields((tag, seed) in protocol_case()) {
        check_public_private_separation(tag, seed)?;
    }

    #[test]
    fn simulation_is_deterministic((tag, seed) in protocol_case()) {
        check_determinism(tag, seed)?;
    }
}

#[test]
fn oracle_rank_sanity() {
    assert_eq!(oracle_rank(&[vec![1, 2], vec![2, 4]], 7), 1);
    assert_eq!(oracle_rank(&[vec![1, 2], vec![2, 5]], 7), 2);
    assert_eq!(oracle_rank(&[vec![1, 1], vec![1, 0], vec![0, 1]], 2), 2);
    assert_eq!(oracle_rank(&[], 3), 0);
}
