mod common;

use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn product_is_associative(seed in any::<u64>(), k in 1usize..=5) {
        associativity(seed, k)?;
    }

    #[test]
    fn product_is_graded_commutative(seed in any::<u64>(), k in 1usize..=5) {
        graded_commutativity(seed, k)?;
    }

    #[test]
    fn derivatives_obey_graded_leibniz(seed in any::<u64>(), k in 1usize..=5, g in 0usize..5) {
        leibniz(seed, k, g)?;
    }

    #[test]
    fn pfaffian_squares_to_determinant(seed in any::<u64>(), k in 1usize..=6) {
        pfaffian_squared_is_det(seed, k)?;
    }

    #[test]
    fn berezin_integral_scales_by_determinant(seed in any::<u64>(), k in 1usize..=4) {
        berezin_change_of_variables(seed, k)?;
    }

    #[test]
    fn exponential_of_negative_is_inverse(seed in any::<u64>(), k in 1usize..=6) {
        exp_inverse(seed, k)?;
    }
}
