use proptest::prelude::*;
use slipstream::criteria::rate_law;

proptest! {
    #[test]
    fn lp_exponent_reduces_to_l2_at_p2(beta in 0.0f64..=1.0) {
        let r = rate_law(beta, 2.0).unwrap();
        prop_assert!((r.predicted_lp_exponent - r.predicted_l2_exponent).abs() < 1e-15);
    }

    #[test]
    fn lp_exponent_positive_below_threshold(beta in 0.21f64..0.99, p in 2.0f64..40.0) {
        let r = rate_law(beta, p).unwrap();
        prop_assume!((p - r.p_threshold).abs() > 1e-9);
        prop_assert_eq!(r.predicted_lp_exponent > 0.0, p < r.p_threshold);
    }
}
