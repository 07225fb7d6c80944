use proptest::prelude::*;
use sockp_core::normal::inverse_cdf;
use statrs::distribution::{ContinuousCDF, Normal};

proptest! {
    #[test]
    fn quantile_matches_reference(p in 1e-12f64..(1.0 - 1e-12)) {
        let reference = Normal::new(0.0, 1.0).unwrap().inverse_cdf(p);
        let got = inverse_cdf(p);
        prop_assert!((got - reference).abs() <= 1e-9 * reference.abs().max(1.0), "p = {}: {} vs {}", p, got, reference);
    }
}

#[test]
fn textbook_levels() {
    let std = Normal::new(0.0, 1.0).unwrap();
    for p in [0.9, 0.95, 0.975, 0.99, 0.995] {
        assert!((inverse_cdf(p) - std.inverse_cdf(p)).abs() < 1e-9);
        assert!((std.cdf(inverse_cdf(p)) - p).abs() < 1e-10);
    }
}
