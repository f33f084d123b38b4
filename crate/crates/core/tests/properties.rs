use proptest::prelude::*;

use tulap_core::two_sided::{approx_pvalue, umau_pvalue};
use tulap_core::{test_vector_one_sided, ump_pvalue, verify_dp, PrivacyParams, Side, TulapParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cdf_is_a_symmetric_distribution(b in 0.0f64..0.99, q in 0.0f64..0.5, t in -60.0f64..60.0, dt in 0.0f64..3.0) {
        let d = TulapParams::new(0.0, b, q).unwrap();
        let f = d.cdf(t);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(d.cdf(t + dt) >= f);
        prop_assert!((d.cdf(-t) - (1.0 - f)).abs() < 1e-12);
    }

    #[test]
    fn quantile_round_trip(b in 0.01f64..0.95, q in 0.0f64..0.4, p in 0.001f64..0.999, m in -10.0f64..10.0) {
        let d = TulapParams::new(m, b, q).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x) - p).abs() < 1e-9);
    }

    #[test]
    fn one_sided_vectors_are_private(n in 1u64..60, theta0 in 0.02f64..0.98, alpha in 0.005f64..0.5, eps in 0.05f64..4.0, delta in 0.0f64..0.1) {
        let p = PrivacyParams::new(eps, delta).unwrap();
        for side in [Side::Greater, Side::Less] {
            let tv = test_vector_one_sided(n, theta0, alpha, &p, side).unwrap();
            prop_assert!(verify_dp(&tv, &p).passes);
            prop_assert!((tv.size().unwrap() - alpha).abs() < 1e-8);
        }
    }

    #[test]
    fn pvalues_are_probabilities(z in -20.0f64..80.0, n in 1u64..60, theta0 in 0.05f64..0.95, eps in 0.1f64..3.0) {
        let p = PrivacyParams::new(eps, 0.0).unwrap();
        let g = ump_pvalue(z, n, theta0, &p, Side::Greater, None).unwrap();
        let a = approx_pvalue(z, n, theta0, &p, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!((0.0..=1.0).contains(&a));
        // A larger release is stronger evidence against the null for the Greater side.
        prop_assert!(ump_pvalue(z + 0.5, n, theta0, &p, Side::Greater, None).unwrap() <= g + 1e-12);
    }

    #[test]
    fn umau_pvalue_in_range(z in -5.0f64..45.0, theta0 in 0.1f64..0.9) {
        let p = PrivacyParams::new(1.0, 0.0).unwrap();
        let u = umau_pvalue(z, 40, theta0, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&u));
    }
}
