use dsqnm::background::MetricParams;
use dsqnm::config::{parse_config, serialize_config, RunConfig};
use dsqnm::resolvent::CutoffFunction;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // Any admissible (M, Lambda) pair gives two ordered horizons that are
    // genuine roots, with the photon sphere 3M strictly between them.
    #[test]
    fn admissible_parameters_give_ordered_horizon_roots(
        mass in 0.1f64..10.0,
        nine_m2_lambda in 0.01f64..0.99,
    ) {
        let lambda = nine_m2_lambda / (9.0 * mass * mass);
        let p = MetricParams::new(mass, lambda).unwrap();
        prop_assert!(p.r_minus < 3.0 * mass && 3.0 * mass < p.r_plus);
        prop_assert!(p.alpha2(p.r_minus).abs() < 1e-8 * mass);
        prop_assert!(p.alpha2(p.r_plus).abs() < 1e-8 * mass);
        prop_assert!(p.kappa_minus > 0.0 && p.kappa_plus > 0.0);
        prop_assert!(p.z0() > 0.0);
    }

    // The plateau cutoff stays in [0, 1], is exactly 1 on the inner half,
    // vanishes outside its support, and is even; the widened cutoff is 1
    // on all of the original support.
    #[test]
    fn cutoff_profile_bounds_and_widening(a in 0.5f64..20.0, x in -25.0f64..25.0) {
        let chi = CutoffFunction::new(a);
        let v = chi.eval(x);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - chi.eval(-x)).abs() < 1e-15);
        if x.abs() <= 0.5 * a {
            prop_assert_eq!(v, 1.0);
        }
        if x.abs() >= a {
            prop_assert_eq!(v, 0.0);
        }
        let wide = chi.widened();
        prop_assert!((wide.eval(x) * v - v).abs() < 1e-15);
    }

    // Serializing any valid config and parsing it back is the identity.
    #[test]
    fn config_serialization_round_trips(
        mass in 0.2f64..5.0,
        nine_m2_lambda in 0.05f64..0.95,
        x in 30.0f64..100.0,
        points in 256usize..8192,
        a in 1.0f64..12.0,
    ) {
        let cfg = RunConfig {
            m: mass,
            lambda: nine_m2_lambda / (9.0 * mass * mass),
            x,
            points,
            a: a.min(0.45 * x),
            ..RunConfig::default()
        };
        cfg.validate().unwrap();
        let parsed = parse_config(&serialize_config(&cfg)).unwrap();
        prop_assert_eq!(parsed, cfg);
    }
}
