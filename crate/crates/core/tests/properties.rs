use proptest::prelude::*;

use invsub::postwidder::{extrapolate, extrapolation_weights, invert_postwidder, u_k};
use invsub::special::{bessel_k, gen_exp_integral};
use invsub::SubordinatorSpec;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_sum_to_one(n in 1usize..=10) {
        let s: f64 = extrapolation_weights(n).unwrap().iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_sequence_is_reproduced(n in 1usize..=10, c0 in -1e6f64..1e6) {
        let p = extrapolate(&vec![c0; n]).unwrap();
        prop_assert!((p - c0).abs() <= 1e-12 * c0.abs().max(1e-300));
    }

    #[test]
    fn polynomials_are_extrapolated_exactly(coef in prop::collection::vec(-10.0f64..10.0, 1..=10)) {
        prop_assume!(coef[0].abs() > 1e-3);
        let n = coef.len();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let h = 0.5f64.powi(i as i32);
                coef.iter().rev().fold(0.0, |acc, c| acc * h + c)
            })
            .collect();
        let p = extrapolate(&vals).unwrap();
        let scale = coef.iter().map(|c| c.abs()).sum::<f64>();
        prop_assert!((p - coef[0]).abs() <= 1e-9 * scale, "{p} vs {}", coef[0]);
    }

    #[test]
    fn pure_drift_terms(mu in 0.1f64..10.0, t in 0.01f64..100.0, e in 0u32..=9) {
        let spec = SubordinatorSpec::pure_drift(mu).unwrap();
        let term = u_k(&spec, t, 1 << e, 1.0 / t).unwrap();
        prop_assert!((term.u / (t / mu) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn phi_increasing_and_concave(a in 0.05f64..0.95, l1 in 0.01f64..50.0, dl in 0.01f64..50.0) {
        let l2 = l1 + dl;
        for spec in [
            SubordinatorSpec::stable(a).unwrap(),
            SubordinatorSpec::pareto(a * 3.0).unwrap(),
            SubordinatorSpec::gig(1.0, a, a - 0.5).unwrap(),
        ] {
            let (p1, p2) = (spec.phi(l1).unwrap(), spec.phi(l2).unwrap());
            // a bounded exponent is flat in binary64 once e^{-lambda} is below ulp
            if spec.total_mass().is_finite() {
                prop_assert!(p2 >= p1);
            } else {
                prop_assert!(p2 > p1);
            }
            let pm = spec.phi(0.5 * (l1 + l2)).unwrap();
            prop_assert!(pm >= 0.5 * (p1 + p2) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn bessel_k_even_in_order(nu in 0.0f64..5.0, x in 0.05f64..50.0) {
        let a = bessel_k(nu, x).unwrap();
        let b = bessel_k(-nu, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn exp_integral_order_recurrence(nu in -5.0f64..5.0, lam in 0.05f64..30.0) {
        // nu E_{nu+1}(x) = e^{-x} - x E_nu(x)
        let e0 = gen_exp_integral(nu, lam).unwrap().value;
        let e1 = gen_exp_integral(nu + 1.0, lam).unwrap().value;
        let lhs = nu * e1 + lam * e0;
        prop_assert!((lhs - (-lam).exp()).abs() <= 1e-10 * (-lam).exp().max(lam * e0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stable_renewal_is_monotone(a in 0.1f64..0.9, t in 0.05f64..20.0, dt in 0.01f64..5.0) {
        let spec = SubordinatorSpec::stable(a).unwrap();
        let eps = 1e-8;
        let u1 = invert_postwidder(&spec, t, eps).unwrap();
        let u2 = invert_postwidder(&spec, t + dt, eps).unwrap();
        prop_assert!(u2.u >= u1.u - 10.0 * eps);
        prop_assert!(u1.du.unwrap() >= 0.0);
    }
}
