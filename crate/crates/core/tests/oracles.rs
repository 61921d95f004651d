use approx::assert_relative_eq;
use invsub::oracles::*;
use invsub::postwidder::invert_postwidder;
use invsub::special::{gamma, EULER_GAMMA};
use invsub::SubordinatorSpec;

#[test]
fn exact_examples() {
    assert_eq!(exact_U(&SubordinatorSpec::poisson(0.0, 2.0).unwrap(), 10.1).unwrap(), 5.5);
    assert_relative_eq!(
        exact_U(&SubordinatorSpec::stable(0.5).unwrap(), 4.0).unwrap(),
        2.256_758_334_191_025,
        max_relative = 1e-14
    );
    assert_relative_eq!(exact_U(&SubordinatorSpec::uniform_stable_mix(), 1.0).unwrap(), 1.173_563_1, epsilon = 1e-7);
    assert_relative_eq!(exact_var_stable(0.5, 1.0).unwrap(), 0.726_760_4, epsilon = 1e-7);
}

#[test]
fn stable_variance_nonnegative() {
    for i in 1..=9 {
        let a = 0.1 * i as f64;
        for t in [0.1, 1.0, 10.0] {
            assert!(exact_var_stable(a, t).unwrap() >= 0.0);
        }
    }
}

#[test]
fn asymptotic_examples() {
    let p = SubordinatorSpec::pareto(2.0).unwrap();
    assert_relative_eq!(asymptotic_U(&p, 1e4, Regime::TToInfinity).unwrap(), 5e3, max_relative = 1e-15);
    let ts = SubordinatorSpec::two_stable(0.6, 0.3, 0.8, 0.2).unwrap();
    let t: f64 = 1e-4;
    assert_relative_eq!(
        asymptotic_U(&ts, t, Regime::TToZero).unwrap(),
        t.powf(0.6) / (0.8 * gamma(1.6)),
        max_relative = 1e-14
    );
    let g = SubordinatorSpec::gig(1.5, 0.0, -2.5).unwrap();
    assert_relative_eq!(asymptotic_U(&g, 100.0, Regime::TToInfinity).unwrap(), 3.0 * 100.0 / 2.25, max_relative = 1e-14);
    let g1 = SubordinatorSpec::gig(1.0, 0.0, -1.0).unwrap();
    let want = 2.0 * 1e3 / (1e3f64.ln() + 1.0 - 2.0 * EULER_GAMMA - 0.5f64.ln());
    assert_relative_eq!(asymptotic_U(&g1, 1e3, Regime::TToInfinity).unwrap(), want, max_relative = 1e-14);
}

#[test]
fn each_family_regime_has_one_formula() {
    let supported = [
        (SubordinatorSpec::pareto(0.5).unwrap(), Regime::TToInfinity),
        (SubordinatorSpec::pareto(1.0).unwrap(), Regime::TToInfinity),
        (SubordinatorSpec::two_stable(0.75, 0.25, 0.5, 0.5).unwrap(), Regime::TToZero),
        (SubordinatorSpec::gig(0.0, 1.0, 1.0).unwrap(), Regime::TToZero),
        (SubordinatorSpec::gig(1.0, 0.0, -0.5).unwrap(), Regime::TToInfinity),
    ];
    for (s, r) in supported {
        let a = asymptotic_regime(&s, r).unwrap();
        assert_eq!(a.regime, r);
        assert_eq!(a, asymptotic_regime(&s, r).unwrap());
    }
    assert!(asymptotic_regime(&SubordinatorSpec::pareto(1.0).unwrap(), Regime::TToZero).is_err());
    assert!(asymptotic_regime(&SubordinatorSpec::stable(0.5).unwrap(), Regime::TToZero).is_err());
}

#[test]
fn engine_tends_to_asymptote() {
    // ratio closer to 1 at the more extreme time
    let cases = [
        (SubordinatorSpec::pareto(2.0).unwrap(), Regime::TToInfinity, 1e2, 1e3),
        (SubordinatorSpec::two_stable(0.75, 0.25, 0.5, 0.5).unwrap(), Regime::TToZero, 1e-2, 1e-3),
        (SubordinatorSpec::gig(1.0, 0.0, -0.5).unwrap(), Regime::TToInfinity, 1e1, 1e3),
    ];
    for (s, r, t1, t2) in cases {
        let d = |t: f64| (invert_postwidder(&s, t, 1e-8).unwrap().u / asymptotic_U(&s, t, r).unwrap() - 1.0).abs();
        assert!(d(t2) < d(t1), "{:?}: {} then {}", s.family(), d(t1), d(t2));
        assert!(d(t2) <= 0.05);
    }
}
