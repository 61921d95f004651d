//! Closed-form exponents and their normalised Taylor coefficients.

use super::{Kind, Taylor};
use crate::error::{Error, Result};
use crate::quad;
use crate::series::Series;
use crate::special::{gamma, gen_exp_integral, ln_gamma, ln_upper_gamma};

pub(super) fn phi(kind: &Kind, lambda: f64) -> Result<f64> {
    Ok(match kind {
        Kind::PureDrift { mu } => mu * lambda,
        Kind::Poisson { mu, r } => mu * lambda - r * (-lambda).exp_m1(),
        Kind::Pareto { alpha } => pareto_phi(*alpha, lambda)?,
        Kind::Stable { alpha } => lambda.powf(*alpha),
        Kind::TwoStable { a1, a2, c1, c2 } => c1 * lambda.powf(*a1) + c2 * lambda.powf(*a2),
        Kind::UniMix => unimix_phi(lambda),
        Kind::Gamma { gamma, kappa } => kappa * (2.0 * lambda / (gamma * gamma)).ln_1p(),
        Kind::Gig(_) | Kind::Custom(_) => unreachable!("not a closed-form family"),
    })
}

pub(super) fn taylor(kind: &Kind, lambda: f64, k: usize) -> Result<Taylor> {
    let coeffs = match kind {
        Kind::PureDrift { mu } => {
            let mut c = vec![0.0; k];
            c[0] = mu * lambda;
            if k > 1 {
                c[1] = mu * lambda;
            }
            c
        }
        Kind::Poisson { mu, r } => {
            // mu lambda (1 + e) + r (1 - exp(-lambda - lambda e))
            let drift = Series::linear(mu * lambda, mu * lambda, k);
            let jumps = Series::exp_linear(-lambda, -lambda, k).scale(-*r);
            let mut s = &drift + &jumps;
            s.c[0] = mu * lambda - r * (-lambda).exp_m1();
            s.c
        }
        Kind::Stable { alpha } => Series::one_plus_e_pow(*alpha, k).scale(lambda.powf(*alpha)).c,
        Kind::TwoStable { a1, a2, c1, c2 } => {
            let s1 = Series::one_plus_e_pow(*a1, k).scale(c1 * lambda.powf(*a1));
            let s2 = Series::one_plus_e_pow(*a2, k).scale(c2 * lambda.powf(*a2));
            (&s1 + &s2).c
        }
        Kind::UniMix => unimix_taylor(lambda, k),
        Kind::Pareto { alpha } => pareto_taylor(*alpha, lambda, k)?,
        Kind::Gamma { gamma, kappa } => {
            let a = lambda + 0.5 * gamma * gamma;
            let ratio = lambda / a;
            let mut c = vec![0.0; k];
            c[0] = kappa * (2.0 * lambda / (gamma * gamma)).ln_1p();
            let mut p = 1.0;
            for (j, v) in c.iter_mut().enumerate().skip(1) {
                p *= ratio;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                *v = sign * kappa * p / j as f64;
            }
            c
        }
        Kind::Gig(_) | Kind::Custom(_) => unreachable!("not a closed-form family"),
    };
    Ok(Taylor { lambda, coeffs, rel_err: 0.0 })
}

/// `1 - alpha E_{1+alpha}(lambda)`, rewritten by parts as
/// `1 - e^{-lambda} + lambda E_alpha(lambda)` to avoid cancellation.
fn pareto_phi(alpha: f64, lambda: f64) -> Result<f64> {
    let e = gen_exp_integral(alpha, lambda)?.value;
    Ok(-(-lambda).exp_m1() + lambda * e)
}

fn pareto_taylor(alpha: f64, lambda: f64, k: usize) -> Result<Vec<f64>> {
    let mut c = vec![0.0; k];
    c[0] = pareto_phi(alpha, lambda)?;
    let ll = lambda.ln();
    let sign = |j: usize| if j % 2 == 1 { 1.0 } else { -1.0 };
    // orders with 1 + alpha - j >= 1 go through E_nu directly
    let mut j = 1;
    while j < k && (j as f64) <= alpha {
        let nu = 1.0 + alpha - j as f64;
        let e = gen_exp_integral(nu, lambda)?.value;
        let ln = j as f64 * ll - ln_gamma(j as f64 + 1.0);
        c[j] = sign(j) * alpha * e * ln.exp();
        j += 1;
    }
    if j >= k {
        return Ok(c);
    }
    // G_j = lambda^alpha Gamma(j - alpha, lambda) / j!, then upward recurrence
    let mut g = (alpha * ll + ln_upper_gamma(j as f64 - alpha, lambda)? - ln_gamma(j as f64 + 1.0)).exp();
    loop {
        c[j] = sign(j) * alpha * g;
        if j + 1 >= k {
            break;
        }
        let jf = j as f64;
        let src = (jf * ll - lambda - ln_gamma(jf + 2.0)).exp();
        g = (jf - alpha) / (jf + 1.0) * g + src;
        j += 1;
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Accuracy {
            what: format!("Pareto derivatives at lambda={lambda}"),
            residual: f64::INFINITY,
        });
    }
    Ok(c)
}

/// `(lambda - 1) / ln(lambda)` with the removable singularity at 1 handled
/// through the series of `ln(1 + e) / e`.
pub(crate) fn unimix_phi(lambda: f64) -> f64 {
    let e = lambda - 1.0;
    if e.abs() < 1e-3 {
        let mut l = 0.0;
        let mut p = 1.0;
        for n in 0..12 {
            l += p / (n as f64 + 1.0);
            p *= -e;
        }
        1.0 / l
    } else {
        e / lambda.ln()
    }
}

/// Panels in `beta` for `∫_0^1 f(beta) lambda^beta d beta`, enough that
/// `lambda^beta` changes by at most `e^8` across one panel.
fn beta_panels(lambda: f64) -> usize {
    ((lambda.ln().abs() / 8.0).ceil() as usize).max(1)
}

fn unimix_taylor(lambda: f64, k: usize) -> Vec<f64> {
    let rule = quad::gl48();
    let ll = lambda.ln();
    let np = beta_panels(lambda);
    let mut c = vec![0.0; k];
    for p in 0..np {
        let a = p as f64 / np as f64;
        let b = (p + 1) as f64 / np as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let beta = mid + half * x;
            let mut term = w * half * (beta * ll).exp();
            for (m, v) in c.iter_mut().enumerate().skip(1) {
                term *= (beta - (m as f64 - 1.0)) / m as f64;
                *v += term;
            }
        }
    }
    c[0] = unimix_phi(lambda);
    c
}

pub(super) fn unimix_density(x: f64) -> f64 {
    // ∫_0^1 beta / Gamma(1 - beta) x^{-1-beta} d beta
    let lx = x.ln();
    let np = beta_panels(x);
    let mut s = 0.0;
    for p in 0..np {
        let a = p as f64 / np as f64;
        let b = (p + 1) as f64 / np as f64;
        s += quad::fixed(
            quad::gl48(),
            &|beta: f64| beta / gamma(1.0 - beta) * (-(1.0 + beta) * lx).exp(),
            a,
            b,
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::SubordinatorSpec;
    use super::*;
    use approx::assert_relative_eq;

    fn taylor_of(spec: &SubordinatorSpec, lam: f64, k: usize) -> Vec<f64> {
        spec.phi_taylor(lam, k).unwrap().coeffs
    }

    #[test]
    fn stable_falling_factorial() {
        let s = SubordinatorSpec::stable(0.3).unwrap();
        let lam = 2.5;
        let d = s.phi_derivs(lam, 8).unwrap();
        let mut ff = 1.0;
        for (j, v) in d.iter().enumerate() {
            assert_relative_eq!(*v, ff * lam.powf(0.3 - j as f64), max_relative = 1e-13);
            ff *= 0.3 - j as f64;
        }
    }

    #[test]
    fn unimix_near_one_is_smooth() {
        let a = unimix_phi(1.0 + 0.99e-3);
        let b = unimix_phi(1.0 + 1.01e-3);
        let c = unimix_phi(1.0);
        assert!((a - b).abs() < 1e-5);
        assert_relative_eq!(c, 1.0);
        assert_relative_eq!(unimix_phi(1.0 + 1e-4), 1e-4 / (1e-4f64).ln_1p(), max_relative = 1e-13);
    }

    #[test]
    fn unimix_taylor_matches_series_division() {
        // (lambda(1+e) - 1) / ln(lambda(1+e)) by series arithmetic, fine for small lambda
        let lam = 0.3;
        let k = 12;
        let num = Series::linear(lam - 1.0, lam, k);
        let den = &Series::constant(lam.ln(), k) + &Series::linear(1.0, 1.0, k).ln();
        let expect = num.div(&den);
        let got = taylor_of(&SubordinatorSpec::uniform_stable_mix(), lam, k);
        for m in 0..k {
            assert!((got[m] - expect.c[m]).abs() < 1e-12 * (1.0 + expect.c[m].abs()), "m={m}");
        }
    }

    #[test]
    fn pareto_phi_matches_definition() {
        for &alpha in &[0.5, 1.0, 2.0, 3.7] {
            let spec = SubordinatorSpec::pareto(alpha).unwrap();
            for &lam in &[1e-3, 0.5, 1.0, 7.0, 60.0] {
                let direct = 1.0 - alpha * gen_exp_integral(1.0 + alpha, lam).unwrap().value;
                let v = spec.phi(lam).unwrap();
                assert!((v - direct).abs() < 1e-13, "alpha={alpha} lam={lam}");
            }
        }
    }

    #[test]
    fn pareto_taylor_matches_expint_formula() {
        for &alpha in &[0.5, 1.0, 2.0, 2.5] {
            let spec = SubordinatorSpec::pareto(alpha).unwrap();
            for &lam in &[0.2, 1.0, 5.0, 40.0] {
                let t = taylor_of(&spec, lam, 20);
                for (j, &v) in t.iter().enumerate().skip(1) {
                    let nu = 1.0 + alpha - j as f64;
                    let e = gen_exp_integral(nu, lam).unwrap().value;
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    let expect = sign * alpha * e * lam.powi(j as i32) / gamma(j as f64 + 1.0);
                    assert_relative_eq!(v, expect, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn pareto_bounded_limit() {
        let spec = SubordinatorSpec::pareto(1.0).unwrap();
        assert!((spec.phi(1e6).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gamma_process_derivatives() {
        let spec = SubordinatorSpec::gig(0.0, 1.0, 1.0).unwrap();
        let lam = 0.8;
        let d = spec.phi_derivs(lam, 6).unwrap();
        // phi = ln(1 + 2 lambda), phi^(j) = (-1)^{j+1} (j-1)! 2^j / (1 + 2 lambda)^j
        for (j, &v) in d.iter().enumerate().skip(1) {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let expect = sign * gamma(j as f64) * 2f64.powi(j as i32) / (1.0 + 2.0 * lam).powi(j as i32);
            assert_relative_eq!(v, expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn unimix_density_integrates_to_phi_second() {
        // ∫ x^2 e^{-x} g(x) dx = -phi''(1) = ∫ beta (1 - beta) d beta = 1/6
        let f = |s: f64| {
            let x = s.exp();
            x * x * x * (-x).exp() * unimix_density(x)
        };
        let r = quad::adaptive(&f, -60.0, 6.0, 1e-11, 0.0, 2000);
        assert_relative_eq!(r.value, 1.0 / 6.0, max_relative = 1e-8);
    }
}
