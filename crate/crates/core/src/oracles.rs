//! Closed forms and Tauberian asymptotics for the built-in families.

use crate::error::{invalid, Error, Result};
use crate::levy::{FamilyParams, SubordinatorSpec};
use crate::special::{bessel_k, exp_scaled_gamma0, gamma, EULER_GAMMA};

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("t must be positive and finite, got {t}")))
    }
}

fn unsupported(spec: &SubordinatorSpec, what: &str) -> Error {
    Error::Unsupported(format!("no {what} for {:?}", spec.family()))
}

/// Exact `U(t)` for pure drift, driftless Poisson, stable and the uniform stable mixture.
#[allow(non_snake_case)]
pub fn exact_U(spec: &SubordinatorSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    match *spec.family() {
        FamilyParams::PureDrift { mu } => Ok(t / mu),
        FamilyParams::PoissonDrift { mu: 0.0, r } => Ok((t + 1.0).floor() / r),
        FamilyParams::Stable { alpha } => Ok(t.powf(alpha) / gamma(1.0 + alpha)),
        FamilyParams::UniformStableMix => Ok(EULER_GAMMA + exp_scaled_gamma0(t) + t.ln()),
        _ => Err(unsupported(spec, "closed-form U")),
    }
}

/// Exact `U'(t)` where [`exact_U`] has a differentiable closed form.
pub fn exact_du(spec: &SubordinatorSpec, t: f64) -> Result<f64> {
    check_t(t)?;
    match *spec.family() {
        FamilyParams::PureDrift { mu } => Ok(1.0 / mu),
        FamilyParams::Stable { alpha } => Ok(t.powf(alpha - 1.0) / gamma(alpha)),
        FamilyParams::UniformStableMix => Ok(exp_scaled_gamma0(t)),
        _ => Err(unsupported(spec, "closed-form U'")),
    }
}

/// `Var E(t) = 2 t^{2a} / Gamma(1+2a) - t^{2a} / Gamma(1+a)^2` for the `a`-stable case.
pub fn exact_var_stable(alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain { func: "exact_var_stable", detail: format!("need 0 < alpha < 1, got {alpha}") });
    }
    check_t(t)?;
    let g = gamma(1.0 + alpha);
    Ok(t.powf(2.0 * alpha) * (2.0 / gamma(1.0 + 2.0 * alpha) - 1.0 / (g * g)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    TToZero,
    TToInfinity,
}

/// One leading-order asymptotic formula with its constants resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticFormula {
    /// `c t^p`
    Power { c: f64, p: f64 },
    /// `t / (c0 + ln t)`
    LogCorrected { c0: f64, scale: f64 },
    /// `-1 / (kappa ln t)`
    InverseLog { kappa: f64 },
}

impl AsymptoticFormula {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            AsymptoticFormula::Power { c, p } => c * t.powf(p),
            AsymptoticFormula::LogCorrected { c0, scale } => scale * t / (c0 + t.ln()),
            AsymptoticFormula::InverseLog { kappa } => -1.0 / (kappa * t.ln()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRegime {
    pub regime: Regime,
    pub formula: AsymptoticFormula,
}

/// The leading-order formula for `spec` in `regime`, if one is known.
pub fn asymptotic_regime(spec: &SubordinatorSpec, regime: Regime) -> Result<AsymptoticRegime> {
    use AsymptoticFormula::*;
    let formula = match (spec.family(), regime) {
        (&FamilyParams::ParetoCP { alpha }, Regime::TToInfinity) => {
            if alpha < 1.0 {
                Power { c: 1.0 / (gamma(1.0 - alpha) * gamma(1.0 + alpha)), p: alpha }
            } else if alpha == 1.0 {
                LogCorrected { c0: 1.0 - EULER_GAMMA, scale: 1.0 }
            } else {
                Power { c: (alpha - 1.0) / alpha, p: 1.0 }
            }
        }
        (&FamilyParams::TwoStableMix { a1, c1, .. }, Regime::TToZero) => {
            Power { c: 1.0 / (c1 * gamma(1.0 + a1)), p: a1 }
        }
        (&FamilyParams::TwoStableMix { a2, c2, .. }, Regime::TToInfinity) => {
            Power { c: 1.0 / (c2 * gamma(1.0 + a2)), p: a2 }
        }
        (&FamilyParams::Gig { delta, kappa, .. }, Regime::TToZero) => {
            if delta == 0.0 {
                InverseLog { kappa }
            } else {
                Power { c: (2.0 / (std::f64::consts::PI * delta * delta)).sqrt(), p: 0.5 }
            }
        }
        (&FamilyParams::Gig { delta, gamma: g, kappa }, Regime::TToInfinity) => {
            if g > 0.0 {
                let mean = if delta > 0.0 {
                    delta * bessel_k(1.0 + kappa, g * delta)? / (g * bessel_k(kappa, g * delta)?)
                } else {
                    2.0 * kappa / (g * g)
                };
                Power { c: 1.0 / mean, p: 1.0 }
            } else if kappa < -1.0 {
                Power { c: 2.0 * (-kappa - 1.0) / (delta * delta), p: 1.0 }
            } else if kappa == -1.0 {
                LogCorrected {
                    c0: 1.0 - 2.0 * EULER_GAMMA - (0.5 * delta * delta).ln(),
                    scale: 2.0 / (delta * delta),
                }
            } else {
                let c = -(2f64.powf(-kappa) * delta.powf(2.0 * kappa) * gamma(-kappa))
                    / (gamma(kappa) * gamma(1.0 - kappa));
                Power { c, p: -kappa }
            }
        }
        _ => return Err(unsupported(spec, "asymptotic formula in this regime")),
    };
    Ok(AsymptoticRegime { regime, formula })
}

/// Leading-order `U(t)` in `regime`.
#[allow(non_snake_case)]
pub fn asymptotic_U(spec: &SubordinatorSpec, t: f64, regime: Regime) -> Result<f64> {
    check_t(t)?;
    Ok(asymptotic_regime(spec, regime)?.formula.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_values() {
        let p = SubordinatorSpec::poisson(0.0, 2.0).unwrap();
        assert_eq!(exact_U(&p, 10.1).unwrap(), 5.5);
        let s = SubordinatorSpec::stable(0.5).unwrap();
        assert_relative_eq!(exact_U(&s, 4.0).unwrap(), 4.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-14);
        let u = SubordinatorSpec::uniform_stable_mix();
        assert_relative_eq!(exact_U(&u, 1.0).unwrap(), 1.173_563_1, epsilon = 1e-7);
        assert!(exact_U(&SubordinatorSpec::pareto(1.0).unwrap(), 1.0).is_err());
        assert!(exact_U(&s, 0.0).is_err());
    }

    #[test]
    fn stable_variance_closed_form() {
        assert_relative_eq!(exact_var_stable(0.5, 1.0).unwrap(), 2.0 - 4.0 / std::f64::consts::PI, max_relative = 1e-14);
        assert!(exact_var_stable(1.0, 1.0).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let p2 = SubordinatorSpec::pareto(2.0).unwrap();
        assert_relative_eq!(asymptotic_U(&p2, 100.0, Regime::TToInfinity).unwrap(), 50.0, max_relative = 1e-15);
        let ts = SubordinatorSpec::two_stable(0.75, 0.25, 0.5, 0.5).unwrap();
        let t: f64 = 1e-3;
        assert_relative_eq!(
            asymptotic_U(&ts, t, Regime::TToZero).unwrap(),
            t.powf(0.75) / (0.5 * gamma(1.75)),
            max_relative = 1e-14
        );
        let g = SubordinatorSpec::gig(2.0, 0.0, -3.0).unwrap();
        assert_relative_eq!(asymptotic_U(&g, 10.0, Regime::TToInfinity).unwrap(), 10.0, max_relative = 1e-14);
        assert!(asymptotic_U(&p2, 1.0, Regime::TToZero).is_err());
    }

    #[test]
    fn renewal_slope_matches_mean() {
        let g = SubordinatorSpec::gig(1.0, 1.0, -0.5).unwrap();
        let slope = asymptotic_U(&g, 1.0, Regime::TToInfinity).unwrap();
        assert_relative_eq!(slope, 1.0 / g.mean_of_d1(), max_relative = 1e-12);
    }
}
