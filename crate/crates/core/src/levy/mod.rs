//! Subordinator families: Lévy exponent, its complex continuation, its
//! high-order derivatives, the Lévy density and summary moments.

mod closed;
mod complex;
mod custom;
mod gig;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::special::ln_gamma;

pub use custom::{CustomSpec, MeasureKernel};

/// Parameters of the built-in families.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyParams {
    PureDrift { mu: f64 },
    PoissonDrift { mu: f64, r: f64 },
    ParetoCP { alpha: f64 },
    Stable { alpha: f64 },
    TwoStableMix { a1: f64, a2: f64, c1: f64, c2: f64 },
    UniformStableMix,
    Gig { delta: f64, gamma: f64, kappa: f64 },
    Custom(CustomSpec),
}

/// Whether the exponent is available in closed form or only through
/// integrals against the Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentForm {
    ClosedForm,
    MeasureDefined,
}

type DensityFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// Lévy measure: absolutely continuous part plus point masses.
#[derive(Clone)]
pub struct LevyMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub support_lower: f64,
    density: Arc<DensityFn>,
}

impl LevyMeasure {
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain {
                func: "levy_density",
                detail: format!("need x > 0, got {x}"),
            });
        }
        (self.density)(x)
    }
}

impl fmt::Debug for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyMeasure")
            .field("atoms", &self.atoms)
            .field("support_lower", &self.support_lower)
            .finish_non_exhaustive()
    }
}

/// Normalised Taylor coefficients `T_m = phi^{(m)}(lambda) lambda^m / m!`,
/// with a relative accuracy estimate for quadrature-based families.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    pub lambda: f64,
    pub coeffs: Vec<f64>,
    pub rel_err: f64,
}

#[derive(Debug)]
pub(crate) enum Kind {
    PureDrift { mu: f64 },
    Poisson { mu: f64, r: f64 },
    Pareto { alpha: f64 },
    Stable { alpha: f64 },
    TwoStable { a1: f64, a2: f64, c1: f64, c2: f64 },
    UniMix,
    Gamma { gamma: f64, kappa: f64 },
    Gig(gig::Gig),
    Custom(custom::Custom),
}

/// A subordinator described by its drift and Lévy measure.
#[derive(Clone, Debug)]
pub struct SubordinatorSpec {
    family: FamilyParams,
    drift: f64,
    measure: LevyMeasure,
    form: ExponentForm,
    kind: Arc<Kind>,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl SubordinatorSpec {
    pub fn new(family: FamilyParams) -> Result<Self> {
        let (kind, drift, atoms, support_lower, form) = match &family {
            FamilyParams::PureDrift { mu } => {
                check_finite("mu", *mu)?;
                if !(*mu > 0.0) {
                    return Err(invalid(format!("PureDrift requires mu > 0, got {mu}")));
                }
                (Kind::PureDrift { mu: *mu }, *mu, vec![], 0.0, ExponentForm::ClosedForm)
            }
            FamilyParams::PoissonDrift { mu, r } => {
                check_finite("mu", *mu)?;
                check_finite("r", *r)?;
                if !(*mu >= 0.0) {
                    return Err(invalid(format!("PoissonDrift requires mu >= 0, got {mu}")));
                }
                if !(*r > 0.0) {
                    return Err(invalid(format!("PoissonDrift requires r > 0, got {r}")));
                }
                (
                    Kind::Poisson { mu: *mu, r: *r },
                    *mu,
                    vec![(1.0, *r)],
                    1.0,
                    ExponentForm::ClosedForm,
                )
            }
            FamilyParams::ParetoCP { alpha } => {
                check_finite("alpha", *alpha)?;
                if !(*alpha > 0.0) {
                    return Err(invalid(format!("ParetoCP requires alpha > 0, got {alpha}")));
                }
                (Kind::Pareto { alpha: *alpha }, 0.0, vec![], 1.0, ExponentForm::ClosedForm)
            }
            FamilyParams::Stable { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(invalid(format!("Stable requires 0 < alpha < 1, got {alpha}")));
                }
                (Kind::Stable { alpha: *alpha }, 0.0, vec![], 0.0, ExponentForm::ClosedForm)
            }
            FamilyParams::TwoStableMix { a1, a2, c1, c2 } => {
                if !(0.0 < *a2 && a2 < a1 && *a1 < 1.0) {
                    return Err(invalid(format!(
                        "TwoStableMix requires 0 < a2 < a1 < 1, got a1={a1}, a2={a2}"
                    )));
                }
                if !(*c1 > 0.0 && *c2 > 0.0) {
                    return Err(invalid(format!(
                        "TwoStableMix requires c1 > 0 and c2 > 0, got c1={c1}, c2={c2}"
                    )));
                }
                if (c1 + c2 - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!(
                        "TwoStableMix requires c1 + c2 = 1, got {}",
                        c1 + c2
                    )));
                }
                (
                    Kind::TwoStable { a1: *a1, a2: *a2, c1: *c1, c2: *c2 },
                    0.0,
                    vec![],
                    0.0,
                    ExponentForm::ClosedForm,
                )
            }
            FamilyParams::UniformStableMix => {
                (Kind::UniMix, 0.0, vec![], 0.0, ExponentForm::ClosedForm)
            }
            FamilyParams::Gig { delta, gamma, kappa } => {
                check_finite("delta", *delta)?;
                check_finite("gamma", *gamma)?;
                check_finite("kappa", *kappa)?;
                let ok = if *kappa > 0.0 {
                    *delta >= 0.0 && *gamma > 0.0
                } else if *kappa == 0.0 {
                    *delta > 0.0 && *gamma > 0.0
                } else {
                    *delta > 0.0 && *gamma >= 0.0
                };
                if !ok {
                    return Err(invalid(format!(
                        "GIG parameters outside the admissible domain \
                         (kappa>0: delta>=0, gamma>0; kappa=0: delta>0, gamma>0; \
                         kappa<0: delta>0, gamma>=0), got delta={delta}, gamma={gamma}, kappa={kappa}"
                    )));
                }
                let kind = if *delta == 0.0 {
                    Kind::Gamma { gamma: *gamma, kappa: *kappa }
                } else {
                    Kind::Gig(gig::Gig::new(*delta, *gamma, *kappa))
                };
                let form = if *delta == 0.0 {
                    ExponentForm::ClosedForm
                } else {
                    ExponentForm::MeasureDefined
                };
                (kind, 0.0, vec![], 0.0, form)
            }
            FamilyParams::Custom(spec) => {
                let c = custom::Custom::new(spec.clone())?;
                let atoms = c.atoms();
                let lower = c.support_lower();
                (Kind::Custom(c), spec.drift, atoms, lower, ExponentForm::MeasureDefined)
            }
        };
        let kind = Arc::new(kind);
        let k2 = Arc::clone(&kind);
        let density: Arc<DensityFn> = Arc::new(move |x| density_of(&k2, x));
        Ok(Self {
            family,
            drift,
            measure: LevyMeasure { atoms, support_lower, density },
            form,
            kind,
        })
    }

    pub fn pure_drift(mu: f64) -> Result<Self> {
        Self::new(FamilyParams::PureDrift { mu })
    }
    pub fn poisson(mu: f64, r: f64) -> Result<Self> {
        Self::new(FamilyParams::PoissonDrift { mu, r })
    }
    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(FamilyParams::ParetoCP { alpha })
    }
    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(FamilyParams::Stable { alpha })
    }
    pub fn two_stable(a1: f64, a2: f64, c1: f64, c2: f64) -> Result<Self> {
        Self::new(FamilyParams::TwoStableMix { a1, a2, c1, c2 })
    }
    pub fn uniform_stable_mix() -> Self {
        Self::new(FamilyParams::UniformStableMix).expect("parameter-free family")
    }
    pub fn gig(delta: f64, gamma: f64, kappa: f64) -> Result<Self> {
        Self::new(FamilyParams::Gig { delta, gamma, kappa })
    }
    pub fn custom(spec: CustomSpec) -> Result<Self> {
        Self::new(FamilyParams::Custom(spec))
    }

    pub fn family(&self) -> &FamilyParams {
        &self.family
    }
    pub fn drift(&self) -> f64 {
        self.drift
    }
    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }
    pub fn exponent_form(&self) -> ExponentForm {
        self.form
    }
    /// `phi(lambda)` for `lambda >= 0`.
    pub fn phi(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) || lambda.is_infinite() {
            return Err(Error::Domain {
                func: "phi_eval",
                detail: format!("need finite lambda >= 0, got {lambda}"),
            });
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        match &*self.kind {
            Kind::Gig(g) => g.phi(lambda),
            Kind::Custom(c) => Ok(c.taylor(lambda, 1)?.coeffs[0]),
            k => closed::phi(k, lambda),
        }
    }

    /// `phi(z)` for `Re z > 0`.
    pub fn phi_complex(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(Error::Domain {
                func: "phi_real_imag",
                detail: format!("need Re z > 0, got {z}"),
            });
        }
        complex::phi(&self.kind, z)
    }

    /// `(phi_r, phi_i)` with `phi(b + iu) = phi_r + i phi_i`.
    pub fn phi_real_imag(&self, b: f64, u: f64) -> Result<(f64, f64)> {
        if !(b > 0.0) {
            return Err(invalid(format!("phi_real_imag requires b > 0, got {b}")));
        }
        if u == 0.0 {
            return Ok((self.phi(b)?, 0.0));
        }
        let p = self.phi_complex(Complex64::new(b, u))?;
        Ok((p.re, p.im))
    }

    /// Normalised Taylor coefficients `T_0 .. T_{k-1}` at `lambda`.
    pub fn phi_taylor(&self, lambda: f64, k: usize) -> Result<Taylor> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain {
                func: "phi_derivs",
                detail: format!("need finite lambda > 0, got {lambda}"),
            });
        }
        if k == 0 || k > 513 {
            return Err(invalid(format!("derivative count must be in 1..=513, got {k}")));
        }
        match &*self.kind {
            Kind::Gig(g) => g.taylor(lambda, k),
            Kind::Custom(c) => c.taylor(lambda, k),
            kd => closed::taylor(kd, lambda, k),
        }
    }

    /// Raw derivatives `phi^{(0)}(lambda) .. phi^{(k-1)}(lambda)`.
    pub fn phi_derivs(&self, lambda: f64, k: usize) -> Result<Vec<f64>> {
        let t = self.phi_taylor(lambda, k)?;
        let ll = lambda.ln();
        t.coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                if c == 0.0 || m == 0 {
                    return Ok(c);
                }
                let ln = c.abs().ln() + ln_gamma(m as f64 + 1.0) - m as f64 * ll;
                if ln > 709.0 {
                    return Err(Error::Overflow {
                        what: format!("phi^({m})({lambda})"),
                        log10_magnitude: ln / std::f64::consts::LN_10,
                    });
                }
                Ok(c.signum() * ln.exp())
            })
            .collect()
    }

    /// Density of the absolutely continuous part of the Lévy measure.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        self.measure.density(x)
    }

    /// `E D(1) = mu + ∫ x Pi(dx)`, possibly infinite.
    pub fn mean_of_d1(&self) -> f64 {
        match &*self.kind {
            Kind::PureDrift { mu } => *mu,
            Kind::Poisson { mu, r } => mu + r,
            Kind::Pareto { alpha } => {
                if *alpha > 1.0 {
                    alpha / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Kind::Stable { .. } | Kind::TwoStable { .. } | Kind::UniMix => f64::INFINITY,
            Kind::Gamma { gamma, kappa } => 2.0 * kappa / (gamma * gamma),
            Kind::Gig(g) => g.mean(),
            Kind::Custom(c) => c.mean(),
        }
    }

    /// Total mass of the Lévy measure (infinite unless compound Poisson).
    pub fn total_mass(&self) -> f64 {
        match &*self.kind {
            Kind::Poisson { r, .. } => *r,
            Kind::Pareto { .. } => 1.0,
            Kind::PureDrift { .. } => 0.0,
            Kind::Custom(c) => c.mass(),
            _ => f64::INFINITY,
        }
    }

    /// Mass `m` of the Lévy measure when `D` is a driftless compound Poisson
    /// process whose jump law has no atoms.
    pub fn continuous_jump_mass(&self) -> Option<f64> {
        let m = self.total_mass();
        (self.drift == 0.0 && m.is_finite() && m > 0.0 && self.measure.atoms.is_empty()).then_some(m)
    }

    /// `Pi((0, x])` for a finite Lévy measure.
    pub fn measure_cdf(&self, x: f64) -> Result<f64> {
        let m = self.total_mass();
        let tail = match &*self.kind {
            Kind::Poisson { r, .. } => {
                if x < 1.0 {
                    *r
                } else {
                    0.0
                }
            }
            Kind::Pareto { alpha } => {
                if x < 1.0 {
                    1.0
                } else {
                    x.powf(-alpha)
                }
            }
            Kind::PureDrift { .. } => 0.0,
            Kind::Custom(c) if m.is_finite() => c.tail(x)?,
            _ => return Err(Error::Unsupported(format!("{:?} has infinite Lévy mass", self.family))),
        };
        Ok(m - tail)
    }

    /// `lim_{lambda -> inf} 1/phi(lambda)`: the renewal-measure atom at 0.
    pub fn atom_at_zero(&self) -> f64 {
        if self.drift > 0.0 {
            return 0.0;
        }
        let m = self.total_mass();
        if m.is_finite() && m > 0.0 {
            1.0 / m
        } else {
            0.0
        }
    }

    /// `(spacing, weight)` when the renewal measure is a pure lattice.
    pub fn lattice(&self) -> Option<(f64, f64)> {
        match &*self.kind {
            Kind::Poisson { mu, r } if *mu == 0.0 => Some((1.0, 1.0 / r)),
            Kind::Custom(c) => match c.spec().kernels.as_slice() {
                [MeasureKernel::Atom { x, w }] if c.spec().drift == 0.0 => Some((*x, 1.0 / w)),
                _ => None,
            },
            _ => None,
        }
    }

    /// True when `U` is a step function: no drift and a purely atomic measure.
    /// Post-Widder extrapolation smooths the jumps and is unreliable here.
    pub fn step_renewal(&self) -> bool {
        match &*self.kind {
            Kind::Poisson { mu, .. } => *mu == 0.0,
            Kind::Custom(c) => {
                let cs = c.spec();
                cs.drift == 0.0 && cs.kernels.iter().all(|k| matches!(k, MeasureKernel::Atom { .. }))
            }
            _ => false,
        }
    }

    /// Points in `(0, horizon]` where `U` or `U'` may fail to be smooth.
    pub fn breakpoints(&self, horizon: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        let push_multiples = |x: f64, pts: &mut Vec<f64>| {
            if x <= 0.0 {
                return;
            }
            let mut m = 1.0;
            while m * x <= horizon && pts.len() < 10_000 {
                pts.push(m * x);
                m += 1.0;
            }
        };
        match &*self.kind {
            Kind::Poisson { .. } | Kind::Pareto { .. } => push_multiples(1.0, &mut pts),
            Kind::Custom(c) => {
                for x in c.break_scales() {
                    push_multiples(x, &mut pts);
                }
            }
            _ => {}
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

fn density_of(kind: &Kind, x: f64) -> Result<f64> {
    match kind {
        Kind::PureDrift { .. } | Kind::Poisson { .. } => Ok(0.0),
        Kind::Pareto { alpha } => Ok(if x >= 1.0 { alpha * x.powf(-alpha - 1.0) } else { 0.0 }),
        Kind::Stable { alpha } => Ok(stable_density(*alpha, 1.0, x)),
        Kind::TwoStable { a1, a2, c1, c2 } => {
            Ok(stable_density(*a1, *c1, x) + stable_density(*a2, *c2, x))
        }
        Kind::UniMix => Ok(closed::unimix_density(x)),
        Kind::Gamma { gamma, kappa } => Ok(kappa / x * (-0.5 * gamma * gamma * x).exp()),
        Kind::Gig(g) => g.density(x),
        Kind::Custom(c) => Ok(c.density(x)),
    }
}

/// Lévy density of `weight * lambda^alpha`.
pub(crate) fn stable_density(alpha: f64, weight: f64, x: f64) -> f64 {
    weight * alpha / crate::special::gamma(1.0 - alpha) * x.powf(-1.0 - alpha)
}
