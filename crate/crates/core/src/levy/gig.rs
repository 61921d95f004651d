//! GIG subordinators with `delta > 0`.
//!
//! The Lévy density is a Laplace transform in `y` of
//! `w(y) = 1 / (pi^2 y (J^2 + Y^2)_{|kappa|}(delta sqrt(2y)))`, so every
//! quantity reduces to a single integral over `y`. Those integrals run on
//! fixed Gauss–Legendre panels in `u = ln y`; panel nodes depend only on the
//! parameters and are cached per spec. Below the lowest panel `w` is replaced
//! by its small-argument power law and integrated analytically.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use super::Taylor;
use crate::error::{Error, Result};
use crate::quad;
use crate::special::{bessel_k, clog1p, bessel_modulus_sq, ln_bessel_k, ln_gamma, EULER_GAMMA};

const H: f64 = 0.5;
const UPPER_DECADES: f64 = 80.0;

type Panel = Arc<Vec<(f64, f64)>>;

pub(crate) struct Gig {
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    nu: f64,
    b0: f64,
    yc: f64,
    cache: RwLock<HashMap<i64, Panel>>,
}

impl std::fmt::Debug for Gig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gig")
            .field("delta", &self.delta)
            .field("gamma", &self.gamma)
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

impl Gig {
    pub fn new(delta: f64, gamma: f64, kappa: f64) -> Self {
        Self {
            delta,
            gamma,
            kappa,
            nu: kappa.abs(),
            b0: 0.5 * gamma * gamma,
            yc: 0.5 / (delta * delta),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn w(&self, y: f64) -> f64 {
        let z = self.delta * (2.0 * y).sqrt();
        let m = bessel_modulus_sq(self.nu, z);
        if m.is_finite() && m > 0.0 {
            1.0 / (PI * PI * y * m)
        } else {
            0.0
        }
    }

    fn panel(&self, i: i64) -> Panel {
        if let Some(p) = self.cache.read().expect("gig cache poisoned").get(&i) {
            return Arc::clone(p);
        }
        let rule = quad::gl16();
        let c = (i as f64 + 0.5) * H;
        let h = 0.5 * H;
        let nodes: Vec<(f64, f64)> = rule
            .0
            .iter()
            .zip(&rule.1)
            .map(|(x, wt)| {
                let y = (c + h * x).exp();
                (y, self.w(y) * y * wt * h)
            })
            .collect();
        let p = Arc::new(nodes);
        self.cache
            .write()
            .expect("gig cache poisoned")
            .insert(i, Arc::clone(&p));
        p
    }

    /// Lowest panel index: below it `w` follows its small-`y` power law and
    /// `y` is negligible next to `a_lo`.
    fn lower_index(&self, a_lo: f64) -> i64 {
        let rel = if self.nu > 0.0 { (-41.4 / self.nu).clamp(-200.0, -36.8) } else { -36.8 };
        let u = (self.yc.ln() + rel).min(a_lo.ln() - 41.4);
        (u / H).floor() as i64
    }

    fn upper_index(&self, a_hi: f64) -> i64 {
        ((a_hi.max(self.yc).ln() + UPPER_DECADES) / H).ceil() as i64
    }

    /// `w(y) ~ c y^{nu - 1}` as `y -> 0` (for `nu > 0`).
    fn small_coef(&self) -> f64 {
        (self.nu * (0.5 * self.delta * self.delta).ln() - 2.0 * ln_gamma(self.nu)).exp()
    }

    /// `∫_0^{y0} w(y) dy` from the small-argument behaviour of `J` and `Y`.
    fn mass_below(&self, y0: f64) -> f64 {
        if self.nu > 0.0 {
            self.small_coef() * y0.powf(self.nu) / self.nu
        } else {
            let z0 = self.delta * (2.0 * y0).sqrt();
            let l0 = (0.5 * z0).ln() + EULER_GAMMA;
            ((2.0 * l0 / PI).atan() + 0.5 * PI) / PI
        }
    }

    /// Visit `(y, w(y) dy)` on the panel grid; returns `(y0, mass below y0)`.
    fn visit<F: FnMut(f64, f64)>(&self, a_lo: f64, a_hi: f64, mut f: F) -> (f64, f64) {
        let lo = self.lower_index(a_lo);
        let hi = self.upper_index(a_hi);
        for i in lo..hi {
            for &(y, wdy) in self.panel(i).iter() {
                if wdy != 0.0 {
                    f(y, wdy);
                }
            }
        }
        let y0 = (lo as f64 * H).exp();
        (y0, self.mass_below(y0))
    }

    pub fn phi(&self, lambda: f64) -> Result<f64> {
        let (d, g, k) = (self.delta, self.gamma, self.kappa);
        let v = if g > 0.0 {
            0.5 * k * (2.0 * lambda / (g * g)).ln_1p() - ln_bessel_k(k, d * (g * g + 2.0 * lambda).sqrt())?
                + ln_bessel_k(k, d * g)?
        } else {
            let lk = std::f64::consts::LN_2 - 0.5 * k * (0.5 * d * d).ln() - 0.5 * k * lambda.ln()
                + ln_bessel_k(-k, d * (2.0 * lambda).sqrt())?
                - ln_gamma(-k);
            -lk
        };
        Ok(v)
    }

    pub fn taylor(&self, lambda: f64, k: usize) -> Result<Taylor> {
        let a = lambda + self.b0;
        let mut acc = vec![0.0; k];
        let (_, low) = self.visit(a, a, |y, wdy| {
            let r = lambda / (a + y);
            let mut p = 1.0;
            for v in acc.iter_mut().skip(1) {
                p *= r;
                if p < 1e-300 {
                    break;
                }
                *v += wdy * p;
            }
        });
        let low = low + self.kappa.max(0.0);
        let ratio = lambda / a;
        let mut p = 1.0;
        let mut coeffs = vec![0.0; k];
        coeffs[0] = self.phi(lambda)?;
        for j in 1..k {
            p *= ratio;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            coeffs[j] = sign * (acc[j] + low * p) / j as f64;
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Accuracy {
                what: format!("GIG derivatives at lambda={lambda}"),
                residual: f64::INFINITY,
            });
        }
        Ok(Taylor { lambda, coeffs, rel_err: 1e-13 })
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        let mut s = 0.0;
        let (_, low) = self.visit(1.0 / x, 1.0 / x, |y, wdy| s += wdy * (-x * y).exp());
        let v = (-self.b0 * x).exp() / x * (s + low + self.kappa.max(0.0));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Accuracy { what: format!("GIG density at x={x}"), residual: f64::INFINITY })
        }
    }

    /// Closed-form mean of the GIG law, `E D(1)`.
    pub fn mean(&self) -> f64 {
        let (d, g, k) = (self.delta, self.gamma, self.kappa);
        if g > 0.0 {
            let num = bessel_k(1.0 + k, g * d);
            let den = bessel_k(k, g * d);
            match (num, den) {
                (Ok(n), Ok(dd)) => d * n / (g * dd),
                _ => {
                    let ln = ln_bessel_k(1.0 + k, g * d).unwrap_or(f64::NAN)
                        - ln_bessel_k(k, g * d).unwrap_or(f64::NAN);
                    d / g * ln.exp()
                }
            }
        } else if k < -1.0 {
            d * d / (2.0 * (-k - 1.0))
        } else {
            f64::INFINITY
        }
    }

    /// `∫ x g(x) dx` by the reduced single integral over `y`.
    #[cfg(test)]
    pub fn mean_by_quadrature(&self) -> f64 {
        if self.b0 == 0.0 {
            return if self.kappa < -1.0 { self.mean_gamma0_quadrature() } else { f64::INFINITY };
        }
        let mut s = 0.0;
        let (_, low) = self.visit(self.b0, self.b0, |y, wdy| s += wdy / (self.b0 + y));
        s + (low + self.kappa.max(0.0)) / self.b0
    }

    #[cfg(test)]
    fn mean_gamma0_quadrature(&self) -> f64 {
        // ∫ w(y) / y dy converges at 0 only for nu > 1
        let mut s = 0.0;
        let (y0, _) = self.visit(1.0, 1.0, |y, wdy| s += wdy / y);
        s + self.small_coef() * y0.powf(self.nu - 1.0) / (self.nu - 1.0)
    }

    /// `phi(z)` from `∫ w(y) Log(1 + z / (b0 + y)) dy`, valid for any
    /// `Re z > 0` and any admissible `kappa`.
    pub fn phi_complex_quadrature(&self, z: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        if self.b0 > 0.0 {
            let (_, low) =
                self.visit(self.b0, z.norm() + self.b0, |y, wdy| s += wdy * clog1p(z / (self.b0 + y)));
            s + (low + self.kappa.max(0.0)) * clog1p(z / self.b0)
        } else {
            let (y0, _) = self.visit(z.norm(), z.norm(), |y, wdy| s += wdy * clog1p(z / y));
            let nu = self.nu;
            let tail = self.small_coef() * y0.powf(nu) / nu * (z.ln() - y0.ln() + 1.0 / nu);
            s + tail
        }
    }
}
