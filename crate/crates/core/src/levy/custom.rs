//! User-assembled subordinators: a drift plus a sum of measure kernels.
//!
//! Derivatives are computed from the measure itself. In the variable
//! `v = lambda x`, coefficient `j >= 1` is
//! `T_j = (-1)^{j+1} ∫ v^j e^{-v} / j! g(v / lambda) dv / lambda`,
//! integrated on Gauss–Legendre panels (logarithmic below `v = 1`). The
//! error estimate is the difference between 20- and 30-point rules.

use num_complex::Complex64;

use super::{stable_density, Taylor};
use crate::error::{invalid, Error, Result};
use crate::quad;
use crate::special::{clog1p, gamma, gen_exp_integral, ln_gamma, ln_upper_gamma};

/// Building blocks of a custom Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKernel {
    /// point mass `w` at `x`
    Atom { x: f64, w: f64 },
    /// `alpha x^{-alpha-1}` on `x >= 1`
    Pareto { alpha: f64 },
    /// `weight alpha / Gamma(1 - alpha) x^{-1-alpha}`, exponent `weight lambda^alpha`
    Stable { alpha: f64, weight: f64 },
    /// `x^a e^{-b x}`
    ExpTiltedPower { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpec {
    pub drift: f64,
    pub kernels: Vec<MeasureKernel>,
}

impl MeasureKernel {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MeasureKernel::Atom { x, w } => x > 0.0 && x.is_finite() && w > 0.0 && w.is_finite(),
            MeasureKernel::Pareto { alpha } => alpha > 0.0 && alpha.is_finite(),
            MeasureKernel::Stable { alpha, weight } => {
                alpha > 0.0 && alpha < 1.0 && weight > 0.0 && weight.is_finite()
            }
            MeasureKernel::ExpTiltedPower { a, b } => {
                a.is_finite() && b.is_finite() && ((b > 0.0 && a > -2.0) || (b == 0.0 && a > -2.0 && a < -1.0))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "kernel {self:?} outside its domain (atom: x>0, w>0; pareto: alpha>0; \
                 stable: 0<alpha<1, weight>0; exp_tilted_power: b>0 and a>-2, or b=0 and -2<a<-1)"
            )))
        }
    }

    fn density(&self, x: f64) -> f64 {
        match *self {
            MeasureKernel::Atom { .. } => 0.0,
            MeasureKernel::Pareto { alpha } => {
                if x >= 1.0 {
                    alpha * x.powf(-alpha - 1.0)
                } else {
                    0.0
                }
            }
            MeasureKernel::Stable { alpha, weight } => stable_density(alpha, weight, x),
            MeasureKernel::ExpTiltedPower { a, b } => (a * x.ln() - b * x).exp(),
        }
    }

    /// Leading power law `c x^p` of the density as `x -> 0`.
    fn small_power(&self) -> Option<(f64, f64)> {
        match *self {
            MeasureKernel::Stable { alpha, weight } => {
                Some((weight * alpha / gamma(1.0 - alpha), -1.0 - alpha))
            }
            MeasureKernel::ExpTiltedPower { a, .. } => Some((1.0, a)),
            _ => None,
        }
    }

    /// Exact power law `c x^p` of the density beyond `x >= x_from`, if any.
    fn large_power(&self) -> Option<(f64, f64, f64)> {
        match *self {
            MeasureKernel::Stable { alpha, weight } => {
                Some((weight * alpha / gamma(1.0 - alpha), -1.0 - alpha, 0.0))
            }
            MeasureKernel::Pareto { alpha } => Some((alpha, -1.0 - alpha, 1.0)),
            MeasureKernel::ExpTiltedPower { a, b: 0.0 } => Some((1.0, a, 0.0)),
            _ => None,
        }
    }

    /// Closed-form exponent of this kernel alone.
    pub fn phi_closed(&self, lambda: f64) -> f64 {
        match *self {
            MeasureKernel::Atom { x, w } => -w * (-lambda * x).exp_m1(),
            MeasureKernel::Pareto { alpha } => {
                -(-lambda).exp_m1() + lambda * gen_exp_integral(alpha, lambda).map(|r| r.value).unwrap_or(f64::NAN)
            }
            MeasureKernel::Stable { alpha, weight } => weight * lambda.powf(alpha),
            MeasureKernel::ExpTiltedPower { a, b } => {
                if b == 0.0 {
                    -gamma(a + 1.0) * lambda.powf(-a - 1.0)
                } else if a == -1.0 {
                    (lambda / b).ln_1p()
                } else {
                    -gamma(a + 1.0) * b.powf(-a - 1.0) * (-(a + 1.0) * (lambda / b).ln_1p()).exp_m1()
                }
            }
        }
    }

    pub fn phi_complex(&self, z: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match *self {
            MeasureKernel::Atom { x, w } => w * (one - (-z * x).exp()),
            MeasureKernel::Pareto { alpha } => {
                one - (-z).exp() + z * crate::special::gen_exp_integral_complex(alpha, z)?
            }
            MeasureKernel::Stable { alpha, weight } => weight * z.powf(alpha),
            MeasureKernel::ExpTiltedPower { a, b } => {
                if b == 0.0 {
                    -gamma(a + 1.0) * z.powf(-a - 1.0)
                } else if a == -1.0 {
                    clog1p(z / b)
                } else {
                    -gamma(a + 1.0) * b.powf(-a - 1.0) * expm1c(-(a + 1.0) * clog1p(z / b))
                }
            }
        })
    }

    fn mass(&self) -> f64 {
        match *self {
            MeasureKernel::Atom { w, .. } => w,
            MeasureKernel::Pareto { .. } => 1.0,
            MeasureKernel::Stable { .. } => f64::INFINITY,
            MeasureKernel::ExpTiltedPower { a, b } => {
                if b > 0.0 && a > -1.0 {
                    (ln_gamma(a + 1.0) - (a + 1.0) * b.ln()).exp()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// `Pi((x, inf))` for the finite-mass kernels.
    fn tail(&self, x: f64) -> Result<f64> {
        match *self {
            MeasureKernel::Atom { x: a, w } => Ok(if a > x { w } else { 0.0 }),
            MeasureKernel::Pareto { alpha } => Ok(if x < 1.0 { 1.0 } else { x.powf(-alpha) }),
            MeasureKernel::Stable { .. } => Ok(f64::INFINITY),
            MeasureKernel::ExpTiltedPower { a, b } => {
                if self.mass().is_finite() {
                    Ok((ln_upper_gamma(a + 1.0, b * x)? - (a + 1.0) * b.ln()).exp())
                } else {
                    Ok(f64::INFINITY)
                }
            }
        }
    }

    fn mean(&self) -> f64 {
        match *self {
            MeasureKernel::Atom { x, w } => x * w,
            MeasureKernel::Pareto { alpha } => {
                if alpha > 1.0 {
                    alpha / (alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            MeasureKernel::Stable { .. } => f64::INFINITY,
            MeasureKernel::ExpTiltedPower { a, b } => {
                if b > 0.0 {
                    (ln_gamma(a + 2.0) - (a + 2.0) * b.ln()).exp()
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// `e^w - 1`, accurate for small `|w|`.
fn expm1c(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        let mut term = w;
        let mut s = w;
        for n in 2..8 {
            term *= w / n as f64;
            s += term;
        }
        s
    } else {
        w.exp() - 1.0
    }
}

#[derive(Debug)]
pub(crate) struct Custom {
    spec: CustomSpec,
}

/// Below this `v` the integrands are replaced by their power-law limits.
const V_FLOOR: f64 = 1e-12;
const TOL: f64 = 1e-9;

impl Custom {
    pub fn spec(&self) -> &CustomSpec {
        &self.spec
    }

    pub fn new(spec: CustomSpec) -> Result<Self> {
        if !(spec.drift >= 0.0) || !spec.drift.is_finite() {
            return Err(invalid(format!("custom drift must be finite and >= 0, got {}", spec.drift)));
        }
        if spec.kernels.is_empty() && spec.drift == 0.0 {
            return Err(invalid("custom spec needs a positive drift or at least one kernel"));
        }
        for k in &spec.kernels {
            k.validate()?;
        }
        Ok(Self { spec })
    }

    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.spec
            .kernels
            .iter()
            .filter_map(|k| match *k {
                MeasureKernel::Atom { x, w } => Some((x, w)),
                _ => None,
            })
            .collect()
    }

    pub fn support_lower(&self) -> f64 {
        self.spec
            .kernels
            .iter()
            .map(|k| match *k {
                MeasureKernel::Atom { x, .. } => x,
                MeasureKernel::Pareto { .. } => 1.0,
                _ => 0.0,
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn break_scales(&self) -> Vec<f64> {
        self.spec
            .kernels
            .iter()
            .filter_map(|k| match *k {
                MeasureKernel::Atom { x, .. } => Some(x),
                MeasureKernel::Pareto { .. } => Some(1.0),
                _ => None,
            })
            .collect()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.spec.kernels.iter().map(|k| k.density(x)).sum()
    }

    pub fn mass(&self) -> f64 {
        self.spec.kernels.iter().map(MeasureKernel::mass).sum()
    }

    pub fn tail(&self, x: f64) -> Result<f64> {
        self.spec.kernels.iter().map(|k| k.tail(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.spec.drift + self.spec.kernels.iter().map(MeasureKernel::mean).sum::<f64>()
    }

    pub fn phi_complex(&self, z: Complex64) -> Result<Complex64> {
        let mut s = self.spec.drift * z;
        for k in &self.spec.kernels {
            s += k.phi_complex(z)?;
        }
        Ok(s)
    }

    /// Panel edges in `v`: logarithmic on `(V_FLOOR, 1)`, then steps of
    /// `1/8` in `ln v` up to `v_hi`, split at the density's breakpoints.
    fn panels(&self, lambda: f64, v_hi: f64) -> Vec<(f64, f64)> {
        let mut edges = vec![V_FLOOR];
        let mut s = V_FLOOR.ln().ceil();
        while s < 0.0 {
            edges.push(s.exp());
            s += 1.0;
        }
        let mut s = 0.0f64;
        while s.exp() < v_hi {
            edges.push(s.exp());
            s += 0.125;
        }
        edges.push(v_hi);
        for k in &self.spec.kernels {
            if let MeasureKernel::Pareto { .. } = k {
                if lambda > V_FLOOR && lambda < v_hi {
                    edges.push(lambda);
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        edges.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Integrate `f(v) g(v/lambda) / lambda` over `v`, vector-valued,
    /// in `ln v` so that the lower panels are well scaled.
    fn integrate_vec<F>(&self, lambda: f64, v_hi: f64, n: usize, f: F) -> (Vec<f64>, Vec<f64>)
    where
        F: Fn(f64, &mut [f64]),
    {
        let mut lo_rule = vec![0.0; n];
        let mut hi_rule = vec![0.0; n];
        let mut buf = vec![0.0; n];
        for (a, b) in self.panels(lambda, v_hi) {
            let (la, lb) = (a.ln(), b.ln());
            let c = 0.5 * (la + lb);
            let h = 0.5 * (lb - la);
            for (rule, out) in [(quad::gl20(), &mut lo_rule), (quad::gl30(), &mut hi_rule)] {
                for (x, wt) in rule.0.iter().zip(&rule.1) {
                    let v = (c + h * x).exp();
                    let g = self.density(v / lambda);
                    if g == 0.0 {
                        continue;
                    }
                    let scale = wt * h * v * g / lambda;
                    buf.iter_mut().for_each(|b| *b = 0.0);
                    f(v, &mut buf);
                    for (o, bv) in out.iter_mut().zip(&buf) {
                        *o += scale * bv;
                    }
                }
            }
        }
        (lo_rule, hi_rule)
    }

    pub fn taylor(&self, lambda: f64, k: usize) -> Result<Taylor> {
        let kf = k as f64;
        let v_hi = kf + 10.0 * kf.sqrt() + 40.0;
        // j >= 1: p_j(v) = v^j e^{-v} / j!
        let (lo, hi) = self.integrate_vec(lambda, v_hi, k, |v, out| {
            let lv = v.ln();
            let mut lp = -v;
            for (j, o) in out.iter_mut().enumerate().skip(1) {
                lp += lv - (j as f64).ln();
                if lp > -745.0 {
                    *o = lp.exp();
                } else if lp < -745.0 && (j as f64) > v {
                    break;
                }
            }
        });
        let mut coeffs = vec![0.0; k];
        let mut rel_err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 1..k {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            coeffs[j] = sign * hi[j];
            scale = scale.max(hi[j].abs());
        }
        for j in 1..k {
            if hi[j].abs() > 1e-14 * scale {
                rel_err = rel_err.max((hi[j] - lo[j]).abs() / hi[j].abs());
            }
        }
        // power-law pieces below V_FLOOR
        for kern in &self.spec.kernels {
            if let Some((c, p)) = kern.small_power() {
                // ∫_0^{v0} v^j / j! c (v/lambda)^p dv / lambda
                let base = c * lambda.powf(-p - 1.0);
                for j in 1..k {
                    let e = j as f64 + p + 1.0;
                    let ln = e * V_FLOOR.ln() - e.ln() - ln_gamma(j as f64 + 1.0);
                    if ln < -745.0 {
                        break;
                    }
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    coeffs[j] += sign * base * ln.exp();
                }
            }
        }
        // atoms are exact
        for (x, w) in self.atoms() {
            let v = lambda * x;
            let lv = v.ln();
            let mut lp = -v;
            for (j, c) in coeffs.iter_mut().enumerate().skip(1) {
                lp += lv - (j as f64).ln();
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                *c += sign * w * lp.exp();
            }
        }
        let mu = self.spec.drift;
        if k > 1 {
            coeffs[1] += mu * lambda;
        }
        let (t0, e0) = self.phi_quadrature(lambda)?;
        coeffs[0] = t0;
        rel_err = rel_err.max(e0);
        if rel_err > TOL || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Accuracy {
                what: format!("custom measure derivatives at lambda={lambda}"),
                residual: rel_err,
            });
        }
        Ok(Taylor { lambda, coeffs, rel_err })
    }

    /// `phi(lambda)` by quadrature of `(1 - e^{-lambda x}) Pi(dx)`.
    fn phi_quadrature(&self, lambda: f64) -> Result<(f64, f64)> {
        // continuous part up to v_top, then exact power-law tails beyond it
        let v_top = (lambda * 1e6).max(1e6);
        let (lo, hi) = self.integrate_vec(lambda, v_top, 1, |v, out| out[0] = -(-v).exp_m1());
        let mut value = hi[0];
        let err = (hi[0] - lo[0]).abs();
        for kern in &self.spec.kernels {
            if let Some((c, p)) = kern.small_power() {
                // (1 - e^{-v}) ~ v
                value += c * lambda.powf(-p - 1.0) * V_FLOOR.powf(p + 2.0) / (p + 2.0);
            }
            if let Some((c, p, x_from)) = kern.large_power() {
                let v0 = v_top.max(lambda * x_from);
                // ∫_{v0}^∞ c (v/lambda)^p dv / lambda
                value += c * lambda.powf(-p - 1.0) * v0.powf(p + 1.0) / (-p - 1.0);
            }
        }
        for (x, w) in self.atoms() {
            value += -w * (-lambda * x).exp_m1();
        }
        value += self.spec.drift * lambda;
        let rel = if value > 0.0 { err / value } else { err };
        if !value.is_finite() {
            return Err(Error::Accuracy { what: format!("custom phi at lambda={lambda}"), residual: rel });
        }
        Ok((value, rel))
    }
}
