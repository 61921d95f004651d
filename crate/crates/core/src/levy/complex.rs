//! The exponent continued to `Re z > 0`, used by the Bromwich engine.

use num_complex::Complex64;

use super::gig::Gig;
use super::Kind;
use crate::error::Result;
use crate::special::{clog1p, gen_exp_integral_complex, ln_gamma};

pub(super) fn phi(kind: &Kind, z: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    Ok(match kind {
        Kind::PureDrift { mu } => mu * z,
        Kind::Poisson { mu, r } => mu * z + r * (one - (-z).exp()),
        Kind::Pareto { alpha } => one - (-z).exp() + z * gen_exp_integral_complex(*alpha, z)?,
        Kind::Stable { alpha } => z.powf(*alpha),
        Kind::TwoStable { a1, a2, c1, c2 } => c1 * z.powf(*a1) + c2 * z.powf(*a2),
        Kind::UniMix => unimix(z),
        Kind::Gamma { gamma, kappa } => kappa * clog1p(2.0 * z / (gamma * gamma)),
        Kind::Gig(g) => gig(g, z),
        Kind::Custom(c) => c.phi_complex(z)?,
    })
}

fn unimix(z: Complex64) -> Complex64 {
    let e = z - 1.0;
    if e.norm() < 1e-3 {
        let mut l = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(1.0, 0.0);
        for n in 0..12 {
            l += p / (n as f64 + 1.0);
            p *= -e;
        }
        l.inv()
    } else {
        e / z.ln()
    }
}

/// `ln K_{n+1/2}(w)` for `n <= 1`, where the finite sum has no branch issues.
fn ln_k_half(n: usize, w: Complex64) -> Complex64 {
    let base = 0.5 * (std::f64::consts::PI / 2.0).ln() - 0.5 * w.ln() - w;
    match n {
        0 => base,
        _ => base + (1.0 + w.inv()).ln(),
    }
}

fn gig(g: &Gig, z: Complex64) -> Complex64 {
    let nu = g.kappa.abs();
    let n = (nu - 0.5).round();
    let half_int = (nu - 0.5 - n).abs() < 1e-15 && (0.0..=1.0).contains(&n);
    if !half_int {
        return g.phi_complex_quadrature(z);
    }
    let n = n as usize;
    let (d, gm, k) = (g.delta, g.gamma, g.kappa);
    if gm > 0.0 {
        let w = d * (gm * gm + 2.0 * z).sqrt();
        let w0 = Complex64::new(d * gm, 0.0);
        0.5 * k * clog1p(2.0 * z / (gm * gm)) - ln_k_half(n, w) + ln_k_half(n, w0)
    } else {
        let w = d * (2.0 * z).sqrt();
        -(2f64.ln() - 0.5 * k * (0.5 * d * d).ln() - 0.5 * k * z.ln() + ln_k_half(n, w) - ln_gamma(-k))
    }
}
