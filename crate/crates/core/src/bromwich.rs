//! Real-axis Bromwich inversion of `Ũ(z) = 1 / (z phi(z))`.
//!
//! Cosine form: `U(t) = (2 e^{bt} / pi) ∫_0^∞ Re Ũ(b + iu) cos(ut) du`.
//! Sine form:   `U(t) = -(2 e^{bt} / pi) ∫_0^∞ Im Ũ(b + iu) sin(ut) du`.
//!
//! The half line is cut at the zeros of the trigonometric factor, every
//! piece is integrated adaptively, and summation stops at the first piece
//! whose contribution drops below `eps`. When the measure has atoms or a
//! support edge, `Ũ` keeps oscillating along the contour and a single small
//! piece says little, so a small piece only stops the sum once
//! `scale (2/t) |Ũ|` at its right end is also below `eps`.

use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::levy::SubordinatorSpec;
use crate::postwidder::{Method, RenewalEstimate};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BromwichForm {
    Cosine,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BromwichConfig {
    pub b: f64,
    pub eps: f64,
    pub max_intervals: usize,
    pub form: BromwichForm,
}

/// Intervals evaluated per parallel batch.
const BATCH: usize = 256;

impl BromwichConfig {
    pub fn new(b: f64, eps: f64, max_intervals: usize, form: BromwichForm) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(invalid(format!("Bromwich abscissa b must be > 0, got {b}")));
        }
        if !(eps > 0.0) {
            return Err(invalid(format!("eps must be > 0, got {eps}")));
        }
        if max_intervals == 0 {
            return Err(invalid("max_intervals must be >= 1"));
        }
        Ok(Self { b, eps, max_intervals, form })
    }

    /// Default settings at time `t`: cosine form, `b = min(1, 2/t)` so that
    /// `e^{bt} <= e^2`.
    pub fn for_time(t: f64, eps: f64) -> Result<Self> {
        Self::new((2.0 / t).min(1.0), eps, 4_000_000, BromwichForm::Cosine)
    }
}

fn interval(form: BromwichForm, t: f64, m: usize) -> (f64, f64) {
    match form {
        BromwichForm::Cosine => {
            if m == 0 {
                (0.0, 0.5 * PI / t)
            } else {
                ((2 * m - 1) as f64 * 0.5 * PI / t, (2 * m + 1) as f64 * 0.5 * PI / t)
            }
        }
        BromwichForm::Sine => (m as f64 * PI / t, (m + 1) as f64 * PI / t),
    }
}

/// Atoms or a positive support edge in the Lévy measure.
fn oscillating_tail(spec: &SubordinatorSpec) -> bool {
    let m = spec.measure();
    !m.atoms.is_empty() || m.support_lower > 0.0
}

/// `U(t)` by the Bromwich integral.
pub fn invert_bromwich(spec: &SubordinatorSpec, t: f64, cfg: &BromwichConfig) -> Result<RenewalEstimate> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let b = cfg.b;
    let scale = 2.0 * (b * t).exp() / PI;
    let form = cfg.form;
    let first_err: Mutex<Option<Error>> = Mutex::new(None);
    let integrand = |u: f64| -> f64 {
        let z = Complex64::new(b, u);
        match spec.phi_complex(z) {
            Ok(p) => {
                let ut = (z * p).inv();
                match form {
                    BromwichForm::Cosine => ut.re * (u * t).cos(),
                    BromwichForm::Sine => -ut.im * (u * t).sin(),
                }
            }
            Err(e) => {
                let mut g = first_err.lock().expect("error slot poisoned");
                if g.is_none() {
                    *g = Some(e);
                }
                f64::NAN
            }
        }
    };
    let epsabs = 1e-3 * cfg.eps / scale;
    let piece = |m: usize| {
        let (lo, hi) = interval(form, t, m);
        let r = quad::adaptive(&integrand, lo, hi, 0.1 * cfg.eps, epsabs, 200);
        (scale * r.value, scale * r.abs_err)
    };

    let gated = oscillating_tail(spec);
    let envelope = |u: f64| -> Result<f64> {
        let z = Complex64::new(b, u);
        Ok(scale * 2.0 / t * (z * spec.phi_complex(z)?).inv().norm())
    };

    let mut total = 0.0;
    let mut quad_err = 0.0;
    let mut last = f64::INFINITY;
    let mut used = 0;
    let mut converged = false;
    'outer: while used < cfg.max_intervals {
        let end = (used + BATCH).min(cfg.max_intervals);
        let batch: Vec<(f64, f64)> = (used..end).into_par_iter().map(piece).collect();
        if let Some(e) = first_err.lock().expect("error slot poisoned").take() {
            return Err(e);
        }
        for (v, e) in batch {
            used += 1;
            total += v;
            quad_err += e;
            last = v;
            if !v.is_finite() {
                return Err(Error::Accuracy {
                    what: format!("Bromwich integrand at t={t}"),
                    residual: f64::NAN,
                });
            }
            if used > 1 && v.abs() < cfg.eps && (!gated || envelope(interval(form, t, used - 1).1)? < cfg.eps) {
                converged = true;
                break 'outer;
            }
        }
    }
    Ok(RenewalEstimate {
        t,
        u: total,
        du: None,
        method: Method::Bromwich,
        est_error: last.abs() + quad_err,
        converged,
        n_used: used,
        diagnostics: if converged {
            vec![]
        } else {
            vec![format!("stopping rule not met within {used} intervals")]
        },
    })
}
