//! Renewal measure, second moments and two-time covariance of `E`.
//!
//! Everything reduces to the Stieltjes convolution
//! `C(s, t) = ∫_[0, s∧t] (U(s - x) + U(t - x)) dU(x)`, since
//! `E[E(s)E(t)] = C(s, t)`. The atom of `dU` at 0 and lattice atoms are
//! summed exactly; the absolutely continuous part goes through tanh-sinh
//! panels split where `U` or `U'` may kink.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::levy::SubordinatorSpec;
use crate::postwidder::invert_postwidder;
use crate::quad::{self, TsNode};

type DensityFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// `dU`: an atom at 0, a density, and for pure lattices the lattice itself.
#[derive(Clone)]
pub struct RenewalMeasure {
    pub atom_at_zero: f64,
    /// `(spacing, weight)` of a pure lattice measure
    pub lattice: Option<(f64, f64)>,
    density_fn: Arc<DensityFn>,
}

impl RenewalMeasure {
    /// `U'(t)` on `t > 0`, excluding atoms.
    pub fn density(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(invalid(format!("density needs t > 0, got {t}")));
        }
        (self.density_fn)(t)
    }
}

impl std::fmt::Debug for RenewalMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RenewalMeasure")
            .field("atom_at_zero", &self.atom_at_zero)
            .field("lattice", &self.lattice)
            .finish_non_exhaustive()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("eps must be positive, got {eps}")))
    }
}

/// Post-Widder tolerance for `U(x)` and `U'(x)` inside convolutions. The
/// engine's stopping test is absolute, so it is tightened for small `x`
/// where `U` itself is small.
fn inner_eps(eps: f64, x: f64) -> f64 {
    (0.1 * eps).max(1e-10) * x.min(1.0)
}

pub fn renewal_measure(spec: &SubordinatorSpec, eps: f64) -> Result<RenewalMeasure> {
    check_eps(eps)?;
    let lattice = spec.lattice();
    let density_fn: Arc<DensityFn> = if lattice.is_some() {
        Arc::new(|_| Ok(0.0))
    } else {
        let spec = spec.clone();
        Arc::new(move |t| Ok(invert_postwidder(&spec, t, inner_eps(eps, t))?.du.unwrap_or(0.0).max(0.0)))
    };
    Ok(RenewalMeasure { atom_at_zero: spec.atom_at_zero(), lattice, density_fn })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceResult {
    pub s: f64,
    pub t: f64,
    pub cov: f64,
    pub var_s: f64,
    pub var_t: f64,
    pub corr: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    u: f64,
    du: f64,
    err: f64,
}

#[derive(Debug, Clone, Copy)]
struct Conv {
    value: f64,
    err: f64,
}

/// Shares `U`, `U'` and convolution values between calls on one spec.
/// Safe to use from several threads.
pub struct MomentEngine {
    spec: SubordinatorSpec,
    eps: f64,
    points: Mutex<HashMap<u64, Point>>,
    convs: Mutex<HashMap<(u64, u64), Conv>>,
}

/// Panel endpoints closer than this fraction of the panel width are skipped.
const EDGE: f64 = 1e-12;
const MAX_LEVEL: usize = 8;

impl MomentEngine {
    pub fn new(spec: &SubordinatorSpec, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if spec.lattice().is_none() && spec.drift() == 0.0 && !spec.measure().atoms.is_empty() {
            return Err(Error::Unsupported(
                "moments of a driftless spec whose atoms do not form a single lattice".into(),
            ));
        }
        Ok(Self {
            spec: spec.clone(),
            eps,
            points: Mutex::new(HashMap::new()),
            convs: Mutex::new(HashMap::new()),
        })
    }

    fn lattice_u(&self, x: f64) -> f64 {
        let (h, w) = self.spec.lattice().expect("lattice spec");
        if x < 0.0 {
            0.0
        } else {
            w * (x / h + 1.0).floor()
        }
    }

    fn points(&self, xs: &[f64]) -> Result<Vec<Point>> {
        let missing: Vec<f64> = {
            let cache = self.points.lock().expect("cache poisoned");
            let mut m: Vec<f64> = xs.iter().copied().filter(|x| !cache.contains_key(&x.to_bits())).collect();
            m.sort_by(f64::total_cmp);
            m.dedup();
            m
        };
        let fresh: Vec<(f64, Point)> = missing
            .par_iter()
            .map(|&x| {
                if x == 0.0 {
                    let a = self.spec.atom_at_zero();
                    return Ok((x, Point { u: a, du: 0.0, err: 0.0 }));
                }
                let r = invert_postwidder(&self.spec, x, inner_eps(self.eps, x))?;
                Ok((x, Point { u: r.u, du: r.du.unwrap_or(0.0).max(0.0), err: r.est_error }))
            })
            .collect::<Result<_>>()?;
        let mut cache = self.points.lock().expect("cache poisoned");
        for (x, p) in fresh {
            cache.insert(x.to_bits(), p);
        }
        Ok(xs.iter().map(|x| cache[&x.to_bits()]).collect())
    }

    /// `U(x)` with its error estimate.
    pub fn renewal(&self, x: f64) -> Result<(f64, f64)> {
        if !(x >= 0.0) {
            return Err(invalid(format!("need x >= 0, got {x}")));
        }
        if self.spec.lattice().is_some() {
            return Ok((self.lattice_u(x), 0.0));
        }
        let p = self.points(&[x])?[0];
        Ok((p.u, p.err))
    }

    fn conv(&self, s: f64, t: f64) -> Result<Conv> {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let key = (s.to_bits(), t.to_bits());
        if let Some(c) = self.convs.lock().expect("cache poisoned").get(&key) {
            return Ok(*c);
        }
        let c = if self.spec.lattice().is_some() {
            self.conv_lattice(s, t)
        } else {
            self.conv_generic(s, t)?
        };
        self.convs.lock().expect("cache poisoned").insert(key, c);
        Ok(c)
    }

    fn conv_lattice(&self, s: f64, t: f64) -> Conv {
        let (h, w) = self.spec.lattice().expect("lattice spec");
        let n = (s / h).floor() as usize;
        let value = (0..=n)
            .map(|k| {
                let x = k as f64 * h;
                w * (self.lattice_u(s - x) + self.lattice_u(t - x))
            })
            .sum();
        Conv { value, err: 0.0 }
    }

    fn conv_generic(&self, s: f64, t: f64) -> Result<Conv> {
        let m = s;
        let [ps, pt] = self.points(&[s, t])?[..] else { unreachable!() };
        let atom = self.spec.atom_at_zero();
        let mut value = atom * (ps.u + pt.u);
        let mut err = atom * (ps.err + pt.err);

        let mut cuts = vec![0.0, m];
        for b in self.spec.breakpoints(t) {
            for x in [b, s - b, t - b] {
                if x > 0.0 && x < m {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * m);

        let scale = (ps.u * pt.u).max(1.0);
        let tol = 0.1 * self.eps * scale / (cuts.len() - 1) as f64;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let delta = EDGE * (b - a);
            let mut failure = None;
            let mut point_err: f64 = 0.0;
            let mut eval = |nodes: &[TsNode]| -> Vec<f64> {
                let kept: Vec<f64> = nodes.iter().filter(|n| n.dist >= delta).map(|n| n.x).collect();
                let xs: Vec<f64> = kept.iter().flat_map(|&x| [x, s - x, t - x]).collect();
                let pts = match self.points(&xs) {
                    Ok(p) => p,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return vec![f64::NAN; nodes.len()];
                    }
                };
                let mut out = Vec::with_capacity(nodes.len());
                let mut j = 0;
                for n in nodes {
                    if n.dist < delta {
                        out.push(0.0);
                        continue;
                    }
                    let (d, us, ut) = (pts[3 * j], pts[3 * j + 1], pts[3 * j + 2]);
                    j += 1;
                    point_err = point_err.max(us.err + ut.err + d.err);
                    out.push((us.u + ut.u) * d.du);
                }
                out
            };
            let r = quad::tanh_sinh(&mut eval, a, b, tol, MAX_LEVEL);
            if let Some(e) = failure {
                return Err(e);
            }
            value += r.value;
            // the point errors of U and U' enter roughly in proportion to the mass of the panel
            let panel_noise = point_err * (ps.u + pt.u).max(1.0) * (b - a).max(1.0);
            err += r.abs_err + panel_noise;
            if !r.converged && r.abs_err > 10.0 * (self.eps * scale + panel_noise) {
                return Err(Error::Accuracy {
                    what: format!("renewal convolution on [{a}, {b}] for s={s}, t={t}"),
                    residual: r.abs_err,
                });
            }
            if a == 0.0 {
                // mass of (0, delta) not seen by the nodes
                let [pd, pds, pdt] = self.points(&[delta, s - delta, t - delta])?[..] else { unreachable!() };
                value += (pds.u + pdt.u) * (pd.u - atom).max(0.0);
                err += pd.err * (pds.u + pdt.u);
            }
        }
        Ok(Conv { value, err })
    }

    /// `E[E(t)^2]`.
    pub fn second_moment(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.conv(t, t)?.value)
    }

    fn variance(&self, t: f64) -> Result<(f64, f64)> {
        let c = self.conv(t, t)?;
        let (u, ue) = self.renewal(t)?;
        let var = c.value - u * u;
        let err = c.err + 2.0 * u * ue;
        if var < -(self.eps + err) {
            return Err(Error::Inconsistent(format!("negative variance {var:e} at t={t}")));
        }
        Ok((var.max(0.0), err))
    }

    pub fn covariance(&self, s: f64, t: f64) -> Result<CovarianceResult> {
        check_time(s)?;
        check_time(t)?;
        let c = self.conv(s, t)?;
        let (us, use_) = self.renewal(s)?;
        let (ut, ute) = self.renewal(t)?;
        let cov = c.value - us * ut;
        let cov_err = c.err + us * ute + ut * use_;
        let (var_s, es) = self.variance(s)?;
        let (var_t, et) = self.variance(t)?;
        let denom = (var_s * var_t).sqrt();
        let (corr, corr_err) = if denom > 0.0 {
            let raw = cov / denom;
            let err = cov_err / denom + raw.abs() * 0.5 * (es / var_s + et / var_t);
            let clamped = raw.clamp(-1.0, 1.0);
            (clamped, err + (raw - clamped).abs())
        } else {
            (f64::NAN, f64::INFINITY)
        };
        Ok(CovarianceResult { s, t, cov, var_s, var_t, corr, est_error: cov_err.max(corr_err) })
    }

    pub fn correlation(&self, s: f64, t: f64) -> Result<f64> {
        let r = self.covariance(s, t)?;
        if r.corr.is_nan() {
            return Err(Error::Domain {
                func: "correlation",
                detail: format!("variance vanishes at s={s} or t={t}"),
            });
        }
        Ok(r.corr)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("time must be positive and finite, got {t}")))
    }
}

pub fn covariance(spec: &SubordinatorSpec, s: f64, t: f64, eps: f64) -> Result<CovarianceResult> {
    MomentEngine::new(spec, eps)?.covariance(s, t)
}

pub fn second_moment(spec: &SubordinatorSpec, t: f64, eps: f64) -> Result<f64> {
    MomentEngine::new(spec, eps)?.second_moment(t)
}

pub fn correlation(spec: &SubordinatorSpec, s: f64, t: f64, eps: f64) -> Result<f64> {
    MomentEngine::new(spec, eps)?.correlation(s, t)
}

/// Driftless Poisson with rate `r`:
/// `sum_{k <= s∧t} (U(s-k) + U(t-k)) / r - U(s) U(t)` with `U(x) = floor(x+1)/r`.
pub fn covariance_poisson_nodrift(s: f64, t: f64, r: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite()) || !(r > 0.0) {
        return Err(invalid(format!("need s, t >= 0 and r > 0, got s={s}, t={t}, r={r}")));
    }
    let u = |x: f64| (x + 1.0).floor() / r;
    let n = s.min(t).floor() as usize;
    let sum: f64 = (0..=n).map(|k| (u(s - k as f64) + u(t - k as f64)) / r).sum();
    Ok(sum - u(s) * u(t))
}
