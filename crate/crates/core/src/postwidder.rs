//! Post-Widder inversion of `Ũ(lambda) = 1 / (lambda phi(lambda))`.
//!
//! For each `k` the term
//! `U_k(t) = (-1)^{k-1} / (k-1)! (k/t)^k Ũ^{(k-1)}(k/t)` is written as a dot
//! product `Σ_i v_i w_i` with `w_i` the derivatives of `psi = 1/phi`, which
//! come from forward substitution on the Leibniz expansion of
//! `phi psi = 1`. Terms at `k = 1, 2, 4, ...` are then extrapolated to
//! `k = ∞` in `h = 1/k`.
//!
//! For a driftless compound Poisson process without atoms, the part of
//! `U` that jumps in slope at the support edge of the measure is known in
//! closed form. It is subtracted in the transform and added back exactly,
//! so only the smoother remainder is inverted.

use crate::error::{invalid, Error, Result};
use crate::levy::SubordinatorSpec;
use crate::special::ln_gamma;

/// Largest `k` accepted by [`u_k`].
pub const K_MAX: usize = 512;
/// Largest number of extrapolation rows used by the stopping rule.
pub const N_STOP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    PostWidder,
    Bromwich,
    /// closed form or lattice sum, no numerical inversion
    Exact,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::PostWidder => "postwidder",
            Method::Bromwich => "bromwich",
            Method::Exact => "exact",
        }
    }
}

/// Output record shared by all engines.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalEstimate {
    pub t: f64,
    pub u: f64,
    pub du: Option<f64>,
    pub method: Method,
    pub est_error: f64,
    pub converged: bool,
    /// extrapolation rows for Post-Widder, intervals for Bromwich
    pub n_used: usize,
    /// Warnings about the run that `converged` alone does not capture.
    pub diagnostics: Vec<String>,
}

/// `c^i psi^{(i)}(lambda)` for `i < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivVector {
    pub lambda: f64,
    pub k: usize,
    pub values: Vec<f64>,
    pub scale_c: f64,
}

/// One Post-Widder term and the residual of the triangular solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UkTerm {
    pub u: f64,
    pub du: f64,
    /// largest relative residual of the Leibniz rows
    pub residual: f64,
    /// `Σ |v_i w_i|`, the scale against which `u` was summed
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationTable {
    pub t: f64,
    pub k_list: Vec<usize>,
    pub h_list: Vec<f64>,
    pub u_list: Vec<f64>,
    pub du_list: Vec<f64>,
    pub p_list: Vec<f64>,
    pub dp_list: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub n_used: usize,
    pub est_error: f64,
}

/// Binomial rows `C(j, 0..=j)` for `j < n`, built by Pascal's rule.
fn pascal(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = vec![1.0; j + 1];
        for i in 1..j {
            row[i] = rows[j - 1][i - 1] + rows[j - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// Solve the `c`-scaled lower-triangular system at `lambda`:
/// entries `C(j, i) phi^{(j-i)} c^{j-i}`, unknowns `c^i psi^{(i)}`.
pub fn deriv_vector(spec: &SubordinatorSpec, lambda: f64, k: usize, c: f64) -> Result<(DerivVector, f64)> {
    let (_, w, residual) = leibniz_solve(spec, lambda, k, c)?;
    Ok((DerivVector { lambda, k, values: w, scale_c: c }, residual))
}

/// Scaled `c^i phi^{(i)}`, scaled `c^i psi^{(i)}` and the largest row residual.
fn leibniz_solve(spec: &SubordinatorSpec, lambda: f64, k: usize, c: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if k == 0 || k > K_MAX {
        return Err(invalid(format!("k must be in 1..={K_MAX}, got {k}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!("scale c must be positive, got {c}")));
    }
    let taylor = spec.phi_taylor(lambda, k)?;
    let lr = (c / lambda).ln();
    let mut phi = vec![0.0; k];
    for (m, &tm) in taylor.coeffs.iter().enumerate() {
        if tm == 0.0 {
            continue;
        }
        let ln = tm.abs().ln() + ln_gamma(m as f64 + 1.0) + m as f64 * lr;
        if ln > 700.0 {
            return Err(Error::Overflow {
                what: format!("scaled phi^({m}) at k={k}"),
                log10_magnitude: ln / std::f64::consts::LN_10,
            });
        }
        phi[m] = tm.signum() * ln.exp();
    }
    if !(phi[0] > 0.0) {
        return Err(Error::Inconsistent(format!(
            "triangular solve diagonal phi({lambda}) = {} is not positive at k={k}",
            phi[0]
        )));
    }
    let binom = pascal(k);
    let mut w = vec![0.0; k];
    let mut residual: f64 = 0.0;
    for j in 0..k {
        let mut acc = if j == 0 { 1.0 } else { 0.0 };
        for i in 0..j {
            acc -= binom[j][i] * phi[j - i] * w[i];
        }
        w[j] = acc / phi[0];
        if !w[j].is_finite() {
            return Err(Error::Overflow {
                what: format!("psi derivative {j} at k={k}"),
                log10_magnitude: f64::INFINITY,
            });
        }
    }
    // recompute each row of phi psi = 1
    for j in 0..k {
        let mut s = 0.0;
        let mut mag = 0.0;
        for i in 0..=j {
            let term = binom[j][i] * phi[j - i] * w[i];
            s += term;
            mag += term.abs();
        }
        let target = if j == 0 { 1.0 } else { 0.0 };
        if mag > 0.0 {
            residual = residual.max((s - target).abs() / mag);
        }
    }
    residual = residual.max(taylor.rel_err);
    Ok((phi, w, residual))
}

/// The Post-Widder term `U_k(t)` and its density analogue, with scale `c`.
pub fn u_k(spec: &SubordinatorSpec, t: f64, k: usize, c: f64) -> Result<UkTerm> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    let lambda = k as f64 / t;
    let (phi, mut w, residual) = leibniz_solve(spec, lambda, k, c)?;
    // Driftless compound Poisson: dU = (1/m) Σ_n (Pi/m)^{*n}. The n = 0, 1
    // terms carry the atom and the jump of U' at the support edge; their
    // transform 1/m + (m - phi)/m^2 is removed here and added back exactly.
    let peel = spec.continuous_jump_mass();
    if let Some(m) = peel {
        let m2 = m * m;
        w[0] -= 1.0 / m + (m - phi[0]) / m2;
        for j in 1..k {
            w[j] += phi[j] / m2;
        }
    }
    let lk = (k as f64 / (c * t)).ln();
    let mut u = 0.0;
    let mut magnitude = 0.0;
    let mut last = 0.0;
    for (i, wi) in w.iter().enumerate() {
        // (-1)^i (k / (c t))^i / i!
        let ln = i as f64 * lk - ln_gamma(i as f64 + 1.0);
        if ln > 709.0 {
            return Err(Error::Overflow {
                what: format!("Post-Widder coefficient {i} at k={k}"),
                log10_magnitude: ln / std::f64::consts::LN_10,
            });
        }
        let v = if i % 2 == 1 { -ln.exp() } else { ln.exp() };
        let term = v * wi;
        u += term;
        magnitude += term.abs();
        last = v;
    }
    if k == 1 && peel.is_none() {
        // the atom of dU at 0 is not part of the density
        w[0] -= spec.atom_at_zero();
    }
    let mut du = lambda * last * w[k - 1];
    if let Some(m) = peel {
        u += (1.0 + spec.measure_cdf(t)? / m) / m;
        du += spec.levy_density(t)? / (m * m);
    }
    Ok(UkTerm { u, du, residual, magnitude })
}

/// Weights `c_i^{(n)}` of `P_n(0)` for the nodes `h_i = 2^{1-i}`.
pub fn extrapolation_weights(n: usize) -> Result<Vec<f64>> {
    if !(1..=10).contains(&n) {
        return Err(invalid(format!("extrapolation order must be in 1..=10, got {n}")));
    }
    let prod = |m: usize| (1..=m).map(|j| 2f64.powi(j as i32) - 1.0).product::<f64>();
    Ok((1..=n)
        .map(|i| {
            let sign = if (n - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * 2f64.powi((i * (i - 1) / 2) as i32) / (prod(i - 1) * prod(n - i))
        })
        .collect())
}

/// `P_n(0)` from the first `n` values of a sequence sampled at `k_i = 2^{i-1}`.
pub fn extrapolate(values: &[f64]) -> Result<f64> {
    let c = extrapolation_weights(values.len())?;
    Ok(c.iter().zip(values).map(|(a, b)| a * b).sum())
}

/// Build the extrapolation table, stopping at `|P_n - P_{n-1}| < eps` or `n = 9`.
pub fn postwidder_table(spec: &SubordinatorSpec, t: f64, eps: f64, c: f64) -> Result<ExtrapolationTable> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    let mut tab = ExtrapolationTable {
        t,
        k_list: vec![],
        h_list: vec![],
        u_list: vec![],
        du_list: vec![],
        p_list: vec![],
        dp_list: vec![],
        residual: 0.0,
        converged: false,
        n_used: 0,
        est_error: f64::INFINITY,
    };
    let mut resid_abs: f64 = 0.0;
    for n in 1..=N_STOP {
        let k = 1usize << (n - 1);
        let term = u_k(spec, t, k, c)?;
        tab.k_list.push(k);
        tab.h_list.push(1.0 / k as f64);
        tab.u_list.push(term.u);
        tab.du_list.push(term.du);
        tab.residual = tab.residual.max(term.residual);
        resid_abs = resid_abs.max(term.residual * term.magnitude);
        tab.p_list.push(extrapolate(&tab.u_list)?);
        tab.dp_list.push(extrapolate(&tab.du_list)?);
        tab.n_used = n;
        if n >= 2 {
            let diff = (tab.p_list[n - 1] - tab.p_list[n - 2]).abs();
            tab.est_error = diff;
            if diff < eps {
                tab.converged = true;
                break;
            }
        }
    }
    tab.est_error += resid_abs;
    if tab.residual > eps {
        tab.converged = false;
    }
    Ok(tab)
}

/// `U(t)` and `U'(t)` by Post-Widder with the default scale `c = 1/t`.
pub fn invert_postwidder(spec: &SubordinatorSpec, t: f64, eps: f64) -> Result<RenewalEstimate> {
    invert_postwidder_scaled(spec, t, eps, 1.0)
}

/// As [`invert_postwidder`] with scale `c = c_factor / t`.
pub fn invert_postwidder_scaled(spec: &SubordinatorSpec, t: f64, eps: f64, c_factor: f64) -> Result<RenewalEstimate> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(RenewalEstimate {
            t,
            u: spec.atom_at_zero(),
            du: None,
            method: Method::PostWidder,
            est_error: 0.0,
            converged: true,
            n_used: 0,
            diagnostics: vec![],
        });
    }
    let tab = postwidder_table(spec, t, eps, c_factor / t)?;
    let n = tab.n_used;
    let mut diagnostics = vec![];
    if spec.step_renewal() {
        diagnostics.push(
            "renewal function is a step function; Post-Widder extrapolation smooths its jumps and the result may be wrong even when converged"
                .to_string(),
        );
    }
    if !tab.converged {
        diagnostics.push(format!("no convergence after {n} extrapolation levels"));
    }
    Ok(RenewalEstimate {
        t,
        u: tab.p_list[n - 1],
        du: Some(tab.dp_list[n - 1]),
        method: Method::PostWidder,
        est_error: tab.est_error,
        converged: tab.converged,
        n_used: n,
        diagnostics,
    })
}
