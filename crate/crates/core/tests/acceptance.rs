//! Acceptance suite. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; the process fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use invsub::bromwich::{invert_bromwich, BromwichConfig};
use invsub::moments::{covariance_poisson_nodrift, MomentEngine};
use invsub::oracles::{asymptotic_U, exact_U, exact_var_stable, Regime};
use invsub::postwidder::{deriv_vector, extrapolate, extrapolation_weights, invert_postwidder, invert_postwidder_scaled};
use invsub::quad;
use invsub::special::{bessel_jy, bessel_k, exp_scaled_gamma0, gen_exp_integral};
use invsub::SubordinatorSpec;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

const GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

fn closed_forms() -> Check {
    let mut worst: f64 = 0.0;
    for spec in [SubordinatorSpec::stable(0.5).map_err(e)?, SubordinatorSpec::uniform_stable_mix()] {
        for t in GRID {
            let got = invert_postwidder(&spec, t, 1e-8).map_err(e)?.u;
            let err = (got - exact_U(&spec, t).map_err(e)?).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, format!("{:?} t={t}: error {err:.3e} > 1e-8", spec.family()))?;
        }
    }
    Ok(format!("max abs error {worst:.2e}"))
}

fn bromwich_default(spec: &SubordinatorSpec, t: f64, eps: f64) -> Result<f64, String> {
    let r = invert_bromwich(spec, t, &BromwichConfig::for_time(t, eps).map_err(e)?).map_err(e)?;
    ensure(r.converged, format!("Bromwich did not converge at t={t}"))?;
    Ok(r.u)
}

fn cross_validate(spec: &SubordinatorSpec, cases: &[(f64, f64)]) -> Check {
    let mut worst: f64 = 0.0;
    for &(t, tol) in cases {
        let pw = invert_postwidder(spec, t, 1e-8).map_err(e)?.u;
        let br = bromwich_default(spec, t, 1e-8)?;
        let d = (pw - br).abs();
        worst = worst.max(d);
        ensure(d <= tol, format!("t={t}: |PW - Bromwich| = {d:.3e} > {tol:e}"))?;
    }
    Ok(format!("max |PW - Bromwich| {worst:.2e}"))
}

fn gamma_process() -> Check {
    let spec = SubordinatorSpec::gig(0.0, 1.0, 1.0).map_err(e)?;
    cross_validate(&spec, &[(0.1, 1e-6), (1.0, 1e-6), (10.0, 1e-6)])
}

fn inverse_gaussian() -> Check {
    let spec = SubordinatorSpec::gig(1.0, 1.0, -0.5).map_err(e)?;
    cross_validate(&spec, &[(0.01, 1e-4), (0.1, 1e-6), (1.0, 1e-6), (10.0, 1e-6), (100.0, 1e-6)])
}

fn poisson_steps() -> Check {
    let spec = SubordinatorSpec::poisson(0.0, 1.0).map_err(e)?;
    let cases = [(0.01, 1e-5), (0.1, 1e-5), (1.1, 1e-6), (10.1, 1e-5), (100.1, 2e-4)];
    let mut errs = vec![];
    for (t, tol) in cases {
        let u = bromwich_default(&spec, t, 1e-6)?;
        let err = (u - (t + 1.0_f64).floor()).abs();
        errs.push(format!("{err:.1e}"));
        ensure(err <= tol, format!("t={t}: error {err:.3e} > {tol:e}"))?;
    }
    Ok(format!("errors [{}]", errs.join(", ")))
}

fn postwidder_failure() -> Check {
    let spec = SubordinatorSpec::poisson(0.0, 1.0).map_err(e)?;
    let r = invert_postwidder(&spec, 10.1, 1e-6).map_err(e)?;
    let err = (r.u - 11.0).abs();
    ensure(err >= 0.1, format!("error {err:.3e} is below 0.1"))?;
    ensure(!r.diagnostics.is_empty(), "run carries no diagnostic".into())?;
    Ok(format!("returned {:.4}, error {err:.3} (converged={}), diagnostic: {}", r.u, r.converged, r.diagnostics[0]))
}

fn properties() -> Check {
    for n in 1..=10 {
        let s: f64 = extrapolation_weights(n).map_err(e)?.iter().sum();
        ensure((s - 1.0).abs() <= 1e-12, format!("weights n={n} sum to {s}"))?;
    }
    // P_n reproduces q(0) for deg q < n
    for n in 1..=10usize {
        let coef: Vec<f64> = (0..n).map(|j| 1.0 + 0.37 * j as f64 - 0.05 * (j * j) as f64).collect();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let h = 0.5f64.powi(i as i32);
                coef.iter().rev().fold(0.0, |acc, c| acc * h + c)
            })
            .collect();
        let p = extrapolate(&vals).map_err(e)?;
        ensure((p - coef[0]).abs() <= 1e-9 * coef[0].abs(), format!("P_{n}(0) = {p}, want {}", coef[0]))?;
    }
    let drift = SubordinatorSpec::pure_drift(2.0).map_err(e)?;
    for t in GRID {
        let pw = invert_postwidder(&drift, t, 1e-10).map_err(e)?.u;
        ensure((pw - t / 2.0).abs() <= 1e-10, format!("pure drift PW t={t}: {pw}"))?;
        let cfg = BromwichConfig::for_time(t, 1e-12).map_err(e)?;
        let br = invert_bromwich(&drift, t, &cfg).map_err(e)?.u;
        ensure((br - t / 2.0).abs() <= 1e-10, format!("pure drift Bromwich t={t}: {br}"))?;
    }
    let pois = SubordinatorSpec::poisson(1.0, 1.0).map_err(e)?;
    let (_, resid) = deriv_vector(&pois, 512.0, 512, 1.0).map_err(e)?;
    ensure(resid <= 1e-12, format!("Leibniz residual {resid:e} at k=512"))?;
    let stable = SubordinatorSpec::stable(0.5).map_err(e)?;
    let eps = 1e-8;
    let mut worst: f64 = 0.0;
    for t in GRID {
        let a = invert_postwidder_scaled(&stable, t, eps, 1.0).map_err(e)?.u;
        let b = invert_postwidder_scaled(&stable, t, eps, 2.0).map_err(e)?.u;
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 10.0 * eps, format!("scaling c=1/t vs 2/t at t={t}: {a} vs {b}"))?;
    }
    Ok(format!("Leibniz residual {resid:.1e}, scaling gap {worst:.1e}"))
}

fn moments() -> Check {
    let stable = SubordinatorSpec::stable(0.5).map_err(e)?;
    let m = MomentEngine::new(&stable, 1e-6).map_err(e)?;
    let var = m.covariance(1.0, 1.0).map_err(e)?.var_t;
    let exact = exact_var_stable(0.5, 1.0).map_err(e)?;
    let rel = (var / exact - 1.0).abs();
    ensure(rel <= 1e-4, format!("stable variance {var} vs {exact}, rel {rel:.2e}"))?;

    let pois = SubordinatorSpec::poisson(0.0, 1.0).map_err(e)?;
    let pm = MomentEngine::new(&pois, 1e-6).map_err(e)?;
    for &s in &[0.3, 0.5, 1.0, 2.7, 4.0] {
        for &t in &[0.5, 1.5, 2.0, 3.3, 7.9] {
            let g = pm.covariance(s, t).map_err(e)?.cov;
            let f = covariance_poisson_nodrift(s, t, 1.0).map_err(e)?;
            // rounding relative to the cancelled terms of size U(s) U(t)
            let size = 1.0 + (s + 1.0f64).floor() * (t + 1.0f64).floor();
            ensure((g - f).abs() <= 8.0 * f64::EPSILON * size, format!("lattice cov ({s},{t}): {g} vs {f}"))?;
        }
    }

    let pareto = SubordinatorSpec::pareto(1.0).map_err(e)?;
    let pe = MomentEngine::new(&pareto, 1e-6).map_err(e)?;
    let grid: Vec<f64> = (1..=10).map(|i| 0.5 * i as f64).collect();
    let mut slack: f64 = f64::INFINITY;
    let mut diag: f64 = 0.0;
    for &s in &grid {
        for &t in &grid {
            let c = pe.covariance(s, t).map_err(e)?;
            slack = slack.min(1.0 + c.est_error - c.corr.abs());
            ensure(c.corr.abs() <= 1.0 + c.est_error, format!("|corr({s},{t})| = {} > 1 + {}", c.corr, c.est_error))?;
            if s == t {
                diag = diag.max((c.corr - 1.0).abs());
                ensure((c.corr - 1.0).abs() <= 1e-6, format!("corr({s},{s}) = {}", c.corr))?;
            }
        }
    }
    Ok(format!("stable var rel err {rel:.1e}, Pareto grid min slack {slack:.1e}, max |corr(s,s)-1| {diag:.1e}"))
}

fn asymptotics() -> Check {
    let cases = [
        ("Pareto(0.5)", SubordinatorSpec::pareto(0.5).map_err(e)?, 1e3, Regime::TToInfinity),
        ("Pareto(1)", SubordinatorSpec::pareto(1.0).map_err(e)?, 1e3, Regime::TToInfinity),
        ("Pareto(2)", SubordinatorSpec::pareto(2.0).map_err(e)?, 1e3, Regime::TToInfinity),
        ("TwoStable t->inf", SubordinatorSpec::two_stable(0.75, 0.25, 0.5, 0.5).map_err(e)?, 1e3, Regime::TToInfinity),
        ("GIG(1,0,-1.5) t->inf", SubordinatorSpec::gig(1.0, 0.0, -1.5).map_err(e)?, 1e3, Regime::TToInfinity),
        ("TwoStable t->0", SubordinatorSpec::two_stable(0.75, 0.25, 0.5, 0.5).map_err(e)?, 1e-3, Regime::TToZero),
        ("GIG(1,1,-0.5) sqrt(t)", SubordinatorSpec::gig(1.0, 1.0, -0.5).map_err(e)?, 1e-3, Regime::TToZero),
    ];
    let mut out = vec![];
    for (name, spec, t, regime) in cases {
        let u = invert_postwidder(&spec, t, 1e-6).map_err(e)?.u;
        let ratio = u / asymptotic_U(&spec, t, regime).map_err(e)?;
        out.push(format!("{name} {ratio:.3}"));
        ensure((ratio - 1.0).abs() <= 0.05, format!("{name}: engine/asymptote = {ratio:.4}"))?;
    }
    Ok(out.join(", "))
}

fn gig_identities() -> Check {
    let mut worst: f64 = 0.0;
    for (d, g, k) in [(1.0, 1.0, -0.5), (1.0, 1.0, 0.5), (2.0, 0.5, 1.0)] {
        let spec = SubordinatorSpec::gig(d, g, k).map_err(e)?;
        // ∫ x g(x) dx over x = e^v, upper end where e^{-g^2 x / 2} < e^{-100}
        let f = |v: f64| {
            let x = v.exp();
            x * x * spec.levy_density(x).unwrap_or(f64::NAN)
        };
        let r = quad::adaptive(&f, -50.0, (200.0 / (g * g)).ln(), 1e-10, 0.0, 2000);
        let exact = d * bessel_k(1.0 + k, g * d).map_err(e)? / (g * bessel_k(k, g * d).map_err(e)?);
        let rel = (r.value / exact - 1.0).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, format!("GIG({d},{g},{k}) mean {} vs {exact}", r.value))?;
    }
    let small = SubordinatorSpec::gig(1e-4, 1.0, 1.0).map_err(e)?;
    let mut worst_lim: f64 = 0.0;
    for x in [0.5, 1.0, 2.0] {
        let got = small.levy_density(x).map_err(e)?;
        let lim = (-0.5 * x).exp() / x;
        worst_lim = worst_lim.max((got - lim).abs());
        ensure((got - lim).abs() <= 1e-6, format!("delta->0 density at x={x}: {got} vs {lim}"))?;
    }
    Ok(format!("mean rel err {worst:.1e}, delta->0 density gap {worst_lim:.1e}"))
}

fn special_functions() -> Check {
    let mut worst: f64 = 0.0;
    for nu in [0.0, 0.25, 0.5, 1.0, 2.0, 0.3] {
        for x in [0.1, 1.0, 1.5, 2.0, 10.0] {
            let k0 = bessel_k(nu, x).map_err(e)?;
            let k1 = bessel_k(nu + 1.0, x).map_err(e)?;
            let k2 = bessel_k(nu + 2.0, x).map_err(e)?;
            let rec = (x * k2 - x * k0 - 2.0 * (1.0 + nu) * k1).abs() / (x * k2);
            let sym = (bessel_k(-nu, x).map_err(e)? - k0).abs() / k0;
            worst = worst.max(rec).max(sym);
            ensure(rec <= 1e-10 && sym <= 1e-10, format!("K residuals at nu={nu}, x={x}: {rec:e}, {sym:e}"))?;
        }
    }
    for (nu, x) in [(0.5, 3.0), (0.0, 1.0), (1.3, 7.5), (2.0, 0.4)] {
        let (j0, y0) = bessel_jy(nu, x).map_err(e)?;
        let (j1, y1) = bessel_jy(nu + 1.0, x).map_err(e)?;
        let w = j1 * y0 - j0 * y1;
        let want = 2.0 / (std::f64::consts::PI * x);
        worst = worst.max((w - want).abs());
        ensure((w - want).abs() <= 1e-10, format!("Wronskian at ({nu},{x}): {w} vs {want}"))?;
    }
    for (nu, lam) in [(1.0, 1.0), (1.5, 2.0), (0.5, 0.3), (3.0, 0.0), (-1.5, 3.0), (2.5, 0.5)] {
        let got = gen_exp_integral(nu, lam).map_err(e)?.value;
        // ∫_1^∞ e^{-lam x} x^{-nu} dx with x = e^v
        let f = |v: f64| (-lam * v.exp() + (1.0 - nu) * v).exp();
        let top = if lam > 0.0 { (800.0 / lam).ln() } else { 800.0 / (nu - 1.0) };
        let q = quad::adaptive(&f, 0.0, top, 1e-13, 0.0, 2000).value;
        worst = worst.max((got - q).abs());
        ensure((got - q).abs() <= 1e-10, format!("E_{nu}({lam}) = {got} vs quadrature {q}"))?;
    }
    let mut t = 0.5;
    while t <= 1e6 {
        let v = exp_scaled_gamma0(t);
        ensure(v > 0.0 && v <= 1.0, format!("e^t Gamma(0,t) = {v} at t={t}"))?;
        t *= 1.25;
    }
    Ok(format!("max residual {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Closed-form renewal functions by Post-Widder (stable, uniform mixture)", closed_forms),
        ("Gamma process: Post-Widder vs Bromwich", gamma_process),
        ("Inverse Gaussian: Post-Widder vs Bromwich", inverse_gaussian),
        ("Driftless Poisson step function by Bromwich", poisson_steps),
        ("Post-Widder failure on driftless Poisson is flagged", postwidder_failure),
        ("Property suite", properties),
        ("Moments", moments),
        ("Asymptotics", asymptotics),
        ("GIG integral identities", gig_identities),
        ("Special functions", special_functions),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
