//! Run configuration, evaluation and CSV output behind the `invsub` binary.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use invsub::bromwich::{invert_bromwich, BromwichConfig};
use invsub::moments::MomentEngine;
use invsub::oracles::{asymptotic_U, Regime};
use invsub::postwidder::{invert_postwidder, Method, RenewalEstimate};
use invsub::{CustomSpec, FamilyParams, MeasureKernel, SubordinatorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    PostWidder,
    Bromwich,
    Auto,
}

impl FromStr for MethodChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "postwidder" => Ok(MethodChoice::PostWidder),
            "bromwich" => Ok(MethodChoice::Bromwich),
            "auto" => Ok(MethodChoice::Auto),
            _ => Err(format!("unknown method '{s}' (expected postwidder, bromwich or auto)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: FamilyParams,
    pub t_grid: Vec<f64>,
    pub method: MethodChoice,
    pub eps: f64,
    pub corr_s: Option<f64>,
    pub overlay_asymptotics: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<SubordinatorSpec, String> {
        if self.t_grid.is_empty() {
            return Err("t grid must not be empty".into());
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(format!("every t must be positive and finite, got {t}"));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err("t grid must be strictly increasing".into());
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(format!("eps must be positive, got {}", self.eps));
        }
        if let Some(s) = self.corr_s {
            if !(s > 0.0 && s.is_finite()) {
                return Err(format!("s must be positive and finite, got {s}"));
            }
        }
        SubordinatorSpec::new(self.family.clone()).map_err(|e| e.to_string())
    }
}

/// `start:stop:count` or `start:stop:count:log`.
pub fn parse_t_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!("t range '{s}' must be start:stop:count[:log]"));
    }
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number '{x}' in t range: {e}"));
    let (a, b) = (num(parts[0])?, num(parts[1])?);
    let n: usize = parts[2].trim().parse().map_err(|e| format!("bad count '{}' in t range: {e}", parts[2]))?;
    let log = match parts.get(3).map(|x| x.trim()) {
        None | Some("linear") => false,
        Some("log") => true,
        Some(x) => return Err(format!("t range spacing must be 'log' or 'linear', got '{x}'")),
    };
    if n == 0 {
        return Err("t range count must be >= 1".into());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    if log && !(a > 0.0 && b > 0.0) {
        return Err("log-spaced t range needs positive endpoints".into());
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else if log {
                (a.ln() + step(i) * (b.ln() - a.ln())).exp()
            } else {
                a + step(i) * (b - a)
            }
        })
        .collect())
}

pub fn parse_t_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad t value '{x}': {e}")))
        .collect()
}

/// Reads a custom spec: `drift(mu)` plus kernels `atom(x, w)`, `pareto(alpha)`,
/// `stable(alpha, weight)`, `exp_tilted_power(a, b)`. `#` starts a comment.
pub fn parse_custom_spec(text: &str) -> Result<CustomSpec, String> {
    let mut drift = 0.0;
    let mut kernels = vec![];
    let body: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    let mut rest = body.as_str();
    loop {
        rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == ';' || c == ',');
        if rest.is_empty() {
            break;
        }
        let open = rest.find('(').ok_or_else(|| format!("expected name(args) near '{}'", head(rest)))?;
        let close = rest.find(')').ok_or_else(|| format!("missing ')' near '{}'", head(rest)))?;
        if close < open {
            return Err(format!("unbalanced parentheses near '{}'", head(rest)));
        }
        let name = rest[..open].trim();
        let args: Vec<f64> = rest[open + 1..close]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|e| format!("bad argument '{}' to {name}: {e}", a.trim())))
            .collect::<Result<_, _>>()?;
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{name} takes {n} argument(s), got {}", args.len()))
            }
        };
        match name {
            "drift" => {
                want(1)?;
                drift = args[0];
            }
            "atom" => {
                want(2)?;
                kernels.push(MeasureKernel::Atom { x: args[0], w: args[1] });
            }
            "pareto" => {
                want(1)?;
                kernels.push(MeasureKernel::Pareto { alpha: args[0] });
            }
            "stable" => {
                want(2)?;
                kernels.push(MeasureKernel::Stable { alpha: args[0], weight: args[1] });
            }
            "exp_tilted_power" => {
                want(2)?;
                kernels.push(MeasureKernel::ExpTiltedPower { a: args[0], b: args[1] });
            }
            _ => return Err(format!("unknown custom term '{name}'")),
        }
        rest = &rest[close + 1..];
    }
    Ok(CustomSpec { drift, kernels })
}

fn head(s: &str) -> &str {
    let end = s.char_indices().nth(20).map_or(s.len(), |(i, _)| i);
    &s[..end]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub estimate: RenewalEstimate,
    pub corr: Option<f64>,
    pub u_asym: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub csv: String,
    pub all_converged: bool,
}

fn lattice_estimate(spec: &SubordinatorSpec, t: f64) -> Option<RenewalEstimate> {
    let (h, w) = spec.lattice()?;
    Some(RenewalEstimate {
        t,
        u: w * (t / h + 1.0).floor(),
        du: None,
        method: Method::Exact,
        est_error: 0.0,
        converged: true,
        n_used: 0,
        diagnostics: vec![],
    })
}

fn bromwich(spec: &SubordinatorSpec, t: f64, eps: f64) -> invsub::Result<RenewalEstimate> {
    invert_bromwich(spec, t, &BromwichConfig::for_time(t, eps)?)
}

fn estimate(spec: &SubordinatorSpec, t: f64, cfg: &RunConfig) -> invsub::Result<RenewalEstimate> {
    match cfg.method {
        MethodChoice::PostWidder => invert_postwidder(spec, t, cfg.eps),
        MethodChoice::Bromwich => bromwich(spec, t, cfg.eps),
        MethodChoice::Auto => {
            if spec.step_renewal() {
                return match lattice_estimate(spec, t) {
                    Some(e) => Ok(e),
                    None => bromwich(spec, t, cfg.eps),
                };
            }
            let pw = invert_postwidder(spec, t, cfg.eps)?;
            if pw.converged {
                return Ok(pw);
            }
            let br = bromwich(spec, t, cfg.eps)?;
            Ok(if br.converged || br.est_error < pw.est_error { br } else { pw })
        }
    }
}

fn asym(spec: &SubordinatorSpec, t: f64) -> Option<f64> {
    let regime = if t < 1.0 { Regime::TToZero } else { Regime::TToInfinity };
    asymptotic_U(spec, t, regime).ok()
}

/// Evaluates every grid point and renders the CSV.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, String> {
    let spec = cfg.validate()?;
    let engine = match cfg.corr_s {
        Some(_) => Some(MomentEngine::new(&spec, cfg.eps).map_err(|e| e.to_string())?),
        None => None,
    };
    let rows: Vec<Row> = cfg
        .t_grid
        .par_iter()
        .map(|&t| {
            let mut estimate = estimate(&spec, t, cfg).map_err(|e| format!("t={t}: {e}"))?;
            let corr = match (&engine, cfg.corr_s) {
                (Some(e), Some(s)) => match e.covariance(s, t) {
                    Ok(c) if c.corr.is_finite() => Some(c.corr),
                    Ok(_) => {
                        estimate.converged = false;
                        estimate.diagnostics.push(format!("correlation undefined at s={s}: zero variance"));
                        None
                    }
                    Err(err) => {
                        estimate.converged = false;
                        estimate.diagnostics.push(format!("correlation failed: {err}"));
                        None
                    }
                },
                _ => None,
            };
            let u_asym = if cfg.overlay_asymptotics { asym(&spec, t) } else { None };
            Ok(Row { estimate, corr, u_asym })
        })
        .collect::<Result<_, String>>()?;
    let csv = render_csv(&rows, cfg.corr_s.is_some(), cfg.overlay_asymptotics);
    let all_converged = rows.iter().all(|r| r.estimate.converged);
    Ok(RunOutput { rows, csv, all_converged })
}

/// 17 significant digits, enough to recover the exact binary64 value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const HEADER: &str = "t,U,dU,method,n_used,est_error,converged";

pub fn render_csv(rows: &[Row], with_corr: bool, with_asym: bool) -> String {
    let mut out = String::from(HEADER);
    if with_corr {
        out.push_str(",corr");
    }
    if with_asym {
        out.push_str(",U_asym");
    }
    out.push('\n');
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        let e = &r.estimate;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(e.t),
            fmt_f64(e.u),
            opt(e.du),
            e.method.as_str(),
            e.n_used,
            fmt_f64(e.est_error),
            e.converged
        );
        if with_corr {
            let _ = write!(out, ",{}", opt(r.corr));
        }
        if with_asym {
            let _ = write!(out, ",{}", opt(r.u_asym));
        }
        out.push('\n');
    }
    out
}
