use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use invsub::FamilyParams;
use invsub_cli::{parse_custom_spec, parse_t_list, parse_t_range, run, MethodChoice, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "invsub", version, about = "Renewal function, density and correlation of inverse subordinators")]
struct Cli {
    #[command(subcommand)]
    cmd: Top,
}

#[derive(Subcommand, Debug)]
enum Top {
    #[command(flatten)]
    Family(Family),
    /// Add a corr(E(s), E(t)) column for a fixed s
    Corr {
        #[arg(long)]
        s: f64,
        #[command(subcommand)]
        family: Family,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Comma-separated times
    #[arg(long, value_delimiter = ',', conflicts_with = "t_range")]
    t: Vec<String>,
    /// start:stop:count[:log]
    #[arg(long)]
    t_range: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// postwidder, bromwich or auto
    #[arg(long, default_value = "auto")]
    method: MethodChoice,
    /// Add a U_asym column
    #[arg(long)]
    overlay_asym: bool,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Poisson process with drift
    Poisson {
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        r: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Compound Poisson with Pareto jumps
    Pareto {
        #[arg(long, alias = "a")]
        alpha: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Sum of two stable subordinators
    Sumas {
        #[arg(long)]
        a1: f64,
        #[arg(long)]
        a2: f64,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Generalized inverse Gaussian subordinator
    Gig {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Stable subordinator
    Stable {
        #[arg(long, alias = "a")]
        alpha: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Uniform mixture of stable indices
    Unimix {
        #[command(flatten)]
        common: Common,
    },
    /// Drift plus measure kernels read from a file
    Custom {
        /// File with drift(mu), atom(x, w), pareto(a), stable(a, w), exp_tilted_power(a, b)
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

fn family_params(f: Family) -> Result<(FamilyParams, Common), Failure> {
    Ok(match f {
        Family::Poisson { mu, r, common } => (FamilyParams::PoissonDrift { mu, r }, common),
        Family::Pareto { alpha, common } => (FamilyParams::ParetoCP { alpha }, common),
        Family::Sumas { a1, a2, c1, c2, common } => (FamilyParams::TwoStableMix { a1, a2, c1, c2 }, common),
        Family::Gig { delta, gamma, kappa, common } => (FamilyParams::Gig { delta, gamma, kappa }, common),
        Family::Stable { alpha, common } => (FamilyParams::Stable { alpha }, common),
        Family::Unimix { common } => (FamilyParams::UniformStableMix, common),
        Family::Custom { spec, common } => {
            let text = fs::read_to_string(&spec).map_err(|e| Failure::Io(format!("{}: {e}", spec.display())))?;
            (FamilyParams::Custom(parse_custom_spec(&text)?), common)
        }
    })
}

fn config(cli: Cli) -> Result<(RunConfig, Option<PathBuf>), Failure> {
    let (family, corr_s) = match cli.cmd {
        Top::Family(f) => (f, None),
        Top::Corr { s, family } => (family, Some(s)),
    };
    let (family, common) = family_params(family)?;
    let t_grid = match (&common.t_range, common.t.is_empty()) {
        (Some(r), _) => parse_t_range(r)?,
        (None, false) => parse_t_list(&common.t.join(","))?,
        (None, true) => return Err(Failure::Usage("one of --t or --t-range is required".into())),
    };
    let cfg = RunConfig {
        family,
        t_grid,
        method: common.method,
        eps: common.eps,
        corr_s,
        overlay_asymptotics: common.overlay_asym,
    };
    Ok((cfg, common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, out) = match config(cli) {
        Ok(c) => c,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for row in &result.rows {
        let e = &row.estimate;
        if !e.converged {
            eprintln!("t={}: not converged, est_error {:.3e}", e.t, e.est_error);
        }
        for d in &e.diagnostics {
            eprintln!("t={}: {d}", e.t);
        }
    }
    let written = match &out {
        Some(p) => fs::write(p, &result.csv).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(result.csv.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if result.all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
