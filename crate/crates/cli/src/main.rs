//! `barrier-nls`: region classification, breaking curves, field sampling,
//! validation runs and genus-one endpoint data on the command line.
//!
//! Physical parameters come from `--config` (flat `key = value` file) and
//! may be overridden by `--q`, `--L` and `--eps`. All numbers are printed
//! with 17 significant digits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::process::ExitCode;

use barrier_nls::cli::{
    breaking_curves_csv, classify_line, field_csv, fmt_num, sample_grid, validation_csv, validation_run, GridSpec,
    Mode, PatchSpec, RegionLabel, RunConfig,
};
use barrier_nls::genus1::{modulation_constants, solve_endpoint_with};
use barrier_nls::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "barrier-nls", version, about = "Semiclassical square-barrier NLS asymptotics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Barrier height.
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Barrier half-width.
    #[arg(long = "L", global = true)]
    l: Option<f64>,
    /// Dispersion parameter.
    #[arg(long, global = true)]
    eps: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print `region,T1,T2` for one point.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        t: f64,
    },
    /// Print the CSV `x,T1,T2` on a uniform x grid.
    BreakingCurves {
        #[arg(long, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long)]
        nx: usize,
    },
    /// Print the CSV `x,t,region,re_psi,im_psi,abs_psi` for the configured grid.
    Field {
        /// `asymptotic`, `numeric` or `both` (overrides the config).
        #[arg(long)]
        mode: Option<String>,
    },
    /// Compare the direct solver with the asymptotics on S0/S1 patches.
    Validate {
        /// Comma-separated list of eps values.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.025])]
        eps_list: Vec<f64>,
        /// Patch `t:REGION:x_lo:x_hi` with REGION `S0` or `S1`; repeatable.
        #[arg(long = "patch", allow_hyphen_values = true)]
        patches: Vec<String>,
    },
    /// Print `mu,m,re_alpha,im_alpha,Omega,eta,T0,Y0,H`.
    Endpoint {
        #[arg(long)]
        mu: f64,
        /// Time at which the constants are evaluated, with x = L - 2 mu t (default L/(4 mu)).
        #[arg(long)]
        t: Option<f64>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(q) = common.q {
        cfg.q = q;
    }
    if let Some(l) = common.l {
        cfg.l = l;
    }
    if let Some(eps) = common.eps {
        cfg.eps = eps;
    }
    Ok(cfg)
}

fn parse_patch(s: &str) -> Result<PatchSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Input(format!("patch '{s}' is not of the form t:REGION:x_lo:x_hi"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
    let region = match parts[1] {
        "S0" => RegionLabel::S0,
        "S1" => RegionLabel::S1,
        _ => return Err(Error::Input(format!("patch region must be S0 or S1, got '{}'", parts[1]))),
    };
    Ok(PatchSpec { t: num(parts[0])?, region, x_lo: num(parts[2])?, x_hi: num(parts[3])? })
}

fn run(cli: Cli) -> Result<String> {
    let cfg = load_config(&cli.common)?;
    let p = cfg.params()?;
    let quad = cfg.quadrature();
    match cli.command {
        Command::Classify { x, t } => {
            if !(t >= 0.0) {
                return Err(Error::Input(format!("t must be non-negative, got {t}")));
            }
            Ok(format!("{}\n", classify_line(&cfg.classifier()?.classify(x, t))))
        }
        Command::BreakingCurves { x_min, x_max, nx } => {
            if nx < 2 || !(x_min <= x_max) {
                return Err(Error::Input("need nx >= 2 and x_min <= x_max".into()));
            }
            let xs = GridSpec { x_range: (x_min, x_max), t_range: (0.0, 1.0), nx, nt: 2 }.xs();
            Ok(breaking_curves_csv(&xs, &cfg.classifier()?))
        }
        Command::Field { mode } => {
            let mode = match mode {
                Some(m) => m.parse::<Mode>()?,
                None => cfg.mode,
            };
            let report = sample_grid(&cfg.grid, &p, mode, &cfg.solver, &quad, &cfg.classifier()?)?;
            let mut err = std::io::stderr().lock();
            for f in &report.failures {
                let _ = writeln!(err, "point ({}, {}) failed: {}", fmt_num(f.x), fmt_num(f.t), f.message);
            }
            for c in &report.comparisons {
                let _ = writeln!(
                    err,
                    "compare t={} region={} patch=[{}, {}] linf={} l2={}",
                    fmt_num(c.t),
                    c.region.as_str(),
                    fmt_num(c.patch_lo),
                    fmt_num(c.patch_hi),
                    fmt_num(c.linf),
                    fmt_num(c.l2)
                );
            }
            Ok(field_csv(&report, mode == Mode::Numeric))
        }
        Command::Validate { eps_list, patches } => {
            let patches = if patches.is_empty() {
                vec![
                    PatchSpec { t: 0.15, region: RegionLabel::S1, x_lo: -0.5 * cfg.l, x_hi: 0.5 * cfg.l },
                    PatchSpec { t: 0.2, region: RegionLabel::S0, x_lo: 1.5 * cfg.l, x_hi: 2.0 * cfg.l },
                ]
            } else {
                patches.iter().map(|s| parse_patch(s)).collect::<Result<Vec<_>>>()?
            };
            let records = validation_run(&p, &eps_list, &patches, &cfg.solver, &quad)?;
            Ok(validation_csv(&records))
        }
        Command::Endpoint { mu, t } => {
            if !(mu > 0.0) {
                return Err(Error::Input(format!("mu must be positive, got {mu}")));
            }
            let t = t.unwrap_or(cfg.l / (4.0 * mu));
            let x = cfg.l - 2.0 * mu * t;
            let st = solve_endpoint_with(mu, cfg.q, &quad)?;
            let m = modulation_constants(st.alpha, x, t, &p, &quad)?;
            Ok(format!(
                "mu,m,re_alpha,im_alpha,Omega,eta,T0,Y0,H\n{}\n",
                [mu, st.m, st.alpha.re, st.alpha.im, m.omega, m.eta, m.t0, m.y0, m.h]
                    .iter()
                    .map(|&v| fmt_num(v))
                    .collect::<Vec<_>>()
                    .join(",")
            ))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
