//! Command-line front end. Exit status: 0 on success, 1 on a command error,
//! 2 on a usage error, 3 when `--strict` is set and the ledger has failures.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use crate::certificates::{feasibility_check, fit_empirical, theta_for, ConstantSource};
use crate::config::{RunConfig, AXES};
use crate::demos::{demo_names, evaluate_certificate, run_config, run_demo, DemoReport};
use crate::io::{self, write_json, CERTIFICATE_FILE};
use crate::regions::{
    gamma_window, kappa_sup_jl, kappa_sup_main, kappa_sup_pe, parse_q, q_from_f64, table1_csv, to_f64,
};

pub const EXIT_STRICT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "collapse-lab", version, about = "Radial chemotaxis simulations and blow-up certificate checks")]
pub struct Cli {
    /// Exit with status 3 when any resolved ledger entry fails.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact admissible κ and γ regions.
    Region {
        #[command(subcommand)]
        query: RegionQuery,
    },
    /// Integrates a configuration and writes a run directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assembles the blow-up certificate for a configuration.
    Certify {
        #[arg(long)]
        config: PathBuf,
        /// Fit C1, C2 from the moment series of this run directory.
        #[arg(long)]
        empirical: Option<PathBuf>,
        /// Writes the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds the inequality ledger of a run directory.
    Monitor {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs one simulation per value of a parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values; may be empty.
        #[arg(long, default_value = "", value_parser = parse_values)]
        values: Values,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a packaged configuration.
    Demo {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegionVariant {
    Jl,
    Pe,
    /// Pointwise bound `u ≤ K r^{−p}` with a given `p`.
    Main,
}

#[derive(Debug, Subcommand)]
pub enum RegionQuery {
    /// κ-suprema for m = 1, α = 0 as exact rationals.
    Table1,
    /// Random admissible tuples: γ window nonempty and θ ∈ (0, 2).
    Feasibility {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Supremum of admissible κ.
    Kappa(RegionArgs),
    /// Admissible γ window and θ for a given κ.
    Gamma {
        #[command(flatten)]
        base: RegionArgs,
        #[arg(long)]
        kappa: String,
    },
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub n: u32,
    /// Rational, e.g. `1` or `7/5`.
    #[arg(long)]
    pub m: String,
    #[arg(long, default_value = "0")]
    pub alpha: String,
    #[arg(long, value_enum, default_value = "jl")]
    pub variant: RegionVariant,
    /// Envelope exponent for `main`; ignored otherwise.
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Values(pub Vec<f64>);

fn parse_values(text: &str) -> Result<Values, String> {
    text.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| format!("'{v}': {e}")))
        .collect::<Result<_, _>>()
        .map(Values)
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn region(query: RegionQuery, seed: Option<u64>) -> anyhow::Result<()> {
    match query {
        RegionQuery::Table1 => print!("{}", table1_csv()),
        RegionQuery::Feasibility { samples } => {
            let report = feasibility_check(samples, seed.unwrap_or(0));
            print_json(&report)?;
            if report.failures > 0 {
                bail!("{} of {samples} tuples failed", report.failures);
            }
        }
        RegionQuery::Kappa(args) => {
            let (m, alpha) = (parse_q(&args.m)?, parse_q(&args.alpha)?);
            let bound = match args.variant {
                RegionVariant::Jl => kappa_sup_jl(args.n, m, alpha)?,
                RegionVariant::Pe => kappa_sup_pe(args.n, m, alpha)?,
                RegionVariant::Main => {
                    let p = args.p.as_deref().context("--p is required for the main condition")?;
                    kappa_sup_main(args.n, m, parse_q(p)?, alpha)?
                }
            };
            print_json(&bound)?;
        }
        RegionQuery::Gamma { base, kappa } => {
            let (m, alpha, kappa) = (parse_q(&base.m)?, parse_q(&base.alpha)?, parse_q(&kappa)?);
            let p = match (base.variant, base.p.as_deref()) {
                (_, Some(p)) => parse_q(p)?,
                (RegionVariant::Pe, None) => crate::regions::pe_exponent_p0(base.n, m)?,
                (_, None) => crate::regions::qi(base.n as i128),
            };
            let window = gamma_window(base.n, m, p, kappa, alpha)?;
            let theta = theta_for(base.n, m, p, kappa, alpha).ok();
            #[derive(Serialize)]
            struct Out {
                p: String,
                window: crate::regions::GammaWindow,
                midpoint: f64,
                theta: Option<String>,
            }
            print_json(&Out {
                p: p.to_string(),
                midpoint: to_f64(window.midpoint()),
                window,
                theta: theta.map(|t| t.theta.to_string()),
            })?;
        }
    }
    Ok(())
}

fn load(path: &Path, seed: Option<u64>) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn certify(config: &Path, empirical: Option<&Path>, out: Option<&Path>, seed: Option<u64>) -> anyhow::Result<()> {
    let cfg = load(config, seed)?;
    let report = match empirical {
        None => cfg.certificate()?,
        Some(dir) => {
            let stored = io::load_run(dir)?;
            let moments = stored.summary.moments.context("the calibration run has no moment series")?;
            let th = theta_for(
                cfg.model.n,
                q_from_f64(cfg.model.m)?,
                q_from_f64(cfg.envelope_p()?)?,
                q_from_f64(cfg.model.kappa)?,
                q_from_f64(cfg.model.alpha)?,
            )?;
            let (c1, c2) = fit_empirical(&stored.series, &moments, to_f64(th.theta))?;
            let mut with_gamma = cfg.clone();
            with_gamma.certificate.gamma = Some(q_from_f64(moments.gamma)?.to_string());
            with_gamma.certificate_with(ConstantSource::Empirical { c1, c2 })?
        }
    };
    match out {
        Some(path) => write_json(path, &report)?,
        None => print_json(&report)?,
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    value: f64,
    status: String,
    t_star: Option<f64>,
    max_sup_u: Option<f64>,
    error: Option<String>,
}

fn sweep(config: &Path, axis: &str, values: &[f64], jobs: usize, out: &Path, seed: Option<u64>) -> anyhow::Result<()> {
    let base = load(config, seed)?;
    if !AXES.contains(&axis) {
        bail!("unknown sweep axis '{axis}'; expected one of {}", AXES.join(", "));
    }
    fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(k, &value)| {
                let attempt = || -> anyhow::Result<DemoReport> {
                    let mut cfg = base.clone();
                    cfg.set_axis(axis, value)?;
                    cfg.validate()?;
                    Ok(run_config(&cfg, &out.join(format!("{k:03}_{axis}={value}")))?)
                };
                match attempt() {
                    Ok(r) => SweepRow {
                        value,
                        status: r.status.label().to_string(),
                        t_star: r.status.terminal_time(),
                        max_sup_u: Some(r.diagnostics.max_sup_u),
                        error: None,
                    },
                    Err(e) => SweepRow { value, status: "error".into(), t_star: None, max_sup_u: None, error: Some(e.to_string()) },
                }
            })
            .collect()
    });
    let mut csv = String::from("value,status,t_star,max_sup_u,error\n");
    for r in &rows {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.16e}"));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.value,
            r.status,
            opt(r.t_star),
            opt(r.max_sup_u),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        ));
    }
    fs::write(out.join("summary.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

/// Runs the parsed command; returns the process exit status.
pub fn execute(cli: Cli) -> anyhow::Result<i32> {
    let strict_status = |failed: usize| if cli.strict && failed > 0 { EXIT_STRICT } else { 0 };
    match cli.command {
        Command::Region { query } => region(query, cli.seed)?,
        Command::Simulate { config, out } => {
            let cfg = load(&config, cli.seed)?;
            let result = io::simulate(&cfg)?;
            let summary = io::write_run(&out, &cfg, &result)?;
            write_json(&out.join(CERTIFICATE_FILE), &evaluate_certificate(&cfg, &result))?;
            print_json(&summary)?;
        }
        Command::Certify { config, empirical, out } => certify(&config, empirical.as_deref(), out.as_deref(), cli.seed)?,
        Command::Monitor { run, out } => {
            let stored = io::load_run(&run)?;
            let ledger = io::ledger_for(&stored)?;
            io::write_ledger(&out, &ledger)?;
            let summary = ledger.summary();
            print_json(&summary)?;
            return Ok(strict_status(summary.failed_resolved));
        }
        Command::Sweep { config, axis, values, jobs, out } => sweep(&config, &axis, &values.0, jobs, &out, cli.seed)?,
        Command::Demo { name, out } => {
            if !demo_names().contains(&name.as_str()) {
                bail!("unknown demo '{name}'; available: {}", demo_names().join(", "));
            }
            let report = run_demo(&name, &out)?;
            print_json(&report)?;
            return Ok(strict_status(report.ledger.failed_resolved));
        }
    }
    Ok(0)
}

/// Entry point of the binary.
pub fn main_entry() -> i32 {
    let env = env_logger::Env::new().filter_or("COLLAPSE_LAB_LOG", "error");
    let _ = env_logger::Builder::from_env(env).try_init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
