//! Command-line front end.
//!
//! ```text
//! multilayer-power run    [--config FILE] [--out DIR] [--drops N] [--seed S]
//!                         [--discard K | --discard A..B] [--overlay on|off]
//!                         [--solver analytic|lp|auto]
//! multilayer-power solve  GAINS_FILE [--gamma G | --rate R] [--caps-dbm 43,33]
//!                         [--solver ...] [--json]
//! multilayer-power layout [--config FILE] [--out FILE] [--seed S] [--overlay on|off]
//! ```
//!
//! Exit codes: 0 success, 1 I/O or placement failure, 2 invalid config or
//! input file, 3 infeasible targets, 4 numerical failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gain_matrix::{build_multi_layer, parse_gains};
use crate::geometry::LayoutExport;
use crate::harness::{
    campaign_json, drops_csv, plot_csv, run_campaign, summary_csv, Deployment, ScenarioConfig,
};
use crate::solvers::{select_solver, spectral_radius, PowerCaps, SolverMode};
use crate::units::{dbm_to_watts, sinr_for_rate};

pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Exit status for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Parse { .. }
        | Error::Domain(_)
        | Error::SingularServingLink { .. } => EXIT_CONFIG,
        Error::Numerical { .. } => EXIT_NUMERICAL,
        Error::Io(_) | Error::Placement { .. } => EXIT_IO,
        e if e.is_infeasible() => EXIT_INFEASIBLE,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "multilayer-power",
    version,
    about = "Downlink power control for multi-layer cellular networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a drop campaign and write CSV/JSON results.
    Run(RunArgs),
    /// Solve one gains file and print the allocation.
    Solve(SolveArgs),
    /// Export the layout and one sample drop as JSON.
    Layout(LayoutArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Analytic,
    Lp,
    Auto,
}

impl From<SolverArg> for SolverMode {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Analytic => SolverMode::Analytic,
            SolverArg::Lp => SolverMode::Lp,
            SolverArg::Auto => SolverMode::Auto,
        }
    }
}

/// `K`, `A..B`, `A..=B` or `A-B`, inclusive.
pub fn parse_discard(s: &str) -> std::result::Result<(usize, usize), String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{s}` is not a discard count or range"))
    };
    let split = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'));
    match split {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => {
            let k = num(s)?;
            Ok((k, k))
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct ScenarioArgs {
    /// TOML scenario file; omitted keys take the reference values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed; drop d uses seed + d.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Microcell overlay.
    #[arg(long, value_enum)]
    pub overlay: Option<OnOff>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_toml(&read(path)?)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(o) = self.overlay {
            cfg.overlay = o == OnOff::On;
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Drops per discard level.
    #[arg(long)]
    pub drops: Option<usize>,
    /// Discard count or inclusive range, e.g. `5` or `3..10`.
    #[arg(long, value_parser = parse_discard)]
    pub discard: Option<(usize, usize)>,
    /// Solver selection for both scenarios.
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Gains file in the plain-text matrix format.
    pub file: PathBuf,
    /// Linear SINR target for every user.
    #[arg(long, conflicts_with = "rate")]
    pub gamma: Option<f64>,
    /// Common rate in bit/s/Hz; sets the target to 2^rate - 1.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Per-layer caps in dBm, macro first; missing layers are uncapped.
    #[arg(long, value_delimiter = ',')]
    pub caps_dbm: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub solver: SolverArg,
    /// Print the allocation as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct LayoutArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read file: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(Error::from)
}

/// Runs the campaign and writes `drops.csv`, `summary.csv`, `plot.csv` and
/// `campaign.json` into `--out`.
pub fn cmd_run(args: &RunArgs) -> Result<ExitCode> {
    let mut cfg = args.scenario.load()?;
    if let Some(d) = args.drops {
        cfg.drops = d;
    }
    if let Some((a, b)) = args.discard {
        cfg.discard_min = a;
        cfg.discard_max = b;
    }
    if let Some(s) = args.solver {
        cfg.solver = s.into();
    }
    cfg.validate()?;
    eprintln!(
        "SINR target {} (rate {} bit/s/Hz), {} drops x {} discard levels",
        cfg.sinr_target(),
        cfg.rate_bps_hz,
        cfg.drops,
        cfg.discard_levels().count()
    );
    let campaign = run_campaign(&cfg)?;
    fs::create_dir_all(&args.out)?;
    write(&args.out.join("drops.csv"), &drops_csv(&cfg, &campaign))?;
    write(
        &args.out.join("summary.csv"),
        &summary_csv(&cfg, &campaign.summary),
    )?;
    write(
        &args.out.join("plot.csv"),
        &plot_csv(&cfg, &campaign.summary),
    )?;
    write(
        &args.out.join("campaign.json"),
        &campaign_json(&cfg, &campaign),
    )?;

    for l in &campaign.summary.levels {
        match l.mean_gain_db {
            Some(g) => eprintln!(
                "outage {:6.2}%: gain {g:7.3} dB (std {:.3}), {}/{} drops solved",
                l.outage_pct,
                l.std_gain_db.unwrap_or(0.0),
                l.solved,
                l.drops
            ),
            None => eprintln!("outage {:6.2}%: no drop solved", l.outage_pct),
        }
    }
    if campaign.summary.all_empty() {
        eprintln!("error: every drop was infeasible at every discard level");
        return Ok(ExitCode::from(EXIT_INFEASIBLE));
    }
    Ok(ExitCode::SUCCESS)
}

/// Solves one gains file and prints powers, spectral radius, residual and
/// solver route.
pub fn cmd_solve(args: &SolveArgs) -> Result<ExitCode> {
    let doc = parse_gains(&read(&args.file)?)?;
    let gamma = match (args.gamma, args.rate) {
        (Some(g), _) => Some(g),
        (None, Some(r)) => Some(sinr_for_rate(r)),
        _ => None,
    };
    if let Some(g) = gamma {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::config("gamma", format!("must be positive, got {g}")));
        }
    }
    let gains = doc.into_gains(gamma)?;
    let layers = gains.layer_count();
    if args.caps_dbm.len() > layers {
        return Err(Error::config(
            "caps-dbm",
            format!("{} caps given for {layers} layer(s)", args.caps_dbm.len()),
        ));
    }
    let caps = PowerCaps {
        per_layer_w: (0..layers)
            .map(|l| {
                args.caps_dbm
                    .get(l)
                    .map_or(f64::INFINITY, |&d| dbm_to_watts(d))
            })
            .collect(),
    };
    let sys = build_multi_layer(&gains, layers)?;
    let rho = if layers == 1 {
        spectral_radius(&sys.f())?.spectral_radius
    } else {
        // ρ of M⁺N, the quantity the closed form needs below one
        let pinv = crate::solvers::right_pseudo_inverse(&sys.m)?;
        spectral_radius(&(pinv * &sys.n))?.spectral_radius
    };
    match select_solver(&sys, &caps, args.solver.into()) {
        Ok(alloc) => {
            let record = alloc.to_record(1e-3);
            let mut out = std::io::stdout().lock();
            if args.json {
                #[derive(Serialize)]
                struct SolveReport<'a> {
                    version: &'a str,
                    layers: usize,
                    rho: f64,
                    allocation: &'a crate::solvers::AllocationRecord,
                }
                let report = SolveReport {
                    version: crate::VERSION,
                    layers,
                    rho,
                    allocation: &record,
                };
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializes")
                )?;
            } else {
                writeln!(out, "users {} layers {layers}", gains.users())?;
                writeln!(out, "rho {rho}")?;
                writeln!(out, "path {}", alloc.path.as_str())?;
                for l in 0..layers {
                    let p: Vec<String> = alloc
                        .layer_powers(l)
                        .iter()
                        .map(|x| x.to_string())
                        .collect();
                    writeln!(out, "layer {l} {}", p.join(" "))?;
                }
                writeln!(out, "total {}", alloc.total_power_w)?;
                writeln!(out, "residual {:e}", alloc.residual)?;
                writeln!(out, "feasible {}", alloc.feasible)?;
                if let Some(a) = alloc.analytic_total_w {
                    writeln!(out, "closed_form_total {a}")?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("rho {rho}");
            Err(e)
        }
    }
}

/// Writes the layout plus one sample drop (seed = base seed) as JSON.
pub fn cmd_layout(args: &LayoutArgs) -> Result<ExitCode> {
    let cfg = args.scenario.load()?;
    let dep = Deployment::new(&cfg)?;
    let drop = dep.place_users(cfg.base_seed)?;
    #[derive(Serialize)]
    struct LayoutReport<'a> {
        version: &'a str,
        seed: u64,
        config: &'a ScenarioConfig,
        sectors: usize,
        layout: LayoutExport,
    }
    let report = LayoutReport {
        version: crate::VERSION,
        seed: cfg.base_seed,
        config: &cfg,
        sectors: dep.layout.sector_count(),
        layout: LayoutExport::new(&dep.layout, dep.overlay.as_ref(), Some(&drop)),
    };
    eprintln!(
        "{} sectors, {} microcells",
        report.sectors, report.layout.microcell_count
    );
    let mut text = serde_json::to_string_pretty(&report).expect("layout serializes");
    text.push('\n');
    match &args.out {
        Some(path) => write(path, &text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

pub fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Layout(a) => cmd_layout(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
