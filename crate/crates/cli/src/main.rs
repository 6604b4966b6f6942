//! `euler-geom <command> [--config <path>] [--out <dir>] [--seed <u64>] [--n <int>] [--eos <name>]`
//!
//! Exit codes: 0 every verdict passed, 1 a verification failed, 2 bad
//! configuration or arguments, 3 numeric failure (non-finite values, blowup).

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use euler_geom::checks::{eos_csv, eos_trials, frame_csv, frame_trials, metric_csv, metric_trials};
use euler_geom::evolve::build_slice_stack;
use euler_geom::run::{RunConfig, converge, reform_verify};
use euler_geom::shock1d::{eikonal_mu, shock_study, sine_fan, snapshot_csv};
use euler_geom::{EosConfig, Error, Grid, compute_derived};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::output::Outputs;

#[derive(Debug, Parser)]
#[command(name = "euler-geom", version, about = "Verification suites for the acoustical-geometry Euler formulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run config; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed of the random-state suites.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Overrides `grid.n`.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Overrides the EOS with the defaults of `polytropic` or `chaplygin`.
    #[arg(long, global = true)]
    eos: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Derivative fields and identities of the EOS at random states.
    EosCheck,
    /// Metric, inverse, determinant and transport vector at random states.
    GeometryCheck,
    /// Null-frame relations and strong null condition at random states.
    NullframeCheck,
    /// Residuals of the second-order system at n/4, n/2 and n.
    ReformVerify,
    /// Residuals over the configured resolutions.
    Converge,
    /// Plane-symmetric simple wave up to shock formation.
    Shock1d,
    /// Field CSVs of the evolved fixture around `t_center`.
    Export,
}

impl Command {
    fn id(self) -> &'static str {
        match self {
            Command::EosCheck => "eos-check",
            Command::GeometryCheck => "geometry-check",
            Command::NullframeCheck => "nullframe-check",
            Command::ReformVerify => "reform-verify",
            Command::Converge => "converge",
            Command::Shock1d => "shock1d",
            Command::Export => "export",
        }
    }
}

/// Provenance block written next to every suite's CSVs.
#[derive(Serialize)]
struct Header<'a> {
    command: &'static str,
    seed: u64,
    config_sha256: String,
    grid: euler_geom::run::GridConfig,
    eos: &'a EosConfig,
    tolerances: Tolerances<'a>,
    pass: bool,
    files: Vec<String>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct Tolerances<'a> {
    policy: &'a euler_geom::reform::ReportPolicy,
    sampling: &'a euler_geom::run::SamplingConfig,
    shock: &'a euler_geom::shock1d::ShockTolerances,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.n {
        cfg.grid.n = n;
    }
    if let Some(name) = &cli.eos {
        cfg.eos = EosConfig::by_name(name)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_hash(cfg: &RunConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn run_suite(command: Command, cfg: &RunConfig, seed: u64, out: &mut Outputs) -> Result<bool> {
    match command {
        Command::EosCheck => {
            let rows = eos_trials(cfg.build_eos()?.as_ref(), seed, &cfg.sampling)?;
            out.text("eos_check.csv", eos_csv(&rows));
            Ok(rows.iter().all(|r| r.pass))
        }
        Command::GeometryCheck => {
            let rows = metric_trials(seed, &cfg.sampling);
            out.text("geometry_check.csv", metric_csv(&rows));
            Ok(rows.iter().all(|r| r.pass))
        }
        Command::NullframeCheck => {
            let rows = frame_trials(seed, &cfg.sampling)?;
            out.text("nullframe_check.csv", frame_csv(&rows));
            Ok(rows.iter().all(|r| r.pass))
        }
        Command::ReformVerify => {
            let report = reform_verify(cfg, cfg.grid.n)?;
            out.text("residuals.csv", report.to_csv());
            out.json("residuals.json", &report)?;
            Ok(report.all_pass())
        }
        Command::Converge => {
            let report = converge(cfg)?;
            out.text("converge.csv", report.to_csv());
            out.json("converge.json", &report)?;
            Ok(report.all_pass())
        }
        Command::Shock1d => shock(cfg, out),
        Command::Export => {
            let grid = Grid::new(cfg.grid.n, cfg.stencil_order()?)?;
            let initial = cfg.fixture_state(grid)?;
            let dt = cfg.stack_settings().dt_over_h * grid.h();
            let stack = build_slice_stack(&initial, cfg.t_center, dt)?;
            let run = Path::new(cfg.fixture.id());
            let mut times = Vec::new();
            for (m, slice) in stack.slices().iter().enumerate() {
                let d = compute_derived(slice);
                out.scalar(run.join(format!("rho_log_{m}.csv")), slice.rho_log.clone());
                out.vector(run.join(format!("v_{m}.csv")), slice.v.clone());
                out.scalar(run.join(format!("s_{m}.csv")), slice.s.clone());
                out.vector(run.join(format!("omega_{m}.csv")), d.omega);
                out.vector(run.join(format!("grad_s_{m}.csv")), d.grad_ent);
                out.vector(run.join(format!("curl_mod_{m}.csv")), d.curl_mod);
                out.scalar(run.join(format!("div_mod_{m}.csv")), d.div_mod);
                times.push(slice.t);
            }
            if let Some(bad) = stack.slices().iter().find(|s| !s.is_finite()) {
                return Err(Error::Numeric(format!("non-finite fields at t = {}", bad.t)).into());
            }
            out.json(run.join("slices.json"), &serde_json::json!({ "dt": dt, "t": times }))?;
            Ok(true)
        }
    }
}

fn shock(cfg: &RunConfig, out: &mut Outputs) -> Result<bool> {
    let eos = cfg.build_eos()?;
    let study = shock_study(eos.clone(), &cfg.shock)?;
    let fan = sine_fan(eos, cfg.shock.amplitude, cfg.shock.entropy)?;
    out.text("shock1d_series.csv", study.series_csv());
    let mut c_mu = Vec::new();
    for (k, snap) in study.snapshots.iter().enumerate() {
        out.text(format!("shock1d_snapshot_{k}.csv"), snapshot_csv(&snap.rows));
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for row in &snap.rows {
            let p = eikonal_mu(&fan, snap.t, row.x)?;
            lo = lo.min(p.c_mu);
            hi = hi.max(p.c_mu);
        }
        c_mu.push(serde_json::json!({ "t": snap.t, "c_mu_min": lo, "c_mu_max": hi }));
    }
    let mut summary = serde_json::to_value(&study)?;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("series");
        obj.remove("snapshots");
        obj.insert("c_mu".into(), c_mu.into());
        obj.insert("pass".into(), study.all_pass().into());
    }
    out.json("shock1d_summary.json", &summary)?;
    Ok(study.all_pass())
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let hash = config_hash(&cfg)?;
    let mut out = Outputs::default();
    let pass = run_suite(cli.command, &cfg, cli.seed, &mut out)?;
    let written = out.write_all(&cli.out)?;
    let header = Header {
        command: cli.command.id(),
        seed: cli.seed,
        config_sha256: hash,
        grid: cfg.grid,
        eos: &cfg.eos,
        tolerances: Tolerances {
            policy: &cfg.policy,
            sampling: &cfg.sampling,
            shock: &cfg.shock.tolerances,
        },
        pass,
        files: written.iter().map(|p| p.display().to_string()).collect(),
        config: &cfg,
    };
    let path = cli.out.join(format!("{}.report.json", cli.command.id()));
    let mut body = serde_json::to_string_pretty(&header)?;
    body.push('\n');
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{}: {} ({} files in {})",
        cli.command.id(),
        if pass { "PASS" } else { "FAIL" },
        written.len() + 1,
        cli.out.display()
    );
    Ok(pass)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config(_) | Error::Usage(_) | Error::Io(_) => 2,
                Error::Domain(_) | Error::Numeric(_) | Error::Blowup { .. } | Error::PostBlowup { .. } => 3,
                Error::Json(_) => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
