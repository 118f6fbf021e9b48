//! Command-line front end: evaluation, verification, ODE solving,
//! phase classification, mesh export, and the solution-family catalog.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use spherelag::error::Error;

use config::{FileConfig, RawOptions, RunConfig};

#[derive(Parser)]
#[command(
    name = "spherelag",
    version,
    about = "Lagrangian submanifolds of R^2n foliated by round spheres",
    disable_help_subcommand = true
)]
struct Cli {
    /// Seed for sampled directions and point tables.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Integrator tolerance for trajectory commands.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the immersion and curvature data at one point.
    Eval(SpecArgs),
    /// Run the closed-form vs finite-difference suite; JSON report.
    Verify(VerifyArgs),
    /// Profile-curve ODE tools.
    Hs(HsArgs),
    /// Classify energy levels and tabulate phase data (CSV).
    Phase(PhaseArgs),
    /// Sample an immersion into a PLY or CSV mesh / point table.
    Mesh(MeshArgs),
    /// Tabulate the five solution families for given n and C.
    Catalog(FlowArgs),
}

/// Preset selection shared by eval, verify, and mesh.
#[derive(Args)]
struct SpecArgs {
    /// Immersion preset: standard_circle, centered_circle, line,
    /// epicycloid, or catenoid3.
    #[arg(long)]
    preset: Option<String>,
    /// Preset parameter as key=value (rho, b, phi0, w, C_geo); repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Leaf sphere dimension parameter (n >= 3).
    #[arg(long)]
    n: Option<usize>,
    /// Curve parameter of the evaluation point.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Sphere direction as comma-separated coordinates, e.g. 1,0,0.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Sample sites per check.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct HsArgs {
    #[command(subcommand)]
    cmd: HsCmd,
}

#[derive(Subcommand)]
enum HsCmd {
    /// Integrate the profile ODE; CSV columns s,alpha,r,E,k.
    Solve(SolveArgs),
}

/// Flow parameters shared by hs solve, phase, and catalog.
#[derive(Args)]
struct FlowArgs {
    /// Leaf sphere dimension parameter (n >= 3).
    #[arg(long)]
    n: Option<usize>,
    /// Flux constant of the profile ODE.
    #[arg(long = "C", allow_negative_numbers = true)]
    c: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    flow: FlowArgs,
    /// Initial angle alpha(0).
    #[arg(long, allow_negative_numbers = true)]
    alpha0: Option<f64>,
    /// Initial radius r(0) > 0.
    #[arg(long, allow_negative_numbers = true)]
    r0: Option<f64>,
    /// Integrate s over [0, smax].
    #[arg(long)]
    smax: Option<f64>,
}

#[derive(Args)]
struct PhaseArgs {
    #[command(flatten)]
    flow: FlowArgs,
    /// Single energy level to classify.
    #[arg(long = "E", allow_negative_numbers = true)]
    e: Option<f64>,
    /// Energy sweep min:max:steps (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    table: Option<String>,
    /// Emit phase-portrait contours instead of the classification table.
    #[arg(long)]
    portrait: bool,
    /// Extra portrait energy levels, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    levels: Option<String>,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Parameter steps along the curve.
    #[arg(long = "s-steps")]
    s_steps: Option<usize>,
    /// Sphere grid resolution (n = 3 meshes).
    #[arg(long = "sphere-steps")]
    sphere_steps: Option<usize>,
    /// Output format: ply_ascii or csv.
    #[arg(long)]
    format: Option<String>,
    /// Emit a seeded point table with this many points per s (any n).
    #[arg(long)]
    points: Option<usize>,
}

impl Cli {
    fn raw_options(self) -> RawOptions {
        let mut raw = RawOptions {
            seed: self.seed,
            tol: self.tol,
            out: self.out,
            ..RawOptions::default()
        };
        match self.cmd {
            Cmd::Eval(a) => fill_spec(&mut raw, a),
            Cmd::Verify(a) => {
                raw.count = a.count;
                fill_spec(&mut raw, a.spec);
            }
            Cmd::Hs(h) => match h.cmd {
                HsCmd::Solve(a) => {
                    raw.n = a.flow.n;
                    raw.c = a.flow.c;
                    raw.alpha0 = a.alpha0;
                    raw.r0 = a.r0;
                    raw.smax = a.smax;
                }
            },
            Cmd::Phase(a) => {
                raw.n = a.flow.n;
                raw.c = a.flow.c;
                raw.e = a.e;
                raw.table = a.table;
                raw.portrait = a.portrait;
                raw.levels = a.levels;
            }
            Cmd::Mesh(a) => {
                raw.s_steps = a.s_steps;
                raw.sphere_steps = a.sphere_steps;
                raw.format = a.format;
                raw.points = a.points;
                fill_spec(&mut raw, a.spec);
            }
            Cmd::Catalog(a) => {
                raw.n = a.n;
                raw.c = a.c;
            }
        }
        raw
    }
}

fn fill_spec(raw: &mut RawOptions, a: SpecArgs) {
    raw.preset = a.preset;
    raw.params = a.params;
    raw.n = a.n;
    raw.s = a.s;
    raw.x = a.x;
}

/// 1 for malformed input, 2 for a computation that ran and failed.
fn failure_code(err: &Error) -> u8 {
    match err {
        Error::DimensionTooSmall(_)
        | Error::DimensionMismatch { .. }
        | Error::OutsideDomain { .. }
        | Error::ZeroVector(_)
        | Error::NotUnit(_)
        | Error::BadFlux(_)
        | Error::NonPositiveRadius(_)
        | Error::Config(_) => 1,
        _ => 2,
    }
}

fn dispatch(kind: CmdKind, cfg: &RunConfig) -> Result<commands::CmdOutput, Error> {
    match kind {
        CmdKind::Eval => commands::eval(cfg),
        CmdKind::Verify => commands::verify(cfg),
        CmdKind::HsSolve => commands::hs_solve(cfg),
        CmdKind::Phase => commands::phase(cfg),
        CmdKind::Mesh => commands::mesh_cmd(cfg),
        CmdKind::Catalog => commands::catalog(cfg),
    }
}

#[derive(Clone, Copy)]
enum CmdKind {
    Eval,
    Verify,
    HsSolve,
    Phase,
    Mesh,
    Catalog,
}

fn run(cli: Cli) -> Result<commands::CmdOutput, Error> {
    let kind = match &cli.cmd {
        Cmd::Eval(_) => CmdKind::Eval,
        Cmd::Verify(_) => CmdKind::Verify,
        Cmd::Hs(_) => CmdKind::HsSolve,
        Cmd::Phase(_) => CmdKind::Phase,
        Cmd::Mesh(_) => CmdKind::Mesh,
        Cmd::Catalog(_) => CmdKind::Catalog,
    };
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::assemble(cli.raw_options(), &file)?;
    let output = dispatch(kind, &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?,
        None => print!("{}", output.text),
    }
    Ok(output)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SIGMA_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => ExitCode::from(out.code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(failure_code(&err))
        }
    }
}
