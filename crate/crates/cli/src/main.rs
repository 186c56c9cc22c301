use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use csc_cli::commands;
use csc_cli::config::{Overrides, RunConfig};
use csc_cli::error::{exit, CliError, Result};
use csc_cli::io::{ensure_dir, write_json};

/// Constant scalar curvature hypersurfaces in Minkowski space and their
/// special lagrangian lifts.
#[derive(Parser, Debug)]
#[command(name = "csc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON run configuration; missing fields take their defaults (see
    /// README). Flags override the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed of every random stream [config default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Curvature parameter: the target is S = -k² [config default: 1].
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Grid spacing on the cube [lo, hi]^dim [config default: 0.0625].
    #[arg(long, global = true)]
    grid_h: Option<f64>,
    /// Continuation steps [config default: 16].
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Newton tolerance on max |S + k²| [config default: 1e-8].
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Boundary height field (solve) or cocycle document (cocycle).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Run the seeded property suite.
    Verify,
    /// Solve the Dirichlet problem for S = -k².
    Solve,
    /// Continue a solution along a path of boosted boundary data.
    Continue,
    /// Sample fuchsian leaves and probe the foliation.
    Foliate,
    /// Lift an analytic surface and tabulate the special lagrangian data.
    Lift,
    /// Sample curtains over a totally geodesic slice.
    Curtain,
    /// Measure the cocycle identity of a representation.
    Cocycle,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Continue => "continue",
            Command::Foliate => "foliate",
            Command::Lift => "lift",
            Command::Curtain => "curtain",
            Command::Cocycle => "cocycle",
        }
    }
}

fn print<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("summaries serialize"));
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let mut cfg = RunConfig::load(g.config.as_deref())?;
    cfg.apply(&Overrides {
        seed: g.seed,
        k: g.k,
        grid_h: g.grid_h,
        steps: g.steps,
        tol: g.tol,
        input: g.input.clone(),
    });
    cfg.command = cli.command.name().to_string();
    cfg.validate()?;
    ensure_dir(&g.out)?;
    let out: &Path = &g.out;
    match cli.command {
        Command::Verify => {
            let r = commands::verify(&cfg, out);
            if let Ok(r) = &r {
                println!("{} checks passed", r.checks.len());
            }
            r.map(|_| ())
        }
        Command::Solve => commands::solve(&cfg, out).map(|s| print(&s)),
        Command::Continue => commands::continue_path(&cfg, out).map(|m| {
            println!("{} steps written", m.entries.len());
        }),
        Command::Foliate => commands::foliate(&cfg, out).map(|s| print(&s.probe)),
        Command::Lift => commands::lift_samples(&cfg, out).map(|s| print(&s)),
        Command::Curtain => commands::curtain(&cfg, out).map(|s| print(&s)),
        Command::Cocycle => commands::cocycle(&cfg, out).map(|s| print(&s)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => report(&cli.global.out, &e),
    }
}

fn report(out: &Path, e: &CliError) -> ExitCode {
    let payload = e.payload();
    eprintln!("{}", serde_json::to_string(&payload).expect("payload serializes"));
    if out.is_dir() {
        // best effort; the payload is already on stderr
        let _ = write_json(&out.join("error.json"), &payload);
    }
    ExitCode::from(payload.exit_code)
}
