use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use kfbi_stokes::experiment::{self, ExperimentSpec, Mode, OUTPUT_ROOT_VAR};
use kfbi_stokes::kfbi::ViscosityCase;

#[derive(Parser)]
#[command(name = "kfbi", version, about = "Two-phase Stokes flow with discontinuous viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once per grid size and write the requested dumps.
    Solve(Common),
    /// Convergence table against an exact solution (examples 1 and 2).
    Converge(Common),
    /// Move the interface under surface tension (examples 3 to 6).
    Evolve(Common),
}

#[derive(Args)]
struct Common {
    /// Example id, 1 to 6.
    #[arg(long, short = 'e', default_value_t = 1)]
    example: u8,
    /// key = value file applied before the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Viscosity case I to VI.
    #[arg(long)]
    case: Option<ViscosityCase>,
    /// Grid size N; repeat for several.
    #[arg(long = "grid", short = 'n')]
    grids: Vec<usize>,
    #[arg(long)]
    mu_plus: Option<f64>,
    #[arg(long)]
    mu_minus: Option<f64>,
    /// GMRES tolerance on the max-norm residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory. Defaults to a directory under $KFBI_OUTPUT_ROOT or ./kfbi-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Velocity and pressure as VTK and CSV.
    #[arg(long)]
    dump_fields: bool,
    /// Boundary trace, curve nodes and GMRES residual log.
    #[arg(long)]
    dump_trace: bool,
    /// Interface jumps at the grid intersections.
    #[arg(long)]
    dump_jumps: bool,
    /// Worker threads for independent solves.
    #[arg(long)]
    jobs: Option<usize>,
    /// Initial curve for evolve: a shape string or a CSV of points.
    #[arg(long)]
    curve: Option<String>,
    /// Final time for evolve.
    #[arg(long)]
    t_final: Option<f64>,
    /// Surface tension coefficient for evolve.
    #[arg(long)]
    tension: Option<f64>,
}

impl Common {
    fn into_spec(self, mode: Mode) -> Result<ExperimentSpec> {
        let mut s = ExperimentSpec::new(mode, self.example);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            s.apply_config(&text)?;
            if !text.lines().any(|l| l.trim_start().starts_with("out")) {
                s.out = experiment::default_output_dir(mode, s.example);
            }
        } else {
            s.out = experiment::default_output_dir(mode, s.example);
        }
        if let Some(c) = self.case {
            s.case = c;
        }
        if !self.grids.is_empty() {
            s.grids = self.grids;
        }
        s.mu_plus = self.mu_plus.or(s.mu_plus);
        s.mu_minus = self.mu_minus.or(s.mu_minus);
        s.tol = self.tol.unwrap_or(s.tol);
        s.out = self.out.unwrap_or(s.out);
        s.dump_fields |= self.dump_fields;
        s.dump_trace |= self.dump_trace;
        s.dump_jumps |= self.dump_jumps;
        s.jobs = self.jobs.unwrap_or(s.jobs);
        s.curve = self.curve.or(s.curve);
        s.t_final = self.t_final.or(s.t_final);
        s.tension = self.tension.or(s.tension);
        Ok(s)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(c) => {
            let spec = c.into_spec(Mode::Solve)?;
            for o in experiment::run_solve(&spec)? {
                match o.errors {
                    Some(e) => println!(
                        "N={:<5} iters={:<3} e_u_l2={:.3e} e_u_max={:.3e} e_p_l2={:.3e} e_p_max={:.3e}",
                        o.n, o.iterations, e.e_u_l2, e.e_u_max, e.e_p_l2, e.e_p_max
                    ),
                    None => println!("N={:<5} iters={}", o.n, o.iterations),
                }
            }
            println!("output in {}", spec.out.display());
            Ok(true)
        }
        Command::Converge(c) => {
            let spec = c.into_spec(Mode::Converge)?;
            experiment::run_converge(&spec)?;
            print!("{}", std::fs::read_to_string(spec.out.join("convergence.csv"))?);
            Ok(true)
        }
        Command::Evolve(c) => {
            let spec = c.into_spec(Mode::Evolve)?;
            let r = experiment::run_evolve(&spec)?;
            if let (Some(first), Some(last)) = (r.records.first(), r.records.last()) {
                println!(
                    "t={:.4} area {:.6} -> {:.6} ({:+.3e} relative), isoperimetric ratio {:.6} -> {:.6}",
                    last.time,
                    first.area,
                    last.area,
                    (last.area - first.area) / first.area,
                    first.iso_ratio,
                    last.iso_ratio
                );
            }
            println!("output in {}", spec.out.display());
            if let Some(e) = r.aborted {
                eprintln!("run stopped early: {e}");
                return Ok(false);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    log::debug!("output root variable: {OUTPUT_ROOT_VAR}");
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
