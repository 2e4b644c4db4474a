//! Experiment drivers behind the command line: single solves, convergence
//! sweeps against the exact solutions, and moving-interface runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::error::{KfbiError, Result};
use crate::exact::{ExactKind, ExactSolution};
use crate::fast_solver::StokesSolver;
use crate::geometry::CurveShape;
use crate::io::{self, ConvergenceRow, NormFamily};
use crate::kfbi::{solve_two_phase, KfbiOptions, TwoPhaseProblem, TwoPhaseSolution, ViscosityCase};
use crate::mac::{compute_errors, ErrorReport};
use crate::motion::{self, MovingExample, SimulationConfig, SimulationResult};
use crate::Vec2;

/// Environment variable naming the directory under which default output
/// directories are created.
pub const OUTPUT_ROOT_VAR: &str = "KFBI_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Converge,
    Evolve,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Converge => "converge",
            Mode::Evolve => "evolve",
        }
    }
}

/// Everything one command needs. Examples 1 and 2 have exact solutions;
/// 3 to 6 are the moving interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub example: u8,
    pub case: ViscosityCase,
    /// Overrides of the case viscosities.
    pub mu_plus: Option<f64>,
    pub mu_minus: Option<f64>,
    pub grids: Vec<usize>,
    /// GMRES tolerance on the max-norm residual.
    pub tol: f64,
    pub out: PathBuf,
    pub dump_fields: bool,
    pub dump_trace: bool,
    pub dump_jumps: bool,
    pub jobs: usize,
    /// Initial curve for `evolve`: a curve spec string or a CSV path.
    pub curve: Option<String>,
    pub t_final: Option<f64>,
    pub tension: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(mode: Mode, example: u8) -> Self {
        let grids = match mode {
            Mode::Converge => vec![64, 128, 256],
            _ => vec![128],
        };
        Self {
            mode,
            example,
            case: ViscosityCase::I,
            mu_plus: None,
            mu_minus: None,
            grids,
            tol: 1e-8,
            out: default_output_dir(mode, example),
            dump_fields: false,
            dump_trace: false,
            dump_jumps: false,
            jobs: 1,
            curve: None,
            t_final: None,
            tension: None,
        }
    }

    /// `(μ⁺, μ⁻)`: the case values unless overridden.
    pub fn viscosities(&self) -> (f64, f64) {
        let (p, m) = self.case.viscosities();
        (self.mu_plus.unwrap_or(p), self.mu_minus.unwrap_or(m))
    }

    /// Apply `key = value` lines; `#` starts a comment. Keys match the
    /// long command-line flags with `_` or `-`.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| KfbiError::Config(format!("line {}: expected key = value", k + 1)))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            let bad = |what: &str| KfbiError::Config(format!("line {}: invalid {what} `{value}`", k + 1));
            let flag = |v: &str| match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(bad("boolean")),
            };
            match key.as_str() {
                "example" => self.example = value.parse().map_err(|_| bad("example"))?,
                "case" => self.case = value.parse()?,
                "mu_plus" => self.mu_plus = Some(value.parse().map_err(|_| bad("viscosity"))?),
                "mu_minus" => self.mu_minus = Some(value.parse().map_err(|_| bad("viscosity"))?),
                "grid" | "grids" => {
                    self.grids = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|_| bad("grid size")))
                        .collect::<Result<_>>()?
                }
                "tol" => self.tol = value.parse().map_err(|_| bad("tolerance"))?,
                "out" => self.out = PathBuf::from(value),
                "dump_fields" => self.dump_fields = flag(value)?,
                "dump_trace" => self.dump_trace = flag(value)?,
                "dump_jumps" => self.dump_jumps = flag(value)?,
                "jobs" => self.jobs = value.parse().map_err(|_| bad("job count"))?,
                "curve" => self.curve = Some(value.to_string()),
                "t_final" => self.t_final = Some(value.parse().map_err(|_| bad("time"))?),
                "tension" => self.tension = Some(value.parse().map_err(|_| bad("tension"))?),
                _ => return Err(KfbiError::Config(format!("line {}: unknown key `{key}`", k + 1))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.example) {
            return Err(KfbiError::Config(format!("example must be 1..6, got {}", self.example)));
        }
        if self.grids.is_empty() {
            return Err(KfbiError::Config("no grid sizes given".into()));
        }
        if !(self.tol > 0.0) {
            return Err(KfbiError::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        let (p, m) = self.viscosities();
        if !(p > 0.0 && m > 0.0) {
            return Err(KfbiError::Config(format!("viscosities must be positive, got {p}, {m}")));
        }
        match self.mode {
            Mode::Converge if self.example > 2 => {
                Err(KfbiError::Config("convergence sweeps need an exact solution (example 1 or 2)".into()))
            }
            Mode::Evolve if self.example < 3 && self.curve.is_none() => {
                Err(KfbiError::Config("evolve runs examples 3..6 or a custom --curve".into()))
            }
            _ => Ok(()),
        }
    }

    fn options(&self) -> KfbiOptions {
        let mut o = KfbiOptions { cross_check: false, ..Default::default() };
        o.gmres.tol = self.tol;
        o
    }

    fn exact(&self) -> Option<ExactSolution> {
        let (p, m) = self.viscosities();
        match self.example {
            1 => Some(ExactSolution::new(ExactKind::Circle, p, m)),
            2 => Some(ExactSolution::new(ExactKind::Ellipse, p, m)),
            _ => None,
        }
    }
}

/// `$KFBI_OUTPUT_ROOT/<mode>-ex<id>`, or under `kfbi-out` when unset.
pub fn default_output_dir(mode: Mode, example: u8) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("kfbi-out"));
    root.join(format!("{}-ex{example}", mode.name()))
}

/// Result of one stationary solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub n: usize,
    /// Present for the examples with an exact solution.
    pub errors: Option<ErrorReport>,
    pub iterations: usize,
    pub seconds: f64,
}

fn write_solve_dumps(spec: &ExperimentSpec, dir: &Path, problem: &TwoPhaseProblem, sol: &TwoPhaseSolution) -> Result<()> {
    let grid = problem.grid();
    if spec.dump_fields {
        io::dump_field(dir, "field", grid, &sol.physical(problem))?;
    }
    if spec.dump_trace {
        io::write_text(&dir.join("trace.csv"), &sol.trace.to_csv(&problem.setup.curve))?;
        io::write_text(&dir.join("gmres.csv"), &io::residual_log_csv(&sol.state.history))?;
        io::write_text(&dir.join("curve.csv"), &io::curve_nodes_csv(&problem.setup.curve))?;
    }
    if spec.dump_jumps {
        io::write_text(&dir.join("jumps.csv"), &io::jumps_csv(&problem.setup.intersections, &sol.jumps))?;
    }
    Ok(())
}

/// Problem at grid size `n`: the exact-solution examples, or the tension
/// problem on the initial curve of a moving example.
fn stationary_problem(spec: &ExperimentSpec, n: usize) -> Result<TwoPhaseProblem> {
    if let Some(ex) = spec.exact() {
        return TwoPhaseProblem::from_exact(&ex, n);
    }
    let (cfg, points) = evolve_setup(spec)?;
    let cfg = SimulationConfig { n, ..cfg };
    let solver = StokesSolver::new(&cfg.grid()?);
    let (problem, _, _) = motion::solve_configuration(&cfg, &solver, &points, &spec.options())?;
    Ok(problem)
}

fn solve_one(spec: &ExperimentSpec, n: usize) -> Result<(SolveOutcome, TwoPhaseProblem, TwoPhaseSolution)> {
    let start = Instant::now();
    let problem = stationary_problem(spec, n)?;
    let sol = solve_two_phase(&problem, &spec.options())?;
    let errors = match spec.exact() {
        Some(ex) => Some(compute_errors(problem.grid(), &sol.physical(&problem), &ex.sample(problem.grid()), &problem.walls)?),
        None => None,
    };
    let outcome = SolveOutcome { n, errors, iterations: sol.state.iterations, seconds: start.elapsed().as_secs_f64() };
    Ok((outcome, problem, sol))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| KfbiError::Config(format!("thread pool: {e}")))
}

/// Solve at every grid size, writing dumps under `out/N<n>/` and, for the
/// exact-solution examples, an error table.
pub fn run_solve(spec: &ExperimentSpec) -> Result<Vec<SolveOutcome>> {
    spec.validate()?;
    let results: Vec<Result<SolveOutcome>> = pool(spec.jobs)?.install(|| {
        spec.grids
            .par_iter()
            .map(|&n| {
                let (outcome, problem, sol) = solve_one(spec, n)?;
                write_solve_dumps(spec, &spec.out.join(format!("N{n}")), &problem, &sol)?;
                info!("N={n}: {} GMRES iterations, {:.2}s", outcome.iterations, outcome.seconds);
                Ok(outcome)
            })
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<ConvergenceRow> = outcomes
        .iter()
        .filter_map(|o| o.errors.map(|errors| ConvergenceRow { n: o.n, errors, iterations: o.iterations }))
        .collect();
    if !rows.is_empty() {
        io::write_text(&spec.out.join("errors.csv"), &io::convergence_csv(&rows))?;
    }
    Ok(outcomes)
}

/// Convergence table over the grid list (sorted ascending), written to
/// `out/convergence.csv`. Rows up to the first failure are still written.
pub fn run_converge(spec: &ExperimentSpec) -> Result<Vec<ConvergenceRow>> {
    spec.validate()?;
    let mut grids = spec.grids.clone();
    grids.sort_unstable();
    grids.dedup();
    let results: Vec<Result<ConvergenceRow>> = pool(spec.jobs)?.install(|| {
        grids
            .par_iter()
            .map(|&n| {
                let (o, problem, sol) = solve_one(spec, n)?;
                if spec.dump_fields || spec.dump_trace || spec.dump_jumps {
                    write_solve_dumps(spec, &spec.out.join(format!("N{n}")), &problem, &sol)?;
                }
                info!("N={n}: {} GMRES iterations, {:.2}s", o.iterations, o.seconds);
                Ok(ConvergenceRow { n, errors: o.errors.expect("exact solution present"), iterations: o.iterations })
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failure = None;
    for r in results {
        match r {
            Ok(row) if failure.is_none() => rows.push(row),
            Ok(_) => {}
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    io::write_text(&spec.out.join("convergence.csv"), &io::convergence_csv(&rows))?;
    io::write_text(&spec.out.join("convergence_l2.csv"), &io::convergence_split_csv(&rows, NormFamily::L2))?;
    io::write_text(&spec.out.join("convergence_max.csv"), &io::convergence_split_csv(&rows, NormFamily::Max))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(rows),
    }
}

/// Simulation settings and initial control points for `spec`.
pub fn evolve_setup(spec: &ExperimentSpec) -> Result<(SimulationConfig, Vec<Vec2>)> {
    let base = if spec.example >= 3 { MovingExample::from_id(spec.example)? } else { MovingExample::Flower3 };
    let mut cfg = base.config();
    let points = match &spec.curve {
        None => base.initial_points(cfg.control_points)?,
        Some(c) => {
            let shape = if Path::new(c).is_file() { CurveShape::from_csv(Path::new(c))? } else { CurveShape::parse(c)? };
            crate::geometry::discretize_interface(&shape, cfg.control_points)?.positions()
        }
    };
    if spec.mu_plus.is_some() || spec.mu_minus.is_some() || spec.example < 3 {
        let (p, m) = spec.viscosities();
        cfg.mu_plus = p;
        cfg.mu_minus = m;
    }
    if let Some(&n) = spec.grids.first() {
        cfg.n = n;
        cfg.dt = (cfg.upper - cfg.lower) / n as f64;
    }
    if let Some(t) = spec.t_final {
        cfg.t_final = t;
    }
    if let Some(t) = spec.tension {
        cfg.tension = t;
    }
    cfg.keep_fields = spec.dump_fields;
    Ok((cfg, points))
}

/// Moving-interface run: `diagnostics.csv`, `snapshots/curve_t<time>.csv`
/// and, with field dumps, `snapshots/field_t<time>_*`. Outputs are written
/// even when the run stops early; check [`SimulationResult::aborted`].
pub fn run_evolve(spec: &ExperimentSpec) -> Result<SimulationResult> {
    spec.validate()?;
    let (cfg, points) = evolve_setup(spec)?;
    let grid = cfg.grid()?;
    let snaps = spec.out.join("snapshots");
    io::write_text(&snaps.join("curve_initial.csv"), &io::curve_csv(&points))?;
    let mut write_err = None;
    let result = motion::run_simulation(&cfg, &points, &spec.options(), |rec, snap| {
        if rec.step % 20 == 0 {
            info!("t={:.4} area={:.6} ratio={:.6} max|u|={:.3e}", rec.time, rec.area, rec.iso_ratio, rec.max_velocity);
        }
        if let Some(s) = snap {
            let stem = format!("t{:.4}", s.time);
            let mut r = io::write_text(&snaps.join(format!("curve_{stem}.csv")), &io::curve_csv(&s.points));
            if let (Ok(()), Some(f)) = (&r, &s.field) {
                r = io::dump_field(&snaps, &format!("field_{stem}"), &grid, f).map(|_| ());
            }
            if let Err(e) = r {
                write_err.get_or_insert(e);
            }
        }
    })?;
    io::write_text(&spec.out.join("diagnostics.csv"), &io::diagnostics_csv(&result.records))?;
    io::write_text(&snaps.join("curve_final.csv"), &io::curve_csv(&result.points))?;
    if let Some(e) = write_err {
        return Err(e);
    }
    if let Some(e) = &result.aborted {
        warn!("{e}");
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides_fields() {
        let mut s = ExperimentSpec::new(Mode::Converge, 1);
        s.apply_config("# sweep\nexample = 2\ncase = VI\ngrid = 32, 64\nmu-plus = 5 # override\ndump_trace = yes\n").unwrap();
        assert_eq!(s.example, 2);
        assert_eq!(s.grids, vec![32, 64]);
        assert_eq!(s.viscosities(), (5.0, 1.0));
        assert!(s.dump_trace);
        assert!(s.apply_config("colour = blue").is_err());
        assert!(s.apply_config("grid").is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ExperimentSpec::new(Mode::Converge, 3).validate().is_err());
        assert!(ExperimentSpec::new(Mode::Evolve, 1).validate().is_err());
        assert!(ExperimentSpec::new(Mode::Solve, 7).validate().is_err());
        let mut s = ExperimentSpec::new(Mode::Solve, 1);
        s.mu_minus = Some(-1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn evolve_defaults_follow_the_example() {
        let s = ExperimentSpec::new(Mode::Evolve, 4);
        let (cfg, pts) = evolve_setup(&s).unwrap();
        assert_eq!((cfg.mu_plus, cfg.mu_minus, cfg.t_final, cfg.tension), (1.0, 10.0, 2.0, 0.5));
        assert_eq!(pts.len(), 100);
        assert!((cfg.dt - 2.4 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn converge_writes_a_deterministic_table() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ExperimentSpec::new(Mode::Converge, 1);
        s.grids = vec![32, 16];
        s.jobs = 2;
        s.out = dir.path().join("a");
        let rows = run_converge(&s).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![16, 32]);
        let first = std::fs::read(s.out.join("convergence.csv")).unwrap();
        s.jobs = 1;
        run_converge(&s).unwrap();
        assert_eq!(first, std::fs::read(s.out.join("convergence.csv")).unwrap());
    }

    #[test]
    fn zero_final_time_keeps_the_initial_snapshot_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ExperimentSpec::new(Mode::Evolve, 3);
        s.grids = vec![64];
        s.t_final = Some(0.0);
        s.out = dir.path().to_path_buf();
        let r = run_evolve(&s).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.snapshots.len(), 1);
        assert!(dir.path().join("snapshots/curve_t0.0000.csv").exists());
        assert!(dir.path().join("diagnostics.csv").exists());
    }
}
