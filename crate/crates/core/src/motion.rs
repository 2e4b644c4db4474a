//! Interfaces driven by their own surface tension.
//!
//! Each step solves the stationary two-phase problem with the Laplace-Young
//! traction jump, moves the control points with the bilinearly interpolated
//! velocity (forward Euler), and now and then redistributes them evenly in
//! arclength on the current spline.

use std::f64::consts::PI;

use log::{debug, info};

use crate::error::{KfbiError, Result};
use crate::fast_solver::StokesSolver;
use crate::geometry::{discretize_interface, CurveShape, InterfaceCurve};
use crate::kfbi::{node_count, solve_two_phase, KfbiOptions, TwoPhaseProblem};
use crate::mac::{MacField, StaggeredGrid, WallData};
use crate::potentials::{InterfaceSetup, VolumeForce};
use crate::Vec2;

/// `[[μσn]] = -T0 κ n`: with the normal pointing out of the inner phase this
/// makes the inner pressure exceed the outer by `T0 κ`.
pub fn tension_jump(curve: &InterfaceCurve, t0: f64) -> Vec<Vec2> {
    curve.nodes().iter().map(|nd| -t0 * nd.curvature * nd.normal).collect()
}

/// `4πA / P²`, equal to one for a circle only.
pub fn isoperimetric_ratio(area: f64, perimeter: f64) -> f64 {
    4.0 * PI * area / (perimeter * perimeter)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Surface tension coefficient `T0`.
    pub tension: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Cells per direction.
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Steps between redistributions; 0 disables them.
    pub regrid_every: usize,
    pub control_points: usize,
    /// Times at which curve (and optionally field) snapshots are kept.
    pub snapshot_times: Vec<f64>,
    pub keep_fields: bool,
    /// Abort when a point would move further than this many cells.
    pub max_step_cells: f64,
}

impl SimulationConfig {
    pub fn grid(&self) -> Result<StaggeredGrid> {
        StaggeredGrid::new(self.lower, self.upper, self.n)
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(KfbiError::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) {
            return Err(KfbiError::Config(format!("final time must be non-negative, got {}", self.t_final)));
        }
        if !(self.mu_plus > 0.0 && self.mu_minus > 0.0) {
            return Err(KfbiError::Config("viscosities must be positive".into()));
        }
        if self.control_points < 8 {
            return Err(KfbiError::Config(format!("need at least 8 control points, got {}", self.control_points)));
        }
        self.grid().map(|_| ())
    }
}

/// The four moving-interface setups: two flowers, a heart and a kidney.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MovingExample {
    /// `r = 0.8 + 0.2 sin 3θ`.
    Flower3,
    /// `r = 0.8 + 0.2 sin 8θ`.
    Flower8,
    Heart,
    Kidney,
}

impl MovingExample {
    pub const ALL: [MovingExample; 4] = [Self::Flower3, Self::Flower8, Self::Heart, Self::Kidney];

    /// Examples are numbered 3 to 6 after the two stationary ones.
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            3 => Ok(Self::Flower3),
            4 => Ok(Self::Flower8),
            5 => Ok(Self::Heart),
            6 => Ok(Self::Kidney),
            _ => Err(KfbiError::Config(format!("moving-interface examples are 3..6, got {id}"))),
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Self::Flower3 => 3,
            Self::Flower8 => 4,
            Self::Heart => 5,
            Self::Kidney => 6,
        }
    }

    /// Domain (-1.2, 1.2)², 128 cells, Δt = h, 100 control points.
    pub fn config(self) -> SimulationConfig {
        let (tension, mu_plus, mu_minus, t_final, snaps): (f64, f64, f64, f64, &[f64]) = match self {
            Self::Flower3 => (0.5, 10.0, 1.0, 8.0, &[0.0, 0.748, 1.87, 3.74, 7.48]),
            Self::Flower8 => (0.5, 1.0, 10.0, 2.0, &[0.0, 0.187, 0.374, 0.748, 1.87]),
            Self::Heart => (1.0, 1.0, 10.0, 20.0, &[0.0, 0.374, 0.935, 3.74, 18.7]),
            Self::Kidney => (1.0, 10.0, 1.0, 8.0, &[0.0, 0.374, 0.935, 1.87, 7.48]),
        };
        let n = 128;
        SimulationConfig {
            tension,
            dt: 2.4 / n as f64,
            t_final,
            n,
            lower: -1.2,
            upper: 1.2,
            mu_plus,
            mu_minus,
            regrid_every: 10,
            control_points: 100,
            snapshot_times: snaps.to_vec(),
            keep_fields: false,
            max_step_cells: 0.5,
        }
    }

    /// `m` control points evenly spaced in arclength, counterclockwise.
    pub fn initial_points(self, m: usize) -> Result<Vec<Vec2>> {
        match self {
            Self::Flower3 | Self::Flower8 => {
                let k = if self == Self::Flower3 { 3 } else { 8 };
                let shape = CurveShape::Polar { center: Vec2::zeros(), r0: 0.8, amp: 0.2, k };
                Ok(discretize_interface(&shape, m)?.positions())
            }
            // A limaçon with an inner dimple, shifted to sit centered.
            Self::Heart => Ok(equal_arclength(
                |t| {
                    let th = 2.0 * PI * t;
                    let r = 0.6 - 0.36 * th.sin();
                    Vec2::new(r * th.cos(), r * th.sin() + 0.35)
                },
                m,
            )),
            // An ellipse whose upper side is pushed in.
            Self::Kidney => Ok(equal_arclength(
                |t| {
                    let th = 2.0 * PI * t;
                    Vec2::new(0.7 * th.cos(), 0.45 * th.sin() + 0.3 * th.cos().powi(2) - 0.05)
                },
                m,
            )),
        }
    }
}

/// `m` points at equal arclength along the closed curve `r(t)`, `t ∈ [0, 1)`,
/// measured on a fine polygon.
fn equal_arclength(r: impl Fn(f64) -> Vec2, m: usize) -> Vec<Vec2> {
    let fine = 64 * m;
    let pts: Vec<Vec2> = (0..=fine).map(|k| r(k as f64 / fine as f64)).collect();
    let mut s = vec![0.0; fine + 1];
    for k in 0..fine {
        s[k + 1] = s[k] + (pts[k + 1] - pts[k]).norm();
    }
    let total = s[fine];
    (0..m)
        .map(|i| {
            let target = total * i as f64 / m as f64;
            let k = s.partition_point(|&v| v <= target).clamp(1, fine) - 1;
            let w = (target - s[k]) / (s[k + 1] - s[k]);
            pts[k] + w * (pts[k + 1] - pts[k])
        })
        .collect()
}

/// Forward Euler step of the control points with the interpolated velocity.
pub fn advect(points: &[Vec2], field: &MacField, grid: &StaggeredGrid, walls: &WallData, dt: f64) -> Result<Vec<Vec2>> {
    points
        .iter()
        .map(|&x| {
            let u = field
                .velocity_at(grid, walls, x)
                .ok_or_else(|| KfbiError::Geometry(format!("control point ({:.4}, {:.4}) left the domain", x.x, x.y)))?;
            let y = x + dt * u;
            if grid.wall_distance(y) < 0.0 {
                return Err(KfbiError::Geometry(format!("control point moved out of the domain to ({:.4}, {:.4})", y.x, y.y)));
            }
            Ok(y)
        })
        .collect()
}

/// Re-sample `m` points evenly in arclength on the spline through `points`.
pub fn redistribute(points: &[Vec2], m: usize) -> Result<Vec<Vec2>> {
    let shape = CurveShape::from_control_points(points)?;
    Ok(discretize_interface(&shape, m)?.positions())
}

/// Diagnostics for the configuration at the start of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub area: f64,
    pub perimeter: f64,
    pub iso_ratio: f64,
    pub max_velocity: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub points: Vec<Vec2>,
    /// Velocity and physical pressure, when requested.
    pub field: Option<MacField>,
}

#[derive(Debug)]
pub struct SimulationResult {
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Control points after the last completed step.
    pub points: Vec<Vec2>,
    /// Set when the run stopped early; everything above is kept.
    pub aborted: Option<KfbiError>,
}

/// One stationary solve with the tension jump at the current configuration.
pub fn solve_configuration(
    cfg: &SimulationConfig,
    solver: &StokesSolver,
    points: &[Vec2],
    opts: &KfbiOptions,
) -> Result<(TwoPhaseProblem, MacField, usize)> {
    let grid = *solver.grid();
    let shape = CurveShape::from_control_points(points)?;
    // a multiple of four keeps a curve with the grid's quarter-turn symmetry
    // symmetric: node 0 sits on the first control point
    let m = node_count(&shape, grid.h())?.next_multiple_of(4);
    let curve = discretize_interface(&shape, m)?;
    let setup = InterfaceSetup::with_solver(solver.clone(), curve)?;
    let g = tension_jump(&setup.curve, cfg.tension);
    let problem = TwoPhaseProblem::new(setup, cfg.mu_plus, cfg.mu_minus, VolumeForce::zero(), g, WallData::zeros(&grid))?;
    let sol = solve_two_phase(&problem, opts)?;
    let field = sol.physical(&problem);
    Ok((problem, field, sol.state.iterations))
}

/// Run the time loop from `initial` control points. `observer` sees every
/// step record and any snapshot taken at that step.
pub fn run_simulation(
    cfg: &SimulationConfig,
    initial: &[Vec2],
    opts: &KfbiOptions,
    mut observer: impl FnMut(&StepRecord, Option<&Snapshot>),
) -> Result<SimulationResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let solver = StokesSolver::new(&grid);
    let walls = WallData::zeros(&grid);
    let mut points = initial.to_vec();
    let mut out = SimulationResult { records: Vec::new(), snapshots: Vec::new(), points: points.clone(), aborted: None };
    let mut pending: Vec<f64> = cfg.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let steps = cfg.steps();
    for step in 0..=steps {
        let time = (step as f64 * cfg.dt).min(cfg.t_final);
        let (problem, field, iterations) = match solve_configuration(cfg, &solver, &points, opts) {
            Ok(r) => r,
            Err(e) => {
                out.aborted = Some(KfbiError::Simulation { time, reason: e.to_string() });
                break;
            }
        };
        let curve = &problem.setup.curve;
        let (area, perimeter) = (curve.area(), curve.length());
        let record = StepRecord {
            step,
            time,
            area,
            perimeter,
            iso_ratio: isoperimetric_ratio(area, perimeter),
            max_velocity: field.max_velocity(),
            iterations,
        };
        let mut snap = None;
        while pending.last().is_some_and(|&ts| ts <= time + 0.5 * cfg.dt) {
            pending.pop();
            if snap.is_none() {
                snap = Some(Snapshot {
                    time,
                    points: points.clone(),
                    field: cfg.keep_fields.then(|| field.clone()),
                });
            }
        }
        debug!(
            "step {step} t={time:.4} area={area:.6} ratio={:.6} max|u|={:.3e} ({iterations} its)",
            record.iso_ratio, record.max_velocity
        );
        observer(&record, snap.as_ref());
        out.records.push(record);
        out.snapshots.extend(snap);
        if step == steps {
            break;
        }

        // the last step is shortened to end on t_final
        let dt = ((step + 1) as f64 * cfg.dt).min(cfg.t_final) - time;
        let next = match advect(&points, &field, &grid, &walls, dt) {
            Ok(p) => p,
            Err(e) => {
                out.aborted = Some(KfbiError::Simulation { time, reason: e.to_string() });
                break;
            }
        };
        let moved = points.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if moved > cfg.max_step_cells * grid.h() {
            out.aborted = Some(KfbiError::Simulation {
                time,
                reason: format!("a control point moved {:.3} cells in one step", moved / grid.h()),
            });
            break;
        }
        points = next;
        if cfg.regrid_every > 0 && (step + 1) % cfg.regrid_every == 0 {
            points = match redistribute(&points, cfg.control_points) {
                Ok(p) => p,
                Err(e) => {
                    out.aborted = Some(KfbiError::Simulation { time, reason: e.to_string() });
                    break;
                }
            };
        }
        out.points = points.clone();
    }
    if let Some(e) = &out.aborted {
        info!("simulation stopped early: {e}");
    }
    Ok(out)
}
