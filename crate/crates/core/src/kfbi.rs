//! Two-phase Stokes solver: boundary integral equation for the traction-jump
//! density, with every layer potential evaluated by a grid solve.
//!
//! In scaled variables `p = p̃/μ`, `f = f̃/μ` the velocity is
//! `u = u_d + G f + S ψ`, where `u_d` lifts the wall data, and `ψ` solves
//!
//! ```text
//! ½ψ + γ M*ψ = ĝ - γ T(G f),   γ = (μ⁺-μ⁻)/(μ⁺+μ⁻),   ĝ = g/(μ⁺+μ⁻)
//! ```
//!
//! with `M*ψ` and `T(G f)` the mean of the two one-sided tractions of the
//! corresponding potentials.

use std::str::FromStr;
use std::time::Instant;

use log::{debug, info, warn};
use nalgebra::DMatrix;

use crate::error::{KfbiError, Result};
use crate::exact::{ExactKind, ExactSolution, Side};
use crate::fast_solver::{SaddleOptions, SaddleRHS, StokesSolver};
use crate::geometry::{discretize_interface, CurveShape};
use crate::gmres::{gmres, GmresOptions};
use crate::jumps::{DensityPair, JumpSet, JumpTable};
use crate::mac::{Component, MacField, StaggeredGrid, WallClosure, WallData};
use crate::potentials::{solve_unified_interface, BoundaryTrace, Extraction, InterfaceSetup, TraceSide, VolumeForce};
use crate::Vec2;

/// The six viscosity pairs `(μ⁺, μ⁻)` of the convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViscosityCase {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl ViscosityCase {
    pub const ALL: [ViscosityCase; 6] = [Self::I, Self::II, Self::III, Self::IV, Self::V, Self::VI];

    pub fn viscosities(self) -> (f64, f64) {
        match self {
            Self::I => (1.0, 10.0),
            Self::II => (1.0, 100.0),
            Self::III => (1.0, 1000.0),
            Self::IV => (10.0, 1.0),
            Self::V => (100.0, 1.0),
            Self::VI => (1000.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        ["I", "II", "III", "IV", "V", "VI"][self as usize]
    }
}

impl FromStr for ViscosityCase {
    type Err = KfbiError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        Self::ALL
            .iter()
            .enumerate()
            .find(|(i, c)| c.name() == t || (i + 1).to_string() == t)
            .map(|(_, c)| *c)
            .ok_or_else(|| KfbiError::Config(format!("unknown viscosity case `{s}` (expected I..VI)")))
    }
}

/// A two-phase problem on a fixed interface.
#[derive(Debug, Clone)]
pub struct TwoPhaseProblem {
    pub setup: InterfaceSetup,
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Physical body force per side.
    pub force: VolumeForce,
    /// `[[μσn]]` at the curve nodes.
    pub g: Vec<Vec2>,
    pub walls: WallData,
}

impl TwoPhaseProblem {
    pub fn new(
        setup: InterfaceSetup,
        mu_plus: f64,
        mu_minus: f64,
        force: VolumeForce,
        g: Vec<Vec2>,
        walls: WallData,
    ) -> Result<Self> {
        if !(mu_plus > 0.0 && mu_minus > 0.0 && mu_plus.is_finite() && mu_minus.is_finite()) {
            return Err(KfbiError::Config(format!("viscosities must be positive, got {mu_plus}, {mu_minus}")));
        }
        if g.len() != setup.curve.len() {
            return Err(KfbiError::Config(format!("g has {} values for {} nodes", g.len(), setup.curve.len())));
        }
        let p = Self { setup, mu_plus, mu_minus, force, g, walls };
        p.check_compatibility()?;
        Ok(p)
    }

    pub fn grid(&self) -> &StaggeredGrid {
        self.setup.grid()
    }

    pub fn gamma(&self) -> f64 {
        (self.mu_plus - self.mu_minus) / (self.mu_plus + self.mu_minus)
    }

    pub fn mu(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.mu_plus,
            Side::Minus => self.mu_minus,
        }
    }

    /// `f̃/μ` per side.
    pub fn scaled_force(&self) -> VolumeForce {
        self.force.scaled(self.mu_plus, self.mu_minus)
    }

    /// Net wall flux must vanish for the lift to exist.
    pub fn check_compatibility(&self) -> Result<()> {
        let grid = self.grid();
        let flux = self.walls.net_flux(grid);
        let umax = [
            &self.walls.u1_left,
            &self.walls.u1_right,
            &self.walls.u2_bottom,
            &self.walls.u2_top,
        ]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
        if flux.abs() > 1e-10 * (4.0 * grid.length() * umax).max(1.0) {
            return Err(KfbiError::Compatibility(flux));
        }
        Ok(())
    }

    /// Problem with an exact solution; see [`node_count`] for the interface
    /// resolution.
    pub fn from_exact(ex: &ExactSolution, n: usize) -> Result<Self> {
        Self::from_exact_with(ex, n, WallClosure::default(), Extraction::default())
    }

    pub fn from_exact_with(ex: &ExactSolution, n: usize, closure: WallClosure, extraction: Extraction) -> Result<Self> {
        let (lo, hi) = ex.domain();
        let grid = StaggeredGrid::new(lo, hi, n)?.with_closure(closure);
        let shape = match ex.kind {
            ExactKind::Circle => CurveShape::circle(Vec2::zeros(), 1.0),
            ExactKind::Ellipse => CurveShape::Ellipse { center: Vec2::zeros(), a: 1.0, b: 0.5 },
        };
        let m = node_count(&shape, grid.h())?;
        let curve = discretize_interface(&shape, m)?;
        let setup = InterfaceSetup::with_extraction(StokesSolver::new(&grid), curve, extraction)?;
        let g = setup.curve.nodes().iter().map(|nd| ex.traction_jump(nd.pos, nd.normal)).collect();
        let exf = *ex;
        let force = VolumeForce::new(move |side, x| exf.force(side, x));
        Self::new(setup, ex.mu_plus, ex.mu_minus, force, g, ex.walls(&grid))
    }
}

/// Interface nodes at spacing `2h`, refined where needed so that spacing
/// times the largest curvature stays below one half; at least 16.
///
/// Spacing the densities at one cell leaves grid-scale density modes that
/// the grid cannot resolve. They scatter the spectrum of the discrete
/// operator and cost GMRES iterations without improving accuracy.
pub fn node_count(shape: &CurveShape, h: f64) -> Result<usize> {
    let probe = discretize_interface(shape, 256)?;
    let spacing = (NODE_SPACING * h).min(0.5 / probe.max_curvature().max(1e-300));
    Ok(((probe.length() / spacing).ceil() as usize).max(16))
}

/// Interface node spacing in cells.
pub const NODE_SPACING: f64 = 2.0;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KfbiOptions {
    pub gmres: GmresOptions,
    pub saddle: SaddleOptions,
    /// Compare `M*ψ` with `σ⁺n - ½ψ` on every operator application.
    pub cross_check: bool,
}

impl Default for KfbiOptions {
    fn default() -> Self {
        Self { gmres: GmresOptions::default(), saddle: SaddleOptions::default(), cross_check: cfg!(debug_assertions) }
    }
}

/// Converged density and GMRES record.
#[derive(Debug, Clone, PartialEq)]
pub struct BieState {
    pub psi: Vec<Vec2>,
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Wall-data lift and the corrected traction-jump data.
#[derive(Debug, Clone)]
pub struct Lift {
    pub field: MacField,
    pub g_corrected: Vec<Vec2>,
}

fn flatten(v: &[Vec2]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn unflatten(x: &[f64]) -> Vec<Vec2> {
    x.chunks(2).map(|c| Vec2::new(c[0], c[1])).collect()
}

/// Solve the single-fluid problem with the wall data and subtract its
/// traction jump `(μ⁺ - μ⁻) σ(u_d, p_d) n` from `g`.
pub fn boundary_lift(problem: &TwoPhaseProblem, opts: &KfbiOptions) -> Result<Lift> {
    let grid = problem.grid();
    if problem.walls.is_zero() {
        return Ok(Lift { field: MacField::zeros(grid), g_corrected: problem.g.clone() });
    }
    problem.check_compatibility()?;
    let mut rhs = SaddleRHS::zeros(grid);
    rhs.fold_walls(grid, &problem.walls);
    let (field, _) = problem.setup.solver.solve(&rhs, &opts.saddle)?;
    let zero = vec![JumpSet::default(); problem.setup.curve.len()];
    let trace = problem.setup.extract_trace(&field, &zero)?;
    let dmu = problem.mu_plus - problem.mu_minus;
    let g_corrected = problem
        .g
        .iter()
        .zip(&trace.nodes)
        .map(|(g, t)| g - dmu * t.traction(TraceSide::Average))
        .collect();
    Ok(Lift { field, g_corrected })
}

/// `ĝ - γ T(G f, φ)` from corrected jump data `g`.
pub fn assemble_rhs(problem: &TwoPhaseProblem, g: &[Vec2], phi: Option<&[Vec2]>, opts: &KfbiOptions) -> Result<Vec<Vec2>> {
    let s = problem.mu_plus + problem.mu_minus;
    let gamma = problem.gamma();
    let mut rhs: Vec<Vec2> = g.iter().map(|v| v / s).collect();
    let phi_zero = phi.is_none_or(|p| p.iter().all(|v| v.x == 0.0 && v.y == 0.0));
    if gamma == 0.0 || (problem.force.is_zero() && phi_zero) {
        return Ok(rhs);
    }
    let curve = &problem.setup.curve;
    let zeros = vec![Vec2::zeros(); curve.len()];
    let dens = DensityPair::new(curve, phi.map_or(zeros.clone(), <[Vec2]>::to_vec), zeros)?;
    let sol = solve_unified_interface(&problem.setup, &problem.scaled_force(), &dens, &opts.saddle)?;
    let tr = sol.trace(&problem.setup)?;
    for (r, t) in rhs.iter_mut().zip(&tr.nodes) {
        *r -= gamma * t.traction(TraceSide::Average);
    }
    Ok(rhs)
}

/// `½ψ + γ M*ψ`.
pub fn bie_apply(problem: &TwoPhaseProblem, psi: &[Vec2], opts: &KfbiOptions) -> Result<Vec<Vec2>> {
    let gamma = problem.gamma();
    if gamma == 0.0 {
        return Ok(psi.iter().map(|v| 0.5 * v).collect());
    }
    let curve = &problem.setup.curve;
    let dens = DensityPair::new(curve, vec![Vec2::zeros(); curve.len()], psi.to_vec())?;
    let sol = solve_unified_interface(&problem.setup, &VolumeForce::zero(), &dens, &opts.saddle)?;
    let tr = sol.trace(&problem.setup)?;
    if opts.cross_check {
        let scale = psi.iter().fold(1.0f64, |m, v| m.max(v.amax()));
        for (t, p) in tr.nodes.iter().zip(psi) {
            let alt = t.traction_plus - 0.5 * p;
            let d = (alt - t.traction(TraceSide::Average)).amax();
            if d > 1e-9 * scale {
                return Err(KfbiError::Extraction(format!("mean traction and σ⁺n - ψ/2 differ by {d:.3e}")));
            }
        }
    }
    Ok(psi.iter().zip(&tr.nodes).map(|(p, t)| 0.5 * p + gamma * t.traction(TraceSide::Average)).collect())
}

/// Dense matrix of `½I + γM*` acting on `[ψ₁, ψ₂]` interleaved per node.
pub fn assemble_dense(problem: &TwoPhaseProblem, opts: &KfbiOptions) -> Result<DMatrix<f64>> {
    let n = 2 * problem.setup.curve.len();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = flatten(&bie_apply(problem, &unflatten(&e), opts)?);
        a.set_column(j, &nalgebra::DVector::from_vec(col));
        e[j] = 0.0;
    }
    Ok(a)
}

/// Result of a two-phase solve.
#[derive(Debug, Clone)]
pub struct TwoPhaseSolution {
    /// Velocity and scaled pressure `p = p̃/μ`.
    pub field: MacField,
    pub trace: BoundaryTrace,
    pub state: BieState,
    pub lift: Lift,
    /// Right-hand side of the boundary integral equation.
    pub rhs: Vec<Vec2>,
    /// Jumps at curve nodes of the final unified solve.
    pub node_jumps: Vec<JumpSet>,
    /// Jumps at the grid-line crossings of the final unified solve.
    pub jumps: JumpTable,
    pub seconds: f64,
}

impl TwoPhaseSolution {
    /// Field with the physical pressure `p̃ = μ p`, mean removed.
    pub fn physical(&self, problem: &TwoPhaseProblem) -> MacField {
        let mut f = self.field.clone();
        let sides = &problem.setup.classification.sides;
        for ((i, j), v) in f.p.indexed_iter_mut() {
            *v *= problem.mu(sides.side_of(Component::P, i, j));
        }
        f.remove_pressure_mean();
        f
    }
}

/// Lift, right-hand side, GMRES, then one unified solve with all densities.
pub fn solve_two_phase(problem: &TwoPhaseProblem, opts: &KfbiOptions) -> Result<TwoPhaseSolution> {
    let start = Instant::now();
    let lift = boundary_lift(problem, opts)?;
    let rhs = assemble_rhs(problem, &lift.g_corrected, None, opts)?;
    let x0 = flatten(&lift.g_corrected);
    let b = flatten(&rhs);
    let res = gmres(|x| bie_apply(problem, &unflatten(x), opts).map(|v| flatten(&v)), &b, &x0, &opts.gmres)?;
    let psi = unflatten(&res.x);
    info!(
        "BIE converged in {} GMRES iterations (residual {:.2e}), γ = {:.4}",
        res.iterations,
        res.residual(),
        problem.gamma()
    );
    let curve = &problem.setup.curve;
    let dens = DensityPair::new(curve, vec![Vec2::zeros(); curve.len()], psi.clone())?;
    let sol = solve_unified_interface(&problem.setup, &problem.scaled_force(), &dens, &opts.saddle)?;
    let trace = sol.trace(&problem.setup)?;
    let mut field = sol.field;
    field.add_assign(&lift.field);
    if sol.stats.div_mean_removed.abs() > 1e-6 {
        warn!("divergence data had mean {:.3e}; projected out", sol.stats.div_mean_removed);
    } else if sol.stats.div_mean_removed != 0.0 {
        debug!("divergence data had mean {:.3e}; projected out", sol.stats.div_mean_removed);
    }
    let seconds = start.elapsed().as_secs_f64();
    debug!("two-phase solve took {seconds:.2}s");
    Ok(TwoPhaseSolution {
        field,
        trace,
        state: BieState { psi, history: res.history, iterations: res.iterations },
        lift,
        rhs,
        node_jumps: sol.node_jumps,
        jumps: sol.jumps,
        seconds,
    })
}

/// `max |½ψ + γM*ψ - rhs|` evaluated afresh.
pub fn residual_certificate(problem: &TwoPhaseProblem, sol: &TwoPhaseSolution, opts: &KfbiOptions) -> Result<f64> {
    let ap = bie_apply(problem, &sol.state.psi, opts)?;
    Ok(ap.iter().zip(&sol.rhs).fold(0.0, |m, (a, b)| m.max((a - b).amax())))
}
