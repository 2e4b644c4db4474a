//! Fast solvers for the MAC Stokes system with all-Dirichlet walls.
//!
//! Velocity solves diagonalize the five-point operator with a sine
//! transform along the direction where the unknowns of a component sit on
//! grid lines, then solve a tridiagonal system per mode along the staggered
//! direction. The saddle point system is solved by iterating on the
//! pressure Schur complement: conjugate gradients when the wall closure
//! keeps it symmetric, restarted GMRES otherwise.

use std::sync::Arc;

use log::debug;
use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{KfbiError, Result};
use crate::gmres::{gmres, GmresOptions};
use crate::mac::ops::{padded_u1, padded_u2};
use crate::mac::{MacField, StaggeredGrid, WallClosure, WallData};

/// Direct solver for `-Δ_h w = rhs` on either velocity layout with
/// homogeneous Dirichlet closure.
#[derive(Clone)]
pub struct PoissonSolver {
    n: usize,
    h: f64,
    closure: WallClosure,
    fft: Arc<dyn Fft<f64>>,
    /// `h² λ_k` for `k = 1..N-1`.
    eig: Vec<f64>,
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver").field("n", &self.n).field("h", &self.h).finish()
    }
}

impl PoissonSolver {
    pub fn new(grid: &StaggeredGrid) -> Self {
        let n = grid.n();
        let fft = FftPlanner::new().plan_fft_forward(2 * n);
        let eig = (1..n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * n as f64)).sin();
                4.0 * s * s
            })
            .collect();
        Self { n, h: grid.h(), closure: grid.closure(), fft, eig }
    }

    /// `S(k) = sum_{j=1}^{N-1} x_j sin(pi j k / N)` applied along axis 0 of
    /// an `(N-1) x ncol` array, two columns per complex transform.
    pub fn dst1_columns(&self, data: &mut Array2<f64>) {
        let n = self.n;
        let len = 2 * n;
        let (m, ncol) = data.dim();
        debug_assert_eq!(m, n - 1);
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut c = 0;
        while c < ncol {
            let pair = c + 1 < ncol;
            buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
            for j in 1..n {
                let re = data[[j - 1, c]];
                let im = if pair { data[[j - 1, c + 1]] } else { 0.0 };
                buf[j] = Complex::new(re, im);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 1..n {
                let zk = buf[k];
                let zr = buf[len - k];
                data[[k - 1, c]] = -0.5 * (zk.im - zr.im);
                if pair {
                    data[[k - 1, c + 1]] = 0.5 * (zk.re - zr.re);
                }
            }
            c += 2;
        }
    }

    /// Solve on the `u1` layout, `(N-1) x N`.
    pub fn solve_u1(&self, rhs: &Array2<f64>) -> Array2<f64> {
        let n = self.n;
        let h2 = self.h * self.h;
        let mut t = rhs.clone();
        self.dst1_columns(&mut t);
        // rows touching a tangential wall absorb the ghost
        let (end_diag, end_off) = match self.closure {
            WallClosure::Reflection => (3.0, -1.0),
            WallClosure::Quadratic => (4.0, -4.0 / 3.0),
        };
        let sub = |j: usize| if j == n - 1 { end_off } else { -1.0 };
        let sup = |j: usize| if j == 0 { end_off } else { -1.0 };
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        for k in 0..n - 1 {
            let lam = self.eig[k];
            let diag = |j: usize| if j == 0 || j == n - 1 { end_diag + lam } else { 2.0 + lam };
            let mut denom = diag(0);
            cp[0] = sup(0) / denom;
            dp[0] = h2 * t[[k, 0]] / denom;
            for j in 1..n {
                denom = diag(j) - sub(j) * cp[j - 1];
                cp[j] = sup(j) / denom;
                dp[j] = (h2 * t[[k, j]] - sub(j) * dp[j - 1]) / denom;
            }
            t[[k, n - 1]] = dp[n - 1];
            for j in (0..n - 1).rev() {
                t[[k, j]] = dp[j] - cp[j] * t[[k, j + 1]];
            }
        }
        self.dst1_columns(&mut t);
        t *= 2.0 / n as f64;
        t
    }

    /// Solve on the `u2` layout, `N x (N-1)`.
    pub fn solve_u2(&self, rhs: &Array2<f64>) -> Array2<f64> {
        let t = rhs.t().to_owned();
        self.solve_u1(&t).t().to_owned()
    }
}

/// Right-hand sides of `-Δ_h u + δ⁺ p = F`, `δ⁻ · u = R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleRHS {
    pub rhs_u1: Array2<f64>,
    pub rhs_u2: Array2<f64>,
    pub rhs_div: Array2<f64>,
}

impl SaddleRHS {
    pub fn zeros(grid: &StaggeredGrid) -> Self {
        Self {
            rhs_u1: Array2::zeros(grid.u1_shape()),
            rhs_u2: Array2::zeros(grid.u2_shape()),
            rhs_div: Array2::zeros(grid.p_shape()),
        }
    }

    /// Move the wall data to the right-hand side so the system can be solved
    /// with homogeneous closure.
    pub fn fold_walls(&mut self, grid: &StaggeredGrid, walls: &WallData) {
        let ih2 = 1.0 / (grid.h() * grid.h());
        let ih = 1.0 / grid.h();
        let p1 = padded_u1(&Array2::zeros(grid.u1_shape()), walls, grid);
        let p2 = padded_u2(&Array2::zeros(grid.u2_shape()), walls, grid);
        for ((i, j), v) in self.rhs_u1.indexed_iter_mut() {
            *v += (p1[[i + 2, j + 1]] + p1[[i, j + 1]] + p1[[i + 1, j + 2]] + p1[[i + 1, j]]) * ih2;
        }
        for ((i, j), v) in self.rhs_u2.indexed_iter_mut() {
            *v += (p2[[i + 2, j + 1]] + p2[[i, j + 1]] + p2[[i + 1, j + 2]] + p2[[i + 1, j]]) * ih2;
        }
        for ((i, j), v) in self.rhs_div.indexed_iter_mut() {
            *v -= (p1[[i + 1, j + 1]] - p1[[i, j + 1]] + p2[[i + 1, j + 1]] - p2[[i + 1, j]]) * ih;
        }
    }
}

/// Settings of the Schur-complement iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleOptions {
    /// Relative max-norm tolerance on the Schur residual.
    pub tol: f64,
    /// Iteration cap; `None` means `10 N`.
    pub max_iter: Option<usize>,
    /// Krylov dimension of the restarted GMRES used for the nonsymmetric
    /// Schur complement.
    pub restart: usize,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: None, restart: 60 }
    }
}

/// What one saddle solve did.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SaddleStats {
    pub iterations: usize,
    /// Max-norm Schur residual after each iteration.
    pub history: Vec<f64>,
    /// Mean removed from the divergence right-hand side.
    pub div_mean_removed: f64,
    /// Max-norm residual of the three MAC equations, recomputed after the
    /// solve.
    pub residual: f64,
    /// Normwise backward error `|r| / (|K| |x| + |b|)` in the max norm.
    pub backward_error: f64,
}

/// Homogeneous-wall gradient `δ⁺ p` on the two velocity layouts.
pub fn gradient(grid: &StaggeredGrid, p: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let ih = 1.0 / grid.h();
    let gx = Array2::from_shape_fn(grid.u1_shape(), |(i, j)| (p[[i + 1, j]] - p[[i, j]]) * ih);
    let gy = Array2::from_shape_fn(grid.u2_shape(), |(i, j)| (p[[i, j + 1]] - p[[i, j]]) * ih);
    (gx, gy)
}

/// Homogeneous-wall divergence `δ⁻ · u` at cell centers.
pub fn divergence(grid: &StaggeredGrid, u1: &Array2<f64>, u2: &Array2<f64>) -> Array2<f64> {
    let n = grid.n();
    let ih = 1.0 / grid.h();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let e = if i < n - 1 { u1[[i, j]] } else { 0.0 };
        let w = if i > 0 { u1[[i - 1, j]] } else { 0.0 };
        let t = if j < n - 1 { u2[[i, j]] } else { 0.0 };
        let s = if j > 0 { u2[[i, j - 1]] } else { 0.0 };
        (e - w + t - s) * ih
    })
}

/// Homogeneous-wall `-Δ_h` on a velocity layout.
pub fn neg_laplacian(grid: &StaggeredGrid, u: &Array2<f64>) -> Array2<f64> {
    let (nx, ny) = u.dim();
    let ih2 = 1.0 / (grid.h() * grid.h());
    let closure = grid.closure();
    let is_u1 = nx + 1 == ny;
    let at = |i: usize, j: usize| u[[i, j]];
    Array2::from_shape_fn((nx, ny), |(i, j)| {
        let c = u[[i, j]];
        // normal direction: the wall value is zero; tangential: a ghost from
        // the closure, with `inner` the next interior value inward
        let side = |inside: bool, v: f64, normal: bool, inner: f64| {
            if inside {
                v
            } else if normal {
                0.0
            } else {
                closure.ghost(0.0, c, inner)
            }
        };
        let w = side(i > 0, if i > 0 { at(i - 1, j) } else { 0.0 }, is_u1, if i + 1 < nx { at(i + 1, j) } else { 0.0 });
        let e = side(i + 1 < nx, if i + 1 < nx { at(i + 1, j) } else { 0.0 }, is_u1, if i > 0 { at(i - 1, j) } else { 0.0 });
        let s = side(j > 0, if j > 0 { at(i, j - 1) } else { 0.0 }, !is_u1, if j + 1 < ny { at(i, j + 1) } else { 0.0 });
        let t = side(j + 1 < ny, if j + 1 < ny { at(i, j + 1) } else { 0.0 }, !is_u1, if j > 0 { at(i, j - 1) } else { 0.0 });
        (4.0 * c - w - e - s - t) * ih2
    })
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |s, x, y| s + x * y)
}

fn remove_mean(a: &mut Array2<f64>) -> f64 {
    let m = a.mean().unwrap_or(0.0);
    a.mapv_inplace(|v| v - m);
    m
}

/// Saddle point solver bound to one grid.
#[derive(Debug, Clone)]
pub struct StokesSolver {
    grid: StaggeredGrid,
    poisson: PoissonSolver,
}

impl StokesSolver {
    pub fn new(grid: &StaggeredGrid) -> Self {
        Self { grid: *grid, poisson: PoissonSolver::new(grid) }
    }

    pub fn grid(&self) -> &StaggeredGrid {
        &self.grid
    }

    pub fn poisson(&self) -> &PoissonSolver {
        &self.poisson
    }

    fn velocity_for(&self, f1: &Array2<f64>, f2: &Array2<f64>, p: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let (gx, gy) = gradient(&self.grid, p);
        (self.poisson.solve_u1(&(f1 - &gx)), self.poisson.solve_u2(&(f2 - &gy)))
    }

    /// `S p = δ⁻ A⁻¹ (-δ⁺ p)`. Symmetric positive semidefinite under the
    /// reflection closure; the quadratic closure breaks the symmetry of `A`.
    pub fn schur_apply(&self, p: &Array2<f64>) -> Array2<f64> {
        let (gx, gy) = gradient(&self.grid, p);
        let v1 = self.poisson.solve_u1(&gx);
        let v2 = self.poisson.solve_u2(&gy);
        -divergence(&self.grid, &v1, &v2)
    }

    /// Solve the MAC system with homogeneous walls. Fold nonzero wall data
    /// in with [`SaddleRHS::fold_walls`] first.
    pub fn solve(&self, rhs: &SaddleRHS, opts: &SaddleOptions) -> Result<(MacField, SaddleStats)> {
        let grid = &self.grid;
        let n = grid.n();
        let max_iter = opts.max_iter.unwrap_or(10 * n);
        let mut rdiv = rhs.rhs_div.clone();
        let div_mean_removed = remove_mean(&mut rdiv);

        let a1 = self.poisson.solve_u1(&rhs.rhs_u1);
        let a2 = self.poisson.solve_u2(&rhs.rhs_u2);
        let mut b = &rdiv - &divergence(grid, &a1, &a2);
        remove_mean(&mut b);
        let bnorm = max_abs(&b);

        let (mut p, iterations, history) = if bnorm == 0.0 {
            (Array2::zeros(grid.p_shape()), 0, Vec::new())
        } else {
            match grid.closure() {
                WallClosure::Reflection => self.schur_cg(&b, opts.tol * bnorm, max_iter)?,
                WallClosure::Quadratic => self.schur_gmres(&b, opts.tol * bnorm, max_iter, opts.restart)?,
            }
        };
        remove_mean(&mut p);
        let (u1, u2) = self.velocity_for(&rhs.rhs_u1, &rhs.rhs_u2, &p);
        let field = MacField { u1, u2, p };

        let (residual, backward_error) = self.certificate(&field, &rhs.rhs_u1, &rhs.rhs_u2, &rdiv);
        debug!(
            "saddle solve N={n}: {iterations} Schur iterations, residual {residual:.3e}, backward error {backward_error:.3e}"
        );
        let stats = SaddleStats { iterations, history, div_mean_removed, residual, backward_error };
        if backward_error > opts.tol.max(1e-14) {
            return Err(KfbiError::SaddleConvergence {
                iterations,
                residual: backward_error,
                tol: opts.tol,
                history: stats.history,
            });
        }
        Ok((field, stats))
    }

    /// Conjugate gradients on the mean-free pressure space.
    fn schur_cg(&self, b: &Array2<f64>, target: f64, max_iter: usize) -> Result<(Array2<f64>, usize, Vec<f64>)> {
        let mut p = Array2::zeros(self.grid.p_shape());
        let mut history = Vec::new();
        let mut iterations = 0;
        let mut r = b.clone();
        let mut d = r.clone();
        let mut rr = dot(&r, &r);
        loop {
            if iterations >= max_iter {
                let residual = *history.last().unwrap_or(&max_abs(b));
                return Err(KfbiError::SaddleConvergence { iterations, residual, tol: target, history });
            }
            iterations += 1;
            let sd = self.schur_apply(&d);
            let alpha = rr / dot(&d, &sd);
            p.scaled_add(alpha, &d);
            r.scaled_add(-alpha, &sd);
            remove_mean(&mut r);
            let res = max_abs(&r);
            history.push(res);
            if res <= target {
                return Ok((p, iterations, history));
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            d = &r + &(beta * &d);
        }
    }

    /// Restarted GMRES on the mean-free pressure space.
    fn schur_gmres(
        &self,
        b: &Array2<f64>,
        target: f64,
        max_iter: usize,
        restart: usize,
    ) -> Result<(Array2<f64>, usize, Vec<f64>)> {
        let shape = self.grid.p_shape();
        let apply = |x: &[f64]| -> Result<Vec<f64>> {
            let mut p = Array2::from_shape_vec(shape, x.to_vec()).expect("pressure shape");
            remove_mean(&mut p);
            let mut s = self.schur_apply(&p);
            remove_mean(&mut s);
            Ok(s.iter().copied().collect())
        };
        let flat: Vec<f64> = b.iter().copied().collect();
        let opts = GmresOptions { tol: target, max_iter, restart: Some(restart.max(1)) };
        let r = gmres(apply, &flat, &vec![0.0; flat.len()], &opts).map_err(|e| match e {
            KfbiError::GmresConvergence { iterations, residual, .. } => {
                KfbiError::SaddleConvergence { iterations, residual, tol: target, history: Vec::new() }
            }
            other => other,
        })?;
        let history = r.history[1..].to_vec();
        let p = Array2::from_shape_vec(shape, r.x).expect("pressure shape");
        Ok((p, r.iterations, history))
    }

    /// Independent residual check of `field` against the homogeneous system.
    /// Returns the max-norm residual and the normwise backward error.
    pub fn certificate(
        &self,
        field: &MacField,
        f1: &Array2<f64>,
        f2: &Array2<f64>,
        rdiv: &Array2<f64>,
    ) -> (f64, f64) {
        let grid = &self.grid;
        let h = grid.h();
        let (gx, gy) = gradient(grid, &field.p);
        let r1 = f1 - &(&neg_laplacian(grid, &field.u1) + &gx);
        let r2 = f2 - &(&neg_laplacian(grid, &field.u2) + &gy);
        let rd = rdiv - &divergence(grid, &field.u1, &field.u2);
        let residual = max_abs(&r1).max(max_abs(&r2)).max(max_abs(&rd));
        // max absolute row sum of the homogeneous operator
        let lap_row = match grid.closure() {
            WallClosure::Reflection => 8.0,
            WallClosure::Quadratic => 28.0 / 3.0,
        };
        let knorm = lap_row / (h * h) + 2.0 / h;
        let xnorm = field.max_velocity().max(max_abs(&field.p));
        let bnorm = max_abs(f1).max(max_abs(f2)).max(max_abs(rdiv));
        let denom = knorm * xnorm + bnorm;
        let backward = if denom > 0.0 { residual / denom } else { 0.0 };
        (residual, backward)
    }
}

/// Convenience wrapper: fold `walls`, then solve.
pub fn solve_saddle(
    grid: &StaggeredGrid,
    rhs: &SaddleRHS,
    walls: &WallData,
    opts: &SaddleOptions,
) -> Result<(MacField, SaddleStats)> {
    let mut folded = rhs.clone();
    if !walls.is_zero() {
        folded.fold_walls(grid, walls);
    }
    StokesSolver::new(grid).solve(&folded, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::ops::stokes_residual;
    use std::f64::consts::PI;

    fn grid(n: usize) -> StaggeredGrid {
        StaggeredGrid::new(-1.0, 1.0, n).unwrap()
    }

    #[test]
    fn dst_matches_direct_sum() {
        let g = grid(16);
        let s = PoissonSolver::new(&g);
        let n = 16;
        let mut data = Array2::from_shape_fn((n - 1, 3), |(i, c)| ((i * 7 + c * 3) % 5) as f64 - 1.7);
        let orig = data.clone();
        s.dst1_columns(&mut data);
        for c in 0..3 {
            for k in 1..n {
                let direct: f64 = (1..n).map(|j| orig[[j - 1, c]] * (PI * (j * k) as f64 / n as f64).sin()).sum();
                assert!((direct - data[[k - 1, c]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid(16);
        let s = PoissonSolver::new(&g);
        let w = s.solve_u1(&Array2::zeros(g.u1_shape()));
        assert!(w.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn eigenmodes_are_recovered() {
        // tensor mode: sine on the line direction, half-sample sine on the
        // staggered direction; eigenvalue measured by applying the operator
        let g = grid(16).with_closure(WallClosure::Reflection);
        let n = 16;
        let s = PoissonSolver::new(&g);
        for (k1, k2) in [(1usize, 1usize), (3, 7), (15, 16)] {
            let mode = Array2::from_shape_fn(g.u1_shape(), |(i, j)| {
                (PI * (k1 * (i + 1)) as f64 / n as f64).sin() * (PI * k2 as f64 * (j as f64 + 0.5) / n as f64).sin()
            });
            let applied = neg_laplacian(&g, &mode);
            let lam = applied[[0, 0]] / mode[[0, 0]];
            for (a, m) in applied.iter().zip(mode.iter()) {
                assert!((a - lam * m).abs() < 1e-9 * lam);
            }
            let w = s.solve_u1(&(lam * &mode));
            assert!((&w - &mode).iter().all(|e| e.abs() < 1e-12));
            let w2 = s.solve_u2(&(lam * &mode.t().to_owned()));
            assert!((&w2 - &mode.t()).iter().all(|e| e.abs() < 1e-12));
        }
    }

    #[test]
    fn inverts_the_discrete_operator() {
        for closure in [WallClosure::Reflection, WallClosure::Quadratic] {
            let g = grid(32).with_closure(closure);
            let s = PoissonSolver::new(&g);
            let w = Array2::from_shape_fn(g.u2_shape(), |(i, j)| (i as f64 * 0.37).sin() + (j as f64 * 0.11).cos());
            let back = s.solve_u2(&neg_laplacian(&g, &w));
            assert!((&back - &w).iter().all(|e| e.abs() < 1e-12));
            let w = Array2::from_shape_fn(g.u1_shape(), |(i, j)| (i as f64 * 0.21).cos() * (1.0 + j as f64 * 0.05));
            let back = s.solve_u1(&neg_laplacian(&g, &w));
            assert!((&back - &w).iter().all(|e| e.abs() < 1e-12));
        }
    }

    #[test]
    fn neg_laplacian_matches_padded_operator() {
        for closure in [WallClosure::Reflection, WallClosure::Quadratic] {
            let g = grid(16).with_closure(closure);
            let f = MacField::sample(&g, |x, y| [(x * 3.0).sin() * y, x * y * y], |_, _| 0.0);
            let w = WallData::zeros(&g);
            let z = Array2::zeros(g.p_shape());
            let (r1, r2, _) =
                stokes_residual(&g, &f, &w, &Array2::zeros(g.u1_shape()), &Array2::zeros(g.u2_shape()), &z);
            // residual of zero rhs is Δ_h u
            assert!((&r1 + &neg_laplacian(&g, &f.u1)).iter().all(|e| e.abs() < 1e-9));
            assert!((&r2 + &neg_laplacian(&g, &f.u2)).iter().all(|e| e.abs() < 1e-9));
        }
    }

    #[test]
    fn zero_saddle_rhs() {
        let g = grid(16);
        let (f, st) = solve_saddle(&g, &SaddleRHS::zeros(&g), &WallData::zeros(&g), &SaddleOptions::default()).unwrap();
        assert_eq!(st.iterations, 0);
        assert!(f.max_velocity() == 0.0 && f.p.iter().all(|v| *v == 0.0));
    }

    fn manufactured(n: usize, closure: WallClosure) -> (f64, f64) {
        // divergence-free u = curl of sin²(πx̂) sin²(πŷ)-type stream function
        // on [-1,1]², vanishing on the walls
        let g = grid(n).with_closure(closure);
        let u = |x: f64, y: f64| {
            let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
            let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
            [PI * sx * sx * 2.0 * sy * cy, -PI * sy * sy * 2.0 * sx * cx]
        };
        let p = |x: f64, y: f64| (PI * x).cos() * y;
        let f = |x: f64, y: f64| {
            let (sx, cx) = ((PI * x).sin(), (PI * x).cos());
            let (sy, cy) = ((PI * y).sin(), (PI * y).cos());
            let pi3 = PI * PI * PI;
            // -Δu + ∇p
            let lap1 = 2.0 * pi3 * (2.0 * (cx * cx - sx * sx) * sy * cy - 4.0 * sx * sx * sy * cy);
            let lap2 = -2.0 * pi3 * (2.0 * (cy * cy - sy * sy) * sx * cx - 4.0 * sy * sy * sx * cx);
            [-lap1 - PI * sx * y, -lap2 + cx]
        };
        let rhs = SaddleRHS {
            rhs_u1: Array2::from_shape_fn(g.u1_shape(), |(i, j)| {
                let x = g.u1_pos(i, j);
                f(x.x, x.y)[0]
            }),
            rhs_u2: Array2::from_shape_fn(g.u2_shape(), |(i, j)| {
                let x = g.u2_pos(i, j);
                f(x.x, x.y)[1]
            }),
            rhs_div: Array2::zeros(g.p_shape()),
        };
        let (num, st) = solve_saddle(&g, &rhs, &WallData::zeros(&g), &SaddleOptions::default()).unwrap();
        assert!(st.backward_error <= 1e-11);
        let ex = MacField::sample(&g, u, p);
        let r = crate::mac::compute_errors(&g, &num, &ex, &WallData::zeros(&g)).unwrap();
        (r.e_u_l2, r.e_u_h1max)
    }

    #[test]
    fn manufactured_solution_converges_second_order() {
        let e: Vec<(f64, f64)> = [32, 64, 128].iter().map(|&n| manufactured(n, WallClosure::Quadratic)).collect();
        for w in e.windows(2) {
            let order = crate::mac::observed_order(w[0].0, w[1].0);
            assert!(order >= 1.9, "order {order} from {e:?}");
            let order = crate::mac::observed_order(w[0].1, w[1].1);
            assert!(order >= 1.8, "gradient order {order} from {e:?}");
        }
    }

    #[test]
    fn inhomogeneous_walls_fold() {
        // a linear Stokes flow with p = 0 is reproduced exactly by the scheme
        let g = grid(16);
        let u = |x: f64, y: f64| [x + 2.0 * y, 0.5 * x - y];
        let walls = WallData::from_fn(&g, u);
        let (num, _) = solve_saddle(&g, &SaddleRHS::zeros(&g), &walls, &SaddleOptions::default()).unwrap();
        let ex = MacField::sample(&g, u, |_, _| 0.0);
        assert!((&num.u1 - &ex.u1).iter().all(|e| e.abs() < 1e-10));
        assert!((&num.u2 - &ex.u2).iter().all(|e| e.abs() < 1e-10));
        assert!(num.p.iter().all(|e| e.abs() < 1e-9));
    }
}
