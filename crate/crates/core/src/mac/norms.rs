//! Relative error norms used in the convergence tables.
//!
//! The maximum norms follow the averaged definition: the velocity max norm
//! is the mean of the two component maxima, the gradient max norm the mean
//! of the four difference maxima. The pressure max norm skips the last row
//! and column of cells.

use ndarray::Array2;

use super::field::{MacField, WallData};
use super::grid::{Component, StaggeredGrid};
use super::ops::{apply_difference, Difference};
use crate::error::{KfbiError, Result};

/// Relative errors of one numerical solution against the exact one.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub e_u_l2: f64,
    pub e_u_h1: f64,
    pub e_p_l2: f64,
    pub e_u_max: f64,
    pub e_u_h1max: f64,
    pub e_p_max: f64,
}

impl ErrorReport {
    pub fn as_array(&self) -> [f64; 6] {
        [self.e_u_l2, self.e_u_h1, self.e_p_l2, self.e_u_max, self.e_u_h1max, self.e_p_max]
    }
}

fn sum_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

fn max_abs<'a>(it: impl Iterator<Item = &'a f64>) -> f64 {
    it.fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `h`-scaled discrete l² norm of the velocity.
pub fn velocity_l2(grid: &StaggeredGrid, field: &MacField) -> f64 {
    let h = grid.h();
    (h * h * (sum_sq(&field.u1) + sum_sq(&field.u2))).sqrt()
}

pub fn pressure_l2(grid: &StaggeredGrid, p: &Array2<f64>) -> f64 {
    let h = grid.h();
    (h * h * sum_sq(p)).sqrt()
}

struct Gradients {
    d1u1: Array2<f64>,
    d2u1: Array2<f64>,
    d1u2: Array2<f64>,
    d2u2: Array2<f64>,
}

fn gradients(grid: &StaggeredGrid, field: &MacField, walls: &WallData) -> Gradients {
    let d = |c, w, v: &Array2<f64>| apply_difference(grid, c, w, v, walls).expect("field shapes are fixed");
    Gradients {
        d1u1: d(Component::U1, Difference::BackwardX, &field.u1),
        d2u1: d(Component::U1, Difference::BackwardY, &field.u1),
        d1u2: d(Component::U2, Difference::BackwardX, &field.u2),
        d2u2: d(Component::U2, Difference::BackwardY, &field.u2),
    }
}

fn rho(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        0.5
    } else {
        1.0
    }
}

/// Discrete H¹ seminorm with half weights on the wall-adjacent differences.
pub fn velocity_h1(grid: &StaggeredGrid, field: &MacField, walls: &WallData) -> f64 {
    let n = grid.n();
    let h = grid.h();
    let g = gradients(grid, field, walls);
    let mut s = sum_sq(&g.d1u1) + sum_sq(&g.d2u2);
    s += g.d2u1.indexed_iter().map(|((_, j), v)| rho(j, n) * v * v).sum::<f64>();
    s += g.d1u2.indexed_iter().map(|((i, _), v)| rho(i, n) * v * v).sum::<f64>();
    (h * h * s).sqrt()
}

pub fn velocity_max(field: &MacField) -> f64 {
    0.5 * (max_abs(field.u1.iter()) + max_abs(field.u2.iter()))
}

pub fn velocity_h1_max(grid: &StaggeredGrid, field: &MacField, walls: &WallData) -> f64 {
    let g = gradients(grid, field, walls);
    0.25 * (max_abs(g.d1u1.iter()) + max_abs(g.d2u1.iter()) + max_abs(g.d1u2.iter()) + max_abs(g.d2u2.iter()))
}

pub fn pressure_max(grid: &StaggeredGrid, p: &Array2<f64>) -> f64 {
    let n = grid.n();
    max_abs(p.indexed_iter().filter(|((i, j), _)| *i < n - 1 && *j < n - 1).map(|(_, v)| v))
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if den == 0.0 || !den.is_finite() {
        return Err(KfbiError::Normalization(what));
    }
    Ok(num / den)
}

/// Relative errors of `numeric` against `exact`.
///
/// `walls` is the Dirichlet data shared by both fields; it enters only the
/// wall-adjacent differences of the exact field (the error vanishes on the
/// walls). Both pressures are compared after removing their means.
pub fn compute_errors(
    grid: &StaggeredGrid,
    numeric: &MacField,
    exact: &MacField,
    walls: &WallData,
) -> Result<ErrorReport> {
    let mut num = numeric.clone();
    let mut ex = exact.clone();
    num.remove_pressure_mean();
    ex.remove_pressure_mean();
    let err = MacField {
        u1: &ex.u1 - &num.u1,
        u2: &ex.u2 - &num.u2,
        p: &ex.p - &num.p,
    };
    let zero = WallData::zeros(grid);
    Ok(ErrorReport {
        e_u_l2: ratio(velocity_l2(grid, &err), velocity_l2(grid, &ex), "velocity l2")?,
        e_u_h1: ratio(velocity_h1(grid, &err, &zero), velocity_h1(grid, &ex, walls), "velocity h1")?,
        e_p_l2: ratio(pressure_l2(grid, &err.p), pressure_l2(grid, &ex.p), "pressure l2")?,
        e_u_max: ratio(velocity_max(&err), velocity_max(&ex), "velocity max")?,
        e_u_h1max: ratio(
            velocity_h1_max(grid, &err, &zero),
            velocity_h1_max(grid, &ex, walls),
            "velocity h1 max",
        )?,
        e_p_max: ratio(pressure_max(grid, &err.p), pressure_max(grid, &ex.p), "pressure max")?,
    })
}

/// `log2(coarse / fine)` for errors on grids `N` and `2N`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (StaggeredGrid, MacField, WallData) {
        let g = StaggeredGrid::new(-2.0, 2.0, 32).unwrap();
        let u = |x: f64, y: f64| [x.sin() * y.cos(), -x.cos() * y.sin()];
        let f = MacField::sample(&g, u, |x, y| x * y + 0.3 * x);
        (g, f, WallData::from_fn(&g, u))
    }

    #[test]
    fn exact_input_gives_zero_errors() {
        let (g, f, w) = sample();
        let r = compute_errors(&g, &f, &f, &w).unwrap();
        assert!(r.as_array().iter().all(|e| *e == 0.0));
    }

    #[test]
    fn constant_pressure_norm() {
        let g = StaggeredGrid::new(-2.0, 2.0, 32).unwrap();
        let p = Array2::from_elem(g.p_shape(), -1.5);
        assert!((pressure_l2(&g, &p) - 4.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_exact_is_a_normalization_error() {
        let g = StaggeredGrid::new(0.0, 1.0, 16).unwrap();
        let z = MacField::zeros(&g);
        let w = WallData::zeros(&g);
        assert!(matches!(compute_errors(&g, &z, &z, &w), Err(KfbiError::Normalization(_))));
    }

    #[test]
    fn scaling_invariance() {
        let (g, ex, w) = sample();
        let mut num = ex.clone();
        num.u1.mapv_inplace(|v| v * 1.01 + 1e-3);
        num.p.mapv_inplace(|v| v + 0.1 * v * v);
        let r = compute_errors(&g, &num, &ex, &w).unwrap();
        let s = -3.7;
        let (mut num2, mut ex2) = (num.clone(), ex.clone());
        num2.scale(s);
        ex2.scale(s);
        let w2 = WallData::from_fn(&g, |x, y| [-3.7 * x.sin() * y.cos(), 3.7 * x.cos() * y.sin()]);
        let r2 = compute_errors(&g, &num2, &ex2, &w2).unwrap();
        for (a, b) in r.as_array().iter().zip(r2.as_array()) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn h1_of_linear_profile() {
        // u1 = y on [0,1]: every δ⁻₂ u1 is 1, half weight on the two wall rows
        let g = StaggeredGrid::new(0.0, 1.0, 16).unwrap();
        let u = |_x: f64, y: f64| [y, 0.0];
        let f = MacField::sample(&g, u, |_, _| 0.0);
        let w = WallData::from_fn(&g, u);
        let h = g.h();
        let expected = (h * h * 15.0 * 16.0).sqrt();
        assert!((velocity_h1(&g, &f, &w) - expected).abs() < 1e-12);
    }

    #[test]
    fn order_of_halving_error() {
        assert!((observed_order(4e-4, 1e-4) - 2.0).abs() < 1e-14);
    }
}
