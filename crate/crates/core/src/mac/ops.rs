//! Staggered difference operators with the Dirichlet wall closure.
//!
//! Normal velocity on a wall is a known value; tangential velocity uses a
//! ghost value half a cell outside the wall, built by the grid's
//! [`WallClosure`](super::grid::WallClosure).

use ndarray::Array2;

use super::field::{MacField, WallData};
use super::grid::{Component, StaggeredGrid};
use crate::error::{KfbiError, Result};

/// One of the discrete operators of the MAC scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    /// `(v_{l+1,m} - v_{l,m}) / h`
    ForwardX,
    /// `(v_{l,m} - v_{l-1,m}) / h`
    BackwardX,
    /// `(v_{l,m+1} - v_{l,m}) / h`
    ForwardY,
    /// `(v_{l,m} - v_{l,m-1}) / h`
    BackwardY,
    /// Five-point Laplacian.
    Laplacian,
}

/// `u1` with wall values and ghosts: shape `(N+1, N+2)`, entry `[i, j]` at
/// `(a + i h, a + (j - 1/2) h)`.
pub fn padded_u1(u1: &Array2<f64>, walls: &WallData, grid: &StaggeredGrid) -> Array2<f64> {
    let (n, c) = (grid.n(), grid.closure());
    let mut p = Array2::zeros((n + 1, n + 2));
    for i in 0..n - 1 {
        for j in 0..n {
            p[[i + 1, j + 1]] = u1[[i, j]];
        }
    }
    for j in 0..n {
        p[[0, j + 1]] = walls.u1_left[j];
        p[[n, j + 1]] = walls.u1_right[j];
    }
    for i in 1..n {
        p[[i, 0]] = c.ghost(walls.u1_bottom[i - 1], p[[i, 1]], p[[i, 2]]);
        p[[i, n + 1]] = c.ghost(walls.u1_top[i - 1], p[[i, n]], p[[i, n - 1]]);
    }
    p
}

/// `u2` with wall values and ghosts: shape `(N+2, N+1)`, entry `[i, j]` at
/// `(a + (i - 1/2) h, a + j h)`.
pub fn padded_u2(u2: &Array2<f64>, walls: &WallData, grid: &StaggeredGrid) -> Array2<f64> {
    let (n, c) = (grid.n(), grid.closure());
    let mut p = Array2::zeros((n + 2, n + 1));
    for i in 0..n {
        for j in 0..n - 1 {
            p[[i + 1, j + 1]] = u2[[i, j]];
        }
    }
    for i in 0..n {
        p[[i + 1, 0]] = walls.u2_bottom[i];
        p[[i + 1, n]] = walls.u2_top[i];
    }
    for j in 1..n {
        p[[0, j]] = c.ghost(walls.u2_left[j - 1], p[[1, j]], p[[2, j]]);
        p[[n + 1, j]] = c.ghost(walls.u2_right[j - 1], p[[n, j]], p[[n - 1, j]]);
    }
    p
}

fn laplacian_padded(p: &Array2<f64>, h: f64) -> Array2<f64> {
    let (px, py) = p.dim();
    let ih2 = 1.0 / (h * h);
    Array2::from_shape_fn((px - 2, py - 2), |(i, j)| {
        (p[[i + 2, j + 1]] + p[[i, j + 1]] + p[[i + 1, j + 2]] + p[[i + 1, j]] - 4.0 * p[[i + 1, j + 1]]) * ih2
    })
}

/// Apply `which` to one component of a field.
///
/// Output locations: `BackwardX` of `u1` and `BackwardY` of `u2` land on
/// cell centers (`N x N`); `BackwardY` of `u1` lands on cell corners
/// `(x_i, y_j)`, `i = 1..N-1`, `j = 0..N`; `BackwardX` of `u2` on corners
/// `i = 0..N`, `j = 1..N-1`; `ForwardX`/`ForwardY` of `p` land on the `u1`/`u2`
/// unknowns; the Laplacian of a velocity component lands on its own unknowns.
pub fn apply_difference(
    grid: &StaggeredGrid,
    comp: Component,
    which: Difference,
    values: &Array2<f64>,
    walls: &WallData,
) -> Result<Array2<f64>> {
    let n = grid.n();
    let h = grid.h();
    let shape = comp.shape(grid);
    if values.dim() != shape {
        return Err(KfbiError::Index {
            i: values.dim().0 as isize,
            j: values.dim().1 as isize,
            shape,
        });
    }
    let unsupported = || {
        Err(KfbiError::Grid(format!(
            "difference {which:?} is not defined on component {comp:?}"
        )))
    };
    match (comp, which) {
        (Component::U1, Difference::Laplacian) => Ok(laplacian_padded(&padded_u1(values, walls, grid), h)),
        (Component::U2, Difference::Laplacian) => Ok(laplacian_padded(&padded_u2(values, walls, grid), h)),
        (Component::U1, Difference::BackwardX) => {
            let p = padded_u1(values, walls, grid);
            Ok(Array2::from_shape_fn((n, n), |(c, j)| (p[[c + 1, j + 1]] - p[[c, j + 1]]) / h))
        }
        (Component::U1, Difference::BackwardY) => {
            let p = padded_u1(values, walls, grid);
            Ok(Array2::from_shape_fn((n - 1, n + 1), |(i, j)| (p[[i + 1, j + 1]] - p[[i + 1, j]]) / h))
        }
        (Component::U2, Difference::BackwardX) => {
            let p = padded_u2(values, walls, grid);
            Ok(Array2::from_shape_fn((n + 1, n - 1), |(i, j)| (p[[i + 1, j + 1]] - p[[i, j + 1]]) / h))
        }
        (Component::U2, Difference::BackwardY) => {
            let p = padded_u2(values, walls, grid);
            Ok(Array2::from_shape_fn((n, n), |(i, c)| (p[[i + 1, c + 1]] - p[[i + 1, c]]) / h))
        }
        (Component::P, Difference::ForwardX) => {
            Ok(Array2::from_shape_fn(grid.u1_shape(), |(i, j)| (values[[i + 1, j]] - values[[i, j]]) / h))
        }
        (Component::P, Difference::ForwardY) => {
            Ok(Array2::from_shape_fn(grid.u2_shape(), |(i, j)| (values[[i, j + 1]] - values[[i, j]]) / h))
        }
        _ => unsupported(),
    }
}

/// Discrete divergence `δ⁻₁ u1 + δ⁻₂ u2` at cell centers.
pub fn divergence(grid: &StaggeredGrid, field: &MacField, walls: &WallData) -> Array2<f64> {
    let dx = apply_difference(grid, Component::U1, Difference::BackwardX, &field.u1, walls)
        .expect("shape checked by MacField");
    let dy = apply_difference(grid, Component::U2, Difference::BackwardY, &field.u2, walls)
        .expect("shape checked by MacField");
    dx + dy
}

/// Residuals `rhs - K x` of the three MAC equations
/// `-Δ_h u1 + δ⁺₁ p = f1`, `-Δ_h u2 + δ⁺₂ p = f2`, `δ⁻₁ u1 + δ⁻₂ u2 = g`.
pub fn stokes_residual(
    grid: &StaggeredGrid,
    field: &MacField,
    walls: &WallData,
    rhs_u1: &Array2<f64>,
    rhs_u2: &Array2<f64>,
    rhs_div: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let h = grid.h();
    let lap1 = laplacian_padded(&padded_u1(&field.u1, walls, grid), h);
    let lap2 = laplacian_padded(&padded_u2(&field.u2, walls, grid), h);
    let gx = Array2::from_shape_fn(grid.u1_shape(), |(i, j)| (field.p[[i + 1, j]] - field.p[[i, j]]) / h);
    let gy = Array2::from_shape_fn(grid.u2_shape(), |(i, j)| (field.p[[i, j + 1]] - field.p[[i, j]]) / h);
    let r1 = rhs_u1 - &(&gx - &lap1);
    let r2 = rhs_u2 - &(&gy - &lap2);
    let rd = rhs_div - &divergence(grid, field, walls);
    (r1, r2, rd)
}
