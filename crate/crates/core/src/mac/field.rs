use ndarray::Array2;

use super::grid::{Component, StaggeredGrid};
use crate::Vec2;

/// Staggered velocity and cell-centered pressure on an `N x N` MAC grid.
///
/// Wall values are not stored; see [`WallData`].
#[derive(Debug, Clone, PartialEq)]
pub struct MacField {
    pub u1: Array2<f64>,
    pub u2: Array2<f64>,
    pub p: Array2<f64>,
}

impl MacField {
    pub fn zeros(grid: &StaggeredGrid) -> Self {
        Self {
            u1: Array2::zeros(grid.u1_shape()),
            u2: Array2::zeros(grid.u2_shape()),
            p: Array2::zeros(grid.p_shape()),
        }
    }

    /// Sample `velocity` and `pressure` at the staggered locations.
    pub fn sample<V, P>(grid: &StaggeredGrid, velocity: V, pressure: P) -> Self
    where
        V: Fn(f64, f64) -> [f64; 2],
        P: Fn(f64, f64) -> f64,
    {
        let u1 = Array2::from_shape_fn(grid.u1_shape(), |(i, j)| {
            let x = grid.u1_pos(i, j);
            velocity(x.x, x.y)[0]
        });
        let u2 = Array2::from_shape_fn(grid.u2_shape(), |(i, j)| {
            let x = grid.u2_pos(i, j);
            velocity(x.x, x.y)[1]
        });
        let p = Array2::from_shape_fn(grid.p_shape(), |(i, j)| {
            let x = grid.p_pos(i, j);
            pressure(x.x, x.y)
        });
        Self { u1, u2, p }
    }

    pub fn component(&self, c: Component) -> &Array2<f64> {
        match c {
            Component::U1 => &self.u1,
            Component::U2 => &self.u2,
            Component::P => &self.p,
        }
    }

    pub fn component_mut(&mut self, c: Component) -> &mut Array2<f64> {
        match c {
            Component::U1 => &mut self.u1,
            Component::U2 => &mut self.u2,
            Component::P => &mut self.p,
        }
    }

    pub fn pressure_mean(&self) -> f64 {
        self.p.mean().unwrap_or(0.0)
    }

    pub fn remove_pressure_mean(&mut self) {
        let m = self.pressure_mean();
        self.p.mapv_inplace(|v| v - m);
    }

    pub fn max_velocity(&self) -> f64 {
        let m1 = self.u1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let m2 = self.u2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        m1.max(m2)
    }

    pub fn scale(&mut self, s: f64) {
        self.u1 *= s;
        self.u2 *= s;
        self.p *= s;
    }

    pub fn add_assign(&mut self, other: &MacField) {
        self.u1 += &other.u1;
        self.u2 += &other.u2;
        self.p += &other.p;
    }

    /// Velocity at `x` by bilinear interpolation of each staggered
    /// component, with the wall data closing the outermost cells. `None`
    /// outside the closed domain.
    pub fn velocity_at(&self, grid: &StaggeredGrid, walls: &WallData, x: Vec2) -> Option<Vec2> {
        let (a, b) = (grid.lower(), grid.upper());
        if !(x.x >= a && x.x <= b && x.y >= a && x.y <= b) {
            return None;
        }
        let n = grid.n();
        let h = grid.h();
        // nodes normal to the component: walls and cell faces; along it:
        // walls and cell centers
        let faces: Vec<f64> = (0..=n).map(|k| if k == n { b } else { a + k as f64 * h }).collect();
        let mut centers = vec![a];
        centers.extend((0..n).map(|k| a + (k as f64 + 0.5) * h));
        centers.push(b);
        let u1 = |i: usize, j: usize| -> f64 {
            // i over faces, j over centers
            let along = |lo: &[f64], hi: &[f64], inner: &dyn Fn(usize) -> f64| match i {
                0 => lo_or(lo, j, n),
                _ if i == n => lo_or(hi, j, n),
                _ => inner(i - 1),
            };
            match j {
                0 => along(&walls.u1_left, &walls.u1_right, &|ii| walls.u1_bottom[ii]),
                _ if j == n + 1 => along(&walls.u1_left, &walls.u1_right, &|ii| walls.u1_top[ii]),
                _ => along(&walls.u1_left, &walls.u1_right, &|ii| self.u1[[ii, j - 1]]),
            }
        };
        let u2 = |i: usize, j: usize| -> f64 {
            // i over centers, j over faces
            let along = |inner: &dyn Fn(usize) -> f64| match j {
                0 => lo_or(&walls.u2_bottom, i, n),
                _ if j == n => lo_or(&walls.u2_top, i, n),
                _ => inner(j - 1),
            };
            match i {
                0 => along(&|jj| walls.u2_left[jj]),
                _ if i == n + 1 => along(&|jj| walls.u2_right[jj]),
                _ => along(&|jj| self.u2[[i - 1, jj]]),
            }
        };
        Some(Vec2::new(bilinear(&faces, &centers, u1, x), bilinear(&centers, &faces, u2, x)))
    }
}

/// Wall value at extended index `k` of a length-`n` wall array sampled at
/// cell centers; the corners extrapolate linearly along the wall.
fn lo_or(wall: &[f64], k: usize, n: usize) -> f64 {
    match k {
        0 => 1.5 * wall[0] - 0.5 * wall[1],
        _ if k == n + 1 => 1.5 * wall[n - 1] - 0.5 * wall[n - 2],
        _ => wall[k - 1],
    }
}

fn bilinear(xs: &[f64], ys: &[f64], v: impl Fn(usize, usize) -> f64, x: Vec2) -> f64 {
    let cell = |c: &[f64], t: f64| c.partition_point(|&q| q <= t).clamp(1, c.len() - 1) - 1;
    let (i, j) = (cell(xs, x.x), cell(ys, x.y));
    let sx = (x.x - xs[i]) / (xs[i + 1] - xs[i]);
    let sy = (x.y - ys[j]) / (ys[j + 1] - ys[j]);
    (1.0 - sx) * ((1.0 - sy) * v(i, j) + sy * v(i, j + 1)) + sx * ((1.0 - sy) * v(i + 1, j) + sy * v(i + 1, j + 1))
}

/// Dirichlet velocity data on the four walls, sampled where the staggered
/// closure needs it.
///
/// Normal components sit exactly on the wall at the staggered positions;
/// tangential components are taken at the wall points directly below/above
/// (or left/right of) the first interior unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct WallData {
    /// `u1(a, y_{j-1/2})`, length `N`.
    pub u1_left: Vec<f64>,
    /// `u1(b, y_{j-1/2})`, length `N`.
    pub u1_right: Vec<f64>,
    /// `u1(x_i, a)`, length `N-1`.
    pub u1_bottom: Vec<f64>,
    /// `u1(x_i, b)`, length `N-1`.
    pub u1_top: Vec<f64>,
    /// `u2(x_{i-1/2}, a)`, length `N`.
    pub u2_bottom: Vec<f64>,
    /// `u2(x_{i-1/2}, b)`, length `N`.
    pub u2_top: Vec<f64>,
    /// `u2(a, y_j)`, length `N-1`.
    pub u2_left: Vec<f64>,
    /// `u2(b, y_j)`, length `N-1`.
    pub u2_right: Vec<f64>,
}

impl WallData {
    pub fn zeros(grid: &StaggeredGrid) -> Self {
        let n = grid.n();
        Self {
            u1_left: vec![0.0; n],
            u1_right: vec![0.0; n],
            u1_bottom: vec![0.0; n - 1],
            u1_top: vec![0.0; n - 1],
            u2_bottom: vec![0.0; n],
            u2_top: vec![0.0; n],
            u2_left: vec![0.0; n - 1],
            u2_right: vec![0.0; n - 1],
        }
    }

    pub fn from_fn<F>(grid: &StaggeredGrid, ub: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2],
    {
        let n = grid.n() as i64;
        let (a, b) = (grid.lower(), grid.upper());
        let half = |k: i64| grid.coord(k);
        Self {
            u1_left: (0..n).map(|j| ub(a, half(2 * j + 1))[0]).collect(),
            u1_right: (0..n).map(|j| ub(b, half(2 * j + 1))[0]).collect(),
            u1_bottom: (1..n).map(|i| ub(half(2 * i), a)[0]).collect(),
            u1_top: (1..n).map(|i| ub(half(2 * i), b)[0]).collect(),
            u2_bottom: (0..n).map(|i| ub(half(2 * i + 1), a)[1]).collect(),
            u2_top: (0..n).map(|i| ub(half(2 * i + 1), b)[1]).collect(),
            u2_left: (1..n).map(|j| ub(a, half(2 * j))[1]).collect(),
            u2_right: (1..n).map(|j| ub(b, half(2 * j))[1]).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        [
            &self.u1_left,
            &self.u1_right,
            &self.u1_bottom,
            &self.u1_top,
            &self.u2_bottom,
            &self.u2_top,
            &self.u2_left,
            &self.u2_right,
        ]
        .iter()
        .all(|v| v.iter().all(|x| *x == 0.0))
    }

    /// Midpoint-rule outward flux `sum(u_b . n_b) h` through the walls.
    pub fn net_flux(&self, grid: &StaggeredGrid) -> f64 {
        let h = grid.h();
        let s = |v: &Vec<f64>| v.iter().sum::<f64>();
        h * (s(&self.u1_right) - s(&self.u1_left) + s(&self.u2_top) - s(&self.u2_bottom))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_has_stated_shapes() {
        let g = StaggeredGrid::new(0.0, 1.0, 16).unwrap();
        let f = MacField::sample(&g, |x, y| [x, y], |x, _| x);
        assert_eq!(f.u1.dim(), (15, 16));
        assert_eq!(f.u2.dim(), (16, 15));
        assert_eq!(f.p.dim(), (16, 16));
        assert!((f.u1[[0, 0]] - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rigid_rotation_has_no_net_flux() {
        let g = StaggeredGrid::new(-1.0, 1.0, 16).unwrap();
        let w = WallData::from_fn(&g, |x, y| [-y, x]);
        assert!(w.net_flux(&g).abs() < 1e-14);
        assert!(!w.is_zero());
        assert!(WallData::zeros(&g).is_zero());
    }

    #[test]
    fn bilinear_velocity_is_exact_for_linear_fields() {
        let g = StaggeredGrid::new(-1.0, 1.0, 16).unwrap();
        let u = |x: f64, y: f64| [0.3 - y + 2.0 * x, x + 0.5 * y];
        let f = MacField::sample(&g, u, |_, _| 0.0);
        let w = WallData::from_fn(&g, u);
        for &(x, y) in &[(0.0, 0.0), (0.31, -0.77), (-1.0, -1.0), (0.99, 1.0), (-0.97, 0.4), (0.2, -0.99)] {
            let v = f.velocity_at(&g, &w, Vec2::new(x, y)).unwrap();
            let e = u(x, y);
            assert!((v.x - e[0]).abs() < 1e-13 && (v.y - e[1]).abs() < 1e-13, "{x} {y}: {v:?} vs {e:?}");
        }
        assert!(f.velocity_at(&g, &w, Vec2::new(1.01, 0.0)).is_none());
    }
}
