use crate::error::{KfbiError, Result};
use crate::Vec2;

/// How tangential velocity is closed half a cell outside a wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WallClosure {
    /// `g = 2 w - u₀`: linear reflection, first order truncation at the
    /// first interior row.
    Reflection,
    /// `g = (8 w - 6 u₀ + u₁) / 3`: quadratic extrapolation through the wall
    /// value and two interior rows, exact for quadratics.
    #[default]
    Quadratic,
}

impl WallClosure {
    /// Ghost value from the wall value and the first two interior values.
    #[inline]
    pub fn ghost(self, wall: f64, u0: f64, u1: f64) -> f64 {
        match self {
            Self::Reflection => 2.0 * wall - u0,
            Self::Quadratic => (8.0 * wall - 6.0 * u0 + u1) / 3.0,
        }
    }

    /// Weight of the wall value in the ghost.
    pub fn wall_weight(self) -> f64 {
        match self {
            Self::Reflection => 2.0,
            Self::Quadratic => 8.0 / 3.0,
        }
    }
}

/// Uniform square MAC grid on `[a, b]^2` with `n` cells per direction.
///
/// Positions on the staggered grid are addressed with doubled integer
/// coordinates: `coord(k) = a + k h / 2`. Cell corners sit at even `k`,
/// cell centers at odd `k`. Velocity `u1` lives at (even, odd), `u2` at
/// (odd, even) and the pressure at (odd, odd).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredGrid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
    closure: WallClosure,
}

impl StaggeredGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(KfbiError::Grid(format!("need at least 8 cells per direction, got {n}")));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(KfbiError::Grid(format!("invalid domain [{a}, {b}]")));
        }
        Ok(Self { a, b, n, h: (b - a) / n as f64, closure: WallClosure::default() })
    }

    pub fn with_closure(mut self, closure: WallClosure) -> Self {
        self.closure = closure;
        self
    }

    pub fn closure(&self) -> WallClosure {
        self.closure
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Physical coordinate of doubled index `k`.
    #[inline]
    pub fn coord(&self, k: i64) -> f64 {
        if k == 2 * self.n as i64 {
            self.b
        } else {
            self.a + k as f64 * 0.5 * self.h
        }
    }

    #[inline]
    pub fn point(&self, kx: i64, ky: i64) -> Vec2 {
        Vec2::new(self.coord(kx), self.coord(ky))
    }

    /// `u1` unknown `(i, j)`, zero based: `(a + (i+1) h, a + (j+1/2) h)`.
    #[inline]
    pub fn u1_index(i: usize, j: usize) -> (i64, i64) {
        (2 * (i as i64 + 1), 2 * j as i64 + 1)
    }

    #[inline]
    pub fn u2_index(i: usize, j: usize) -> (i64, i64) {
        (2 * i as i64 + 1, 2 * (j as i64 + 1))
    }

    #[inline]
    pub fn p_index(i: usize, j: usize) -> (i64, i64) {
        (2 * i as i64 + 1, 2 * j as i64 + 1)
    }

    pub fn u1_pos(&self, i: usize, j: usize) -> Vec2 {
        let (kx, ky) = Self::u1_index(i, j);
        self.point(kx, ky)
    }

    pub fn u2_pos(&self, i: usize, j: usize) -> Vec2 {
        let (kx, ky) = Self::u2_index(i, j);
        self.point(kx, ky)
    }

    pub fn p_pos(&self, i: usize, j: usize) -> Vec2 {
        let (kx, ky) = Self::p_index(i, j);
        self.point(kx, ky)
    }

    pub fn u1_shape(&self) -> (usize, usize) {
        (self.n - 1, self.n)
    }

    pub fn u2_shape(&self) -> (usize, usize) {
        (self.n, self.n - 1)
    }

    pub fn p_shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    /// Distance from `x` to the nearest wall.
    pub fn wall_distance(&self, x: Vec2) -> f64 {
        (x.x - self.a).min(self.b - x.x).min(x.y - self.a).min(self.b - x.y)
    }
}

/// Which staggered family an array belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    U1,
    U2,
    P,
}

impl Component {
    pub fn shape(self, grid: &StaggeredGrid) -> (usize, usize) {
        match self {
            Component::U1 => grid.u1_shape(),
            Component::U2 => grid.u2_shape(),
            Component::P => grid.p_shape(),
        }
    }

    /// Doubled coordinates of array entry `(i, j)`.
    pub fn index(self, i: usize, j: usize) -> (i64, i64) {
        match self {
            Component::U1 => StaggeredGrid::u1_index(i, j),
            Component::U2 => StaggeredGrid::u2_index(i, j),
            Component::P => StaggeredGrid::p_index(i, j),
        }
    }

    /// Inverse of [`Component::index`]; `None` when `(kx, ky)` is not an
    /// unknown of this family.
    pub fn unknown_at(self, grid: &StaggeredGrid, kx: i64, ky: i64) -> Option<(usize, usize)> {
        let (nx, ny) = self.shape(grid);
        let (i, j) = match self {
            Component::U1 => {
                if kx % 2 != 0 || ky % 2 == 0 {
                    return None;
                }
                (kx / 2 - 1, (ky - 1) / 2)
            }
            Component::U2 => {
                if kx % 2 == 0 || ky % 2 != 0 {
                    return None;
                }
                ((kx - 1) / 2, ky / 2 - 1)
            }
            Component::P => {
                if kx % 2 == 0 || ky % 2 == 0 {
                    return None;
                }
                ((kx - 1) / 2, (ky - 1) / 2)
            }
        };
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            None
        } else {
            Some((i as usize, j as usize))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_exact() {
        let g = StaggeredGrid::new(-2.0, 2.0, 128).unwrap();
        assert_eq!(g.h() * 128.0, 4.0);
        assert_eq!(g.coord(256), 2.0);
        assert_eq!(g.coord(0), -2.0);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(StaggeredGrid::new(0.0, 1.0, 4).is_err());
        assert!(StaggeredGrid::new(1.0, 0.0, 16).is_err());
    }

    #[test]
    fn unknown_lookup_roundtrips() {
        let g = StaggeredGrid::new(0.0, 1.0, 16).unwrap();
        for comp in [Component::U1, Component::U2, Component::P] {
            let (nx, ny) = comp.shape(&g);
            for i in 0..nx {
                for j in 0..ny {
                    let (kx, ky) = comp.index(i, j);
                    assert_eq!(comp.unknown_at(&g, kx, ky), Some((i, j)));
                }
            }
        }
        // wall positions are not unknowns
        assert_eq!(Component::U1.unknown_at(&g, 0, 1), None);
        assert_eq!(Component::U2.unknown_at(&g, 1, 32), None);
    }

    #[test]
    fn positions_match_layout() {
        let g = StaggeredGrid::new(-2.0, 2.0, 8).unwrap();
        let h = g.h();
        let p = g.u1_pos(0, 0);
        assert!((p.x - (-2.0 + h)).abs() < 1e-15 && (p.y - (-2.0 + 0.5 * h)).abs() < 1e-15);
        let p = g.u2_pos(0, 0);
        assert!((p.x - (-2.0 + 0.5 * h)).abs() < 1e-15 && (p.y - (-2.0 + h)).abs() < 1e-15);
        let p = g.p_pos(7, 7);
        assert!((p.x - (2.0 - 0.5 * h)).abs() < 1e-15);
    }
}
