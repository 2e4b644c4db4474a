//! Closed-form two-phase Stokes solutions used for verification.
//!
//! Each solution is given branch-wise in terms of [`Jet2`], so the body
//! force, the traction jump and every derivative jump follow by automatic
//! differentiation. Pressures are physical (unscaled).

use crate::jet::Jet2;
use crate::mac::{MacField, StaggeredGrid, WallData};
use crate::Vec2;

/// Which side of the interface a point is on. `Plus` is the enclosed region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

/// The two closed-form test problems with known solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExactKind {
    /// Unit circle in `(-2, 2)²`, constant interior pressure.
    Circle,
    /// Ellipse `x² + 4y² = 1` in `(-2, 2)²`.
    Ellipse,
}

/// Branch values and derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchJets {
    pub u1: Jet2,
    pub u2: Jet2,
    /// Physical pressure.
    pub p: Jet2,
}

impl BranchJets {
    /// Velocity gradient `G[i][k] = ∂_k u_i`.
    pub fn grad_u(&self) -> [[f64; 2]; 2] {
        [[self.u1.gx, self.u1.gy], [self.u2.gx, self.u2.gy]]
    }

    /// `(-p I + μ (∇u + ∇uᵀ)) n`.
    pub fn traction(&self, mu: f64, n: Vec2) -> Vec2 {
        let g = self.grad_u();
        let s11 = 2.0 * mu * g[0][0] - self.p.v;
        let s22 = 2.0 * mu * g[1][1] - self.p.v;
        let s12 = mu * (g[0][1] + g[1][0]);
        Vec2::new(s11 * n.x + s12 * n.y, s12 * n.x + s22 * n.y)
    }
}

/// An exact solution together with its viscosities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub kind: ExactKind,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl ExactSolution {
    pub fn new(kind: ExactKind, mu_plus: f64, mu_minus: f64) -> Self {
        Self { kind, mu_plus, mu_minus }
    }

    pub fn domain(&self) -> (f64, f64) {
        (-2.0, 2.0)
    }

    pub fn mu(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.mu_plus,
            Side::Minus => self.mu_minus,
        }
    }

    /// Level set, negative inside.
    pub fn level(&self, x: Vec2) -> f64 {
        match self.kind {
            ExactKind::Circle => x.x * x.x + x.y * x.y - 1.0,
            ExactKind::Ellipse => x.x * x.x + 4.0 * x.y * x.y - 1.0,
        }
    }

    pub fn side(&self, x: Vec2) -> Side {
        if self.level(x) <= 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    /// Outward unit normal of the level set through `x`.
    pub fn normal(&self, x: Vec2) -> Vec2 {
        let g = match self.kind {
            ExactKind::Circle => Vec2::new(2.0 * x.x, 2.0 * x.y),
            ExactKind::Ellipse => Vec2::new(2.0 * x.x, 8.0 * x.y),
        };
        g.normalize()
    }

    /// Closest point on the interface along the level-set gradient flow,
    /// good enough for placing test points exactly on the curve.
    pub fn interface_point(&self, theta: f64) -> Vec2 {
        match self.kind {
            ExactKind::Circle => Vec2::new(theta.cos(), theta.sin()),
            ExactKind::Ellipse => Vec2::new(theta.cos(), 0.5 * theta.sin()),
        }
    }

    /// Branch formulas of `side`, evaluated at `x` (which may lie on either
    /// side; the branches extend smoothly).
    pub fn branch(&self, side: Side, x: Vec2) -> BranchJets {
        let (x, y) = Jet2::vars(x.x, x.y);
        match (self.kind, side) {
            (ExactKind::Circle, Side::Plus) => BranchJets {
                u1: y * (x * x + y * y) / 4.0,
                u2: -(x * y * y) / 4.0,
                p: Jet2::constant(5.0),
            },
            (ExactKind::Circle, Side::Minus) => {
                let r = (x * x + y * y).sqrt();
                BranchJets {
                    u1: y / r - y * 0.75,
                    u2: -(x / r) + x * (x * x + 3.0) / 4.0,
                    p: (x.powi(3) * -0.75 + x * 0.375) * y,
                }
            }
            (ExactKind::Ellipse, Side::Plus) => BranchJets {
                u1: y * (x * x + y * y * 4.0) / 4.0,
                u2: -(x * y * y) / 4.0,
                p: (y.sin() + x.cos()).exp(),
            },
            (ExactKind::Ellipse, Side::Minus) => BranchJets {
                u1: y / 4.0,
                u2: -(x * (1.0 - x * x)) / 16.0,
                p: (x.powi(3) * -0.75 + x * 0.375) * y,
            },
        }
    }

    pub fn velocity(&self, x: Vec2) -> [f64; 2] {
        let b = self.branch(self.side(x), x);
        [b.u1.v, b.u2.v]
    }

    pub fn pressure(&self, x: Vec2) -> f64 {
        self.branch(self.side(x), x).p.v
    }

    /// Physical body force `-μ Δu + ∇p` of the branch `side`.
    pub fn force(&self, side: Side, x: Vec2) -> Vec2 {
        let b = self.branch(side, x);
        let mu = self.mu(side);
        Vec2::new(-mu * b.u1.laplacian() + b.p.gx, -mu * b.u2.laplacian() + b.p.gy)
    }

    /// Traction jump `[[μ σ n]]` at an interface point with normal `n`.
    pub fn traction_jump(&self, x: Vec2, n: Vec2) -> Vec2 {
        self.branch(Side::Plus, x).traction(self.mu_plus, n) - self.branch(Side::Minus, x).traction(self.mu_minus, n)
    }

    /// Exact field on the MAC grid, physical pressure.
    pub fn sample(&self, grid: &StaggeredGrid) -> MacField {
        MacField::sample(
            grid,
            |x, y| self.velocity(Vec2::new(x, y)),
            |x, y| self.pressure(Vec2::new(x, y)),
        )
    }

    pub fn walls(&self, grid: &StaggeredGrid) -> WallData {
        WallData::from_fn(grid, |x, y| self.velocity(Vec2::new(x, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both() -> [ExactSolution; 2] {
        [
            ExactSolution::new(ExactKind::Circle, 1.0, 10.0),
            ExactSolution::new(ExactKind::Ellipse, 1.0, 10.0),
        ]
    }

    #[test]
    fn branches_are_divergence_free() {
        for ex in both() {
            for side in [Side::Plus, Side::Minus] {
                for &(x, y) in &[(0.3, 0.2), (1.3, -0.7), (-0.5, 1.1)] {
                    let b = ex.branch(side, Vec2::new(x, y));
                    assert!((b.u1.gx + b.u2.gy).abs() < 1e-13, "{:?} {:?}", ex.kind, side);
                }
            }
        }
    }

    #[test]
    fn velocity_is_continuous_across_the_interface() {
        for ex in both() {
            for k in 0..16 {
                let x = ex.interface_point(0.39 * k as f64);
                let p = ex.branch(Side::Plus, x);
                let m = ex.branch(Side::Minus, x);
                assert!((p.u1.v - m.u1.v).abs() < 1e-14);
                assert!((p.u2.v - m.u2.v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pressure_jump_at_one_zero() {
        let ex = ExactSolution::new(ExactKind::Circle, 1.0, 10.0);
        let x = Vec2::new(1.0, 0.0);
        let jump = ex.branch(Side::Plus, x).p.v - ex.branch(Side::Minus, x).p.v;
        assert_eq!(jump, 5.0);
    }

    #[test]
    fn sides_and_normals() {
        let ex = ExactSolution::new(ExactKind::Ellipse, 1.0, 1.0);
        assert_eq!(ex.side(Vec2::new(0.9, 0.0)), Side::Plus);
        assert_eq!(ex.side(Vec2::new(0.0, 0.6)), Side::Minus);
        let n = ex.normal(Vec2::new(0.0, 0.5));
        assert!((n - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    }
}
