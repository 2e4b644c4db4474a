//! What the jump corrections buy. The exact solution of the ellipse problem
//! is put into the MAC discretization; at grid points next to the interface
//! the plain stencils see a kink and leave an O(1/h) residual, and the
//! correction terms built from the interface jumps bring it down to O(h).
//!
//!     cargo run --release --example jump_corrections

use kfbi_stokes::exact::{ExactKind, ExactSolution, Side};
use kfbi_stokes::fast_solver::{divergence, gradient, neg_laplacian, SaddleRHS};
use kfbi_stokes::geometry::{discretize_interface, CurveShape};
use kfbi_stokes::jumps::{correction_terms, DensityPair, JumpField, JumpSet, JumpTable};
use kfbi_stokes::kfbi::node_count;
use kfbi_stokes::mac::{Component, StaggeredGrid};
use kfbi_stokes::potentials::InterfaceSetup;
use kfbi_stokes::Vec2;

fn exact_jumps(ex: &ExactSolution, x: Vec2) -> JumpSet {
    let scaled = |side| {
        let b = ex.branch(side, x);
        [b.u1, b.u2, b.p / ex.mu(side)]
    };
    JumpSet::from_branches(scaled(Side::Plus), scaled(Side::Minus))
}

/// Largest residual over the irregular equations, with and without corrections.
fn residuals(ex: &ExactSolution, n: usize) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = ex.domain();
    let grid = StaggeredGrid::new(lo, hi, n)?;
    let shape = CurveShape::Ellipse { center: Vec2::zeros(), a: 1.0, b: 0.5 };
    let curve = discretize_interface(&shape, node_count(&shape, grid.h())?)?;
    let setup = InterfaceSetup::new(&grid, curve)?;
    let psi = setup.curve.nodes().iter().map(|nd| exact_jumps(ex, nd.pos).traction(nd.normal)).collect();
    let dens = DensityPair::new(&setup.curve, vec![Vec2::zeros(); setup.curve.len()], psi)?;
    let exf = *ex;
    let f_jump = move |x| exf.force(Side::Plus, x) / exf.mu_plus - exf.force(Side::Minus, x) / exf.mu_minus;
    let table = JumpTable::build(&JumpField::new(&setup.curve, &dens, &f_jump)?, &setup.intersections)?;
    let cls = &setup.classification;
    let (c1, c2, cd) = correction_terms(&table, &setup.intersections, cls, &grid)?.rhs_terms();

    let mut rhs = SaddleRHS::zeros(&grid);
    for ((i, j), v) in rhs.rhs_u1.indexed_iter_mut() {
        *v = ex.force(cls.sides.side_of(Component::U1, i, j), grid.u1_pos(i, j)).x;
    }
    for ((i, j), v) in rhs.rhs_u2.indexed_iter_mut() {
        *v = ex.force(cls.sides.side_of(Component::U2, i, j), grid.u2_pos(i, j)).y;
    }
    rhs.fold_walls(&grid, &ex.walls(&grid));
    let u = ex.sample(&grid);
    let (gx, gy) = gradient(&grid, &u.p);
    let r1 = &rhs.rhs_u1 - &(&neg_laplacian(&grid, &u.u1) + &gx);
    let r2 = &rhs.rhs_u2 - &(&neg_laplacian(&grid, &u.u2) + &gy);
    let rd = &rhs.rhs_div - &divergence(&grid, &u.u1, &u.u2);
    let (mut with, mut without) = (0.0f64, 0.0f64);
    for (nodes, res, c) in [(&cls.u1, &r1, &c1), (&cls.u2, &r2, &c2), (&cls.p, &rd, &cd)] {
        for node in nodes.iter() {
            with = with.max((res[node.index] + c[node.index]).abs());
            without = without.max(res[node.index].abs());
        }
    }
    Ok((with, without))
}

fn main() -> anyhow::Result<()> {
    let ex = ExactSolution::new(ExactKind::Ellipse, 1.0, 1.0);
    println!("N     corrected   uncorrected");
    for n in [64, 128, 256, 512] {
        let (with, without) = residuals(&ex, n)?;
        println!("{n:<5} {with:.3e}   {without:.3e}");
    }
    Ok(())
}
