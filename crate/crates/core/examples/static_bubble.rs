//! A circular bubble under surface tension is at rest: the tension is
//! balanced by a pressure jump of T0 / R across the interface and the
//! velocity vanishes up to discretization error.
//!
//!     cargo run --release --example static_bubble -- [radius] [N]

use kfbi_stokes::fast_solver::StokesSolver;
use kfbi_stokes::kfbi::KfbiOptions;
use kfbi_stokes::motion::{solve_configuration, MovingExample};
use kfbi_stokes::Vec2;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let radius: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.6);
    let mut cfg = MovingExample::Flower3.config();
    if let Some(n) = args.next() {
        cfg.n = n.parse()?;
    }
    let grid = cfg.grid()?;
    let points: Vec<Vec2> = (0..cfg.control_points)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / cfg.control_points as f64;
            radius * Vec2::new(t.cos(), t.sin())
        })
        .collect();
    let (problem, field, iterations) = solve_configuration(&cfg, &StokesSolver::new(&grid), &points, &KfbiOptions::default())?;

    // mean pressure well inside and well outside the bubble
    let (mut inside, mut ni, mut outside, mut no) = (0.0, 0, 0.0, 0);
    for ((i, j), &p) in field.p.indexed_iter() {
        let r = grid.p_pos(i, j).norm();
        if r < 0.5 * radius {
            inside += p;
            ni += 1;
        } else if r > 1.5 * radius && grid.wall_distance(grid.p_pos(i, j)) > 0.1 {
            outside += p;
            no += 1;
        }
    }
    let jump = inside / ni as f64 - outside / no as f64;
    println!("N = {}, R = {radius}, T0 = {}, mu = {}/{}", cfg.n, cfg.tension, problem.mu_plus, problem.mu_minus);
    println!("GMRES iterations {iterations}");
    println!("pressure jump {jump:.6} (Laplace law T0/R = {:.6})", cfg.tension / radius);
    println!("max |u| {:.3e}", field.max_velocity());
    Ok(())
}
