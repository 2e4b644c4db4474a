//! Eigenvalues of the discrete boundary operator for all six viscosity
//! ratios. The continuous operator has its spectrum in [0, 1]; a clustered
//! spectrum away from zero is what keeps GMRES counts flat under refinement.
//!
//!     cargo run --release --example operator_spectrum -- [M]

use kfbi_stokes::exact::{ExactKind, ExactSolution};
use kfbi_stokes::geometry::{discretize_interface, CurveShape};
use kfbi_stokes::kfbi::{assemble_dense, KfbiOptions, TwoPhaseProblem, ViscosityCase};
use kfbi_stokes::mac::StaggeredGrid;
use kfbi_stokes::potentials::{InterfaceSetup, VolumeForce};
use kfbi_stokes::Vec2;

fn main() -> anyhow::Result<()> {
    let m: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(16);
    let grid = StaggeredGrid::new(-2.0, 2.0, 64)?;
    println!("case  gamma     min Re    max Re    max |Im|  cond");
    for case in ViscosityCase::ALL {
        let (mp, mm) = case.viscosities();
        let ex = ExactSolution::new(ExactKind::Circle, mp, mm);
        let curve = discretize_interface(&CurveShape::circle(Vec2::zeros(), 1.0), m)?;
        let setup = InterfaceSetup::new(&grid, curve)?;
        let g = setup.curve.nodes().iter().map(|nd| ex.traction_jump(nd.pos, nd.normal)).collect();
        let p = TwoPhaseProblem::new(setup, mp, mm, VolumeForce::new(move |s, x| ex.force(s, x)), g, ex.walls(&grid))?;
        let a = assemble_dense(&p, &KfbiOptions::default())?;
        let eig = a.clone().complex_eigenvalues();
        let lo = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let hi = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let im = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let sv = a.singular_values();
        let cond = sv.max() / sv.min();
        println!("{:<5} {:>8.4}  {lo:>8.4}  {hi:>8.4}  {im:>8.2e}  {cond:.2e}", case.name(), p.gamma());
    }
    Ok(())
}
