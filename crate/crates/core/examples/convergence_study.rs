//! Grid refinement study for the two exact-solution problems.
//!
//!     cargo run --release --example convergence_study -- [circle|ellipse] [I..VI]
//!
//! Prints the convergence table (errors and observed orders) as CSV.

use kfbi_stokes::exact::{ExactKind, ExactSolution};
use kfbi_stokes::io::{convergence_csv, ConvergenceRow};
use kfbi_stokes::kfbi::{solve_two_phase, KfbiOptions, TwoPhaseProblem, ViscosityCase};
use kfbi_stokes::mac::compute_errors;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        Some("ellipse") => ExactKind::Ellipse,
        _ => ExactKind::Circle,
    };
    let case: ViscosityCase = args.next().as_deref().unwrap_or("I").parse()?;
    let (mu_plus, mu_minus) = case.viscosities();
    let ex = ExactSolution::new(kind, mu_plus, mu_minus);

    let mut rows = Vec::new();
    for n in [32, 64, 128] {
        let problem = TwoPhaseProblem::from_exact(&ex, n)?;
        let sol = solve_two_phase(&problem, &KfbiOptions::default())?;
        let errors = compute_errors(problem.grid(), &sol.physical(&problem), &ex.sample(problem.grid()), &problem.walls)?;
        eprintln!("N={n}: {} GMRES iterations", sol.state.iterations);
        rows.push(ConvergenceRow { n, errors, iterations: sol.state.iterations });
    }
    print!("{}", convergence_csv(&rows));
    Ok(())
}
