//! One two-phase solve on the circle problem, with the solver's own
//! diagnostics: GMRES history, saddle-point certificate, errors, and field
//! files for plotting.
//!
//!     cargo run --release --example single_solve -- [N] [out-dir]

use std::path::PathBuf;

use kfbi_stokes::exact::{ExactKind, ExactSolution};
use kfbi_stokes::io::{dump_field, residual_log_csv, write_text};
use kfbi_stokes::kfbi::{residual_certificate, solve_two_phase, KfbiOptions, TwoPhaseProblem};
use kfbi_stokes::mac::compute_errors;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(64);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "single-solve-out".into()));

    let ex = ExactSolution::new(ExactKind::Circle, 1.0, 10.0);
    let problem = TwoPhaseProblem::from_exact(&ex, n)?;
    let opts = KfbiOptions::default();
    let sol = solve_two_phase(&problem, &opts)?;
    let cert = residual_certificate(&problem, &sol, &opts)?;
    let field = sol.physical(&problem);
    let e = compute_errors(problem.grid(), &field, &ex.sample(problem.grid()), &problem.walls)?;

    println!("N = {n}, {} interface nodes, gamma = {:.4}", problem.setup.curve.len(), problem.gamma());
    println!("GMRES: {} iterations, final residual {:.2e}", sol.state.iterations, sol.state.history.last().copied().unwrap_or(0.0));
    println!("boundary equation residual recomputed from psi {cert:.2e}");
    println!("velocity  l2 {:.3e}  max {:.3e}", e.e_u_l2, e.e_u_max);
    println!("gradient  l2 {:.3e}  max {:.3e}", e.e_u_h1, e.e_u_h1max);
    println!("pressure  l2 {:.3e}  max {:.3e}", e.e_p_l2, e.e_p_max);

    for path in dump_field(&out, "field", problem.grid(), &field)? {
        println!("wrote {}", path.display());
    }
    write_text(&out.join("gmres.csv"), &residual_log_csv(&sol.state.history))?;
    Ok(())
}
