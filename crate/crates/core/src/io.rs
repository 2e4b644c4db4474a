//! Plain-text outputs: legacy VTK and CSV.
//!
//! Numbers are written with a fixed format so repeated runs produce
//! identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::geometry::{InterfaceCurve, Intersections};
use crate::jumps::JumpTable;
use crate::mac::{Component, ErrorReport, MacField, StaggeredGrid};
use crate::motion::StepRecord;
use crate::Vec2;

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn component_name(c: Component) -> &'static str {
    match c {
        Component::U1 => "u1",
        Component::U2 => "u2",
        Component::P => "p",
    }
}

fn position(grid: &StaggeredGrid, c: Component, i: usize, j: usize) -> Vec2 {
    match c {
        Component::U1 => grid.u1_pos(i, j),
        Component::U2 => grid.u2_pos(i, j),
        Component::P => grid.p_pos(i, j),
    }
}

/// Legacy VTK structured-points text for one staggered component.
pub fn vtk_component(grid: &StaggeredGrid, field: &MacField, c: Component) -> String {
    let a = field.component(c);
    let (nx, ny) = a.dim();
    let o = position(grid, c, 0, 0);
    let h = grid.h();
    let name = component_name(c);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{name} on a {n}x{n} MAC grid", n = grid.n());
    let _ = writeln!(s, "ASCII\nDATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {nx} {ny} 1");
    let _ = writeln!(s, "ORIGIN {} {} 0", num(o.x), num(o.y));
    let _ = writeln!(s, "SPACING {} {} 1", num(h), num(h));
    let _ = writeln!(s, "POINT_DATA {}", nx * ny);
    let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    // x varies fastest
    for j in 0..ny {
        for i in 0..nx {
            let _ = writeln!(s, "{}", num(a[[i, j]]));
        }
    }
    s
}

/// `i,j,x,y,value` rows for one component.
pub fn csv_component(grid: &StaggeredGrid, field: &MacField, c: Component) -> String {
    let a = field.component(c);
    let mut s = String::from("i,j,x,y,value\n");
    for ((i, j), v) in a.indexed_iter() {
        let x = position(grid, c, i, j);
        let _ = writeln!(s, "{i},{j},{},{},{}", num(x.x), num(x.y), num(*v));
    }
    s
}

/// `u1`, `u2`, `p` as `<stem>_<c>.vtk` and `<stem>_<c>.csv` in `dir`.
pub fn dump_field(dir: &Path, stem: &str, grid: &StaggeredGrid, field: &MacField) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for c in [Component::U1, Component::U2, Component::P] {
        let name = component_name(c);
        let vtk = dir.join(format!("{stem}_{name}.vtk"));
        write(&vtk, &vtk_component(grid, field, c))?;
        let csv = dir.join(format!("{stem}_{name}.csv"));
        write(&csv, &csv_component(grid, field, c))?;
        out.extend([vtk, csv]);
    }
    Ok(out)
}

/// One row per intersection point: position, then `[[v]]`, `[[∇v]]`,
/// `[[q]]`, `[[∇q]]`.
pub fn jumps_csv(ints: &Intersections, table: &JumpTable) -> String {
    let mut s = String::from("index,x,y,v1,v2,dx_v1,dy_v1,dx_v2,dy_v2,q,dx_q,dy_q\n");
    for (k, (p, j)) in ints.points.iter().zip(&table.entries).enumerate() {
        let vals = [
            p.position.x,
            p.position.y,
            j.v.x,
            j.v.y,
            j.grad[(0, 0)],
            j.grad[(0, 1)],
            j.grad[(1, 0)],
            j.grad[(1, 1)],
            j.q,
            j.grad_q.x,
            j.grad_q.y,
        ];
        let _ = writeln!(s, "{k},{}", vals.map(num).join(","));
    }
    s
}

/// `iteration,residual` rows of a GMRES run.
pub fn residual_log_csv(history: &[f64]) -> String {
    let mut s = String::from("iteration,max_residual\n");
    for (k, r) in history.iter().enumerate() {
        let _ = writeln!(s, "{k},{}", num(*r));
    }
    s
}

/// Control points as `x,y` rows.
pub fn curve_csv(points: &[Vec2]) -> String {
    let mut s = String::from("x,y\n");
    for p in points {
        let _ = writeln!(s, "{},{}", num(p.x), num(p.y));
    }
    s
}

/// Curve nodes with their geometry.
pub fn curve_nodes_csv(curve: &InterfaceCurve) -> String {
    let mut s = String::from("node,s,x,y,nx,ny,curvature\n");
    for (k, nd) in curve.nodes().iter().enumerate() {
        let vals = [nd.s, nd.pos.x, nd.pos.y, nd.normal.x, nd.normal.y, nd.curvature];
        let _ = writeln!(s, "{k},{}", vals.map(num).join(","));
    }
    s
}

pub fn diagnostics_csv(records: &[StepRecord]) -> String {
    let mut s = String::from("# area and perimeter of the interface spline; iso_ratio = 4 pi area / perimeter^2\n");
    s.push_str("step,t,area,perimeter,iso_ratio,max_velocity,gmres_iterations\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.step,
            num(r.time),
            num(r.area),
            num(r.perimeter),
            num(r.iso_ratio),
            num(r.max_velocity),
            r.iterations
        );
    }
    s
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: ErrorReport,
    pub iterations: usize,
}

pub const CONVERGENCE_HEADER: &str = "\
# errors relative to the exact solution; l2 norms are h-weighted sums over the staggered unknowns,
# h1 adds the one-sided differences of both velocity components including the wall-straddling ones,
# max norms average the per-component maxima; order = ln(e_prev / e) / ln(N / N_prev), blank on the first row
N,e_u_l2,order,e_u_h1,order,e_p_l2,order,e_u_max,order,e_u_h1max,order,e_p_max,order,gmres_iterations
";

/// The table in `N` order with observed orders between consecutive rows.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    for (k, r) in rows.iter().enumerate() {
        let _ = write!(s, "{}", r.n);
        let e = r.errors.as_array();
        for (m, v) in e.iter().enumerate() {
            let order = if k == 0 {
                String::new()
            } else {
                let prev = rows[k - 1];
                let o = (prev.errors.as_array()[m] / v).ln() / (r.n as f64 / prev.n as f64).ln();
                format!("{o:.4}")
            };
            let _ = write!(s, ",{},{order}", num(*v));
        }
        let _ = writeln!(s, ",{}", r.iterations);
    }
    s
}

/// Which norm family a split table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormFamily {
    L2,
    Max,
}

/// Eight-column table for one norm family: `N`, then velocity, velocity
/// gradient and pressure errors each followed by its order, then the
/// GMRES iterations.
pub fn convergence_split_csv(rows: &[ConvergenceRow], family: NormFamily) -> String {
    let (pick, head): (fn(&ErrorReport) -> [f64; 3], &str) = match family {
        NormFamily::L2 => (
            |e| [e.e_u_l2, e.e_u_h1, e.e_p_l2],
            "# h-weighted l2 errors of velocity, velocity gradient (h1) and pressure; order = ln(e_prev / e) / ln(N / N_prev)\n\
             N,e_u_l2,order,e_u_h1,order,e_p_l2,order,gmres_iterations\n",
        ),
        NormFamily::Max => (
            |e| [e.e_u_max, e.e_u_h1max, e.e_p_max],
            "# max-norm errors of velocity, velocity gradient and pressure; order = ln(e_prev / e) / ln(N / N_prev)\n\
             N,e_u_max,order,e_u_h1max,order,e_p_max,order,gmres_iterations\n",
        ),
    };
    let mut s = String::from(head);
    for (k, r) in rows.iter().enumerate() {
        let _ = write!(s, "{}", r.n);
        let e = pick(&r.errors);
        for (m, v) in e.iter().enumerate() {
            let order = if k == 0 {
                String::new()
            } else {
                let prev = rows[k - 1];
                format!("{:.4}", (pick(&prev.errors)[m] / v).ln() / (r.n as f64 / prev.n as f64).ln())
            };
            let _ = write!(s, ",{},{order}", num(*v));
        }
        let _ = writeln!(s, ",{}", r.iterations);
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vtk_has_one_value_per_unknown() {
        let g = StaggeredGrid::new(0.0, 1.0, 8).unwrap();
        let f = MacField::sample(&g, |x, y| [x, y], |x, y| x + y);
        let t = vtk_component(&g, &f, Component::U1);
        assert!(t.contains("DIMENSIONS 7 8 1"));
        let values = t.lines().skip_while(|l| !l.starts_with("LOOKUP_TABLE")).skip(1).count();
        assert_eq!(values, 56);
        let csv = csv_component(&g, &f, Component::P);
        assert_eq!(csv.lines().count(), 65);
    }

    #[test]
    fn orders_are_blank_on_the_first_row() {
        let e = |s: f64| ErrorReport { e_u_l2: s, e_u_h1: s, e_p_l2: s, e_u_max: s, e_u_h1max: s, e_p_max: 2.0 * s };
        let rows = [
            ConvergenceRow { n: 32, errors: e(4e-3), iterations: 7 },
            ConvergenceRow { n: 64, errors: e(1e-3), iterations: 6 },
        ];
        let t = convergence_csv(&rows);
        let data: Vec<&str> = t.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0].split(',').count(), 14);
        assert!(data[1].starts_with("32,4.000000000000e-3,,"));
        assert!(data[2].contains(",2.0000,"));
        assert!(data[2].ends_with(",6"));
        let m = convergence_split_csv(&rows, NormFamily::Max);
        let data: Vec<&str> = m.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0].split(',').count(), 8);
        assert!(data[2].starts_with("64,1.000000000000e-3,2.0000,"));
        assert!(data[2].contains(",2.000000000000e-3,2.0000,6"));
    }

    #[test]
    fn dumps_land_in_the_directory() {
        let dir = tempfile::tempdir().unwrap();
        let g = StaggeredGrid::new(0.0, 1.0, 8).unwrap();
        let files = dump_field(&dir.path().join("sub"), "field", &g, &MacField::zeros(&g)).unwrap();
        assert_eq!(files.len(), 6);
        assert!(files.iter().all(|f| f.exists()));
    }
}
