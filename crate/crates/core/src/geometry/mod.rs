//! Interface curves: parameterization, arclength, quasi-uniform nodes,
//! grid-line intersections and node classification.

mod intersect;
mod shape;
mod spline;

pub use intersect::{
    classify_nodes, find_intersections, Arm, GridClassification, IntersectionPoint, Intersections, IrregularNode,
    LineFamily, SideMap,
};
pub use shape::{signed_area, CurveShape};
pub use spline::PeriodicSpline;

use log::warn;

use crate::error::{KfbiError, Result};
use crate::mac::StaggeredGrid;
use crate::Vec2;

const GL_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Gauss-Legendre integral of `f` over `[a, b]`.
pub(crate) fn gauss8(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * GL_X.iter().zip(GL_W.iter()).map(|(x, w)| w * f(m + r * x)).sum::<f64>()
}

/// Position and differential geometry at one point of the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryPoint {
    pub pos: Vec2,
    /// Unit tangent in the counterclockwise direction.
    pub tangent: Vec2,
    /// Unit normal pointing out of the enclosed region.
    pub normal: Vec2,
    /// Signed curvature, positive where the curve is convex.
    pub curvature: f64,
}

impl GeometryPoint {
    fn from_derivatives(pos: Vec2, d1: Vec2, d2: Vec2) -> Self {
        let speed = d1.norm();
        let tangent = d1 / speed;
        Self {
            pos,
            tangent,
            normal: Vec2::new(tangent.y, -tangent.x),
            curvature: (d1.x * d2.y - d1.y * d2.x) / (speed * speed * speed),
        }
    }
}

/// One quasi-uniform sample of the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveNode {
    /// Shape parameter.
    pub t: f64,
    /// Arclength from `t = 0`.
    pub s: f64,
    pub pos: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    pub curvature: f64,
    /// Arclength weight of the node.
    pub weight: f64,
}

/// A closed interface with arclength parameterization and `M` nodes at
/// equal arclength spacing.
#[derive(Debug, Clone)]
pub struct InterfaceCurve {
    shape: CurveShape,
    panel_t: Vec<f64>,
    panel_s: Vec<f64>,
    length: f64,
    nodes: Vec<CurveNode>,
    warnings: Vec<String>,
}

impl InterfaceCurve {
    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    pub fn nodes(&self) -> &[CurveNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total arclength.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Arclength between consecutive nodes.
    pub fn spacing(&self) -> f64 {
        self.length / self.nodes.len() as f64
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.nodes.iter().map(|n| n.pos).collect()
    }

    pub fn max_curvature(&self) -> f64 {
        let period = self.shape.period();
        let samples = 4 * self.shape.panels();
        (0..samples)
            .map(|k| self.geometry_at_t(period * k as f64 / samples as f64).curvature.abs())
            .fold(0.0, f64::max)
    }

    /// Enclosed area by Green's theorem on the parameterization.
    pub fn area(&self) -> f64 {
        let p = self.panel_t.len() - 1;
        (0..p)
            .map(|k| {
                gauss8(self.panel_t[k], self.panel_t[k + 1], |t| {
                    let (r, d1, _) = self.shape.eval(t);
                    0.5 * (r.x * d1.y - r.y * d1.x)
                })
            })
            .sum()
    }

    pub fn geometry_at_t(&self, t: f64) -> GeometryPoint {
        let (r, d1, d2) = self.shape.eval(t);
        GeometryPoint::from_derivatives(r, d1, d2)
    }

    /// Geometry at arclength `s` (wrapped into `[0, L)`).
    pub fn geometry_at(&self, s: f64) -> GeometryPoint {
        self.geometry_at_t(self.t_of_s(s))
    }

    fn speed(&self, t: f64) -> f64 {
        self.shape.eval(t).1.norm()
    }

    /// Arclength of parameter `t` (wrapped into one period).
    pub fn s_of_t(&self, t: f64) -> f64 {
        let period = self.shape.period();
        let tt = t.rem_euclid(period);
        let p = self.panel_t.len() - 1;
        let k = ((tt / period * p as f64).floor() as usize).min(p - 1);
        self.panel_s[k] + gauss8(self.panel_t[k], tt, |u| self.speed(u))
    }

    /// Parameter at arclength `s`, by safeguarded Newton iteration.
    pub fn t_of_s(&self, s: f64) -> f64 {
        let ss = s.rem_euclid(self.length);
        let p = self.panel_t.len() - 1;
        let k = match self.panel_s.binary_search_by(|v| v.partial_cmp(&ss).unwrap()) {
            Ok(i) => return self.panel_t[i.min(p)] % self.shape.period(),
            Err(i) => i.clamp(1, p) - 1,
        };
        let (mut lo, mut hi) = (self.panel_t[k], self.panel_t[k + 1]);
        let (slo, shi) = (self.panel_s[k], self.panel_s[k + 1]);
        let mut t = lo + (hi - lo) * (ss - slo) / (shi - slo);
        for _ in 0..60 {
            let f = self.panel_s[k] + gauss8(self.panel_t[k], t, |u| self.speed(u)) - ss;
            if f.abs() < 1e-12 * self.length.max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - f / self.speed(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            t = next;
        }
        t
    }
}

/// Sample `shape` at `m` points of equal arclength spacing.
pub fn discretize_interface(shape: &CurveShape, m: usize) -> Result<InterfaceCurve> {
    if m < 4 {
        return Err(KfbiError::Geometry(format!("need at least 4 interface nodes, got {m}")));
    }
    let period = shape.period();
    let p = shape.panels();
    let panel_t: Vec<f64> = (0..=p).map(|k| period * k as f64 / p as f64).collect();
    let mut panel_s = vec![0.0; p + 1];
    for k in 0..p {
        panel_s[k + 1] = panel_s[k] + gauss8(panel_t[k], panel_t[k + 1], |t| shape.eval(t).1.norm());
    }
    let length = panel_s[p];
    if !(length > 0.0) || !length.is_finite() {
        return Err(KfbiError::Geometry("curve has zero or invalid length".into()));
    }
    let mut curve = InterfaceCurve {
        shape: shape.clone(),
        panel_t,
        panel_s,
        length,
        nodes: Vec::with_capacity(m),
        warnings: Vec::new(),
    };
    let ds = length / m as f64;
    for i in 0..m {
        let s = ds * i as f64;
        let t = if i == 0 { 0.0 } else { curve.t_of_s(s) };
        let g = curve.geometry_at_t(t);
        curve.nodes.push(CurveNode {
            t,
            s,
            pos: g.pos,
            tangent: g.tangent,
            normal: g.normal,
            curvature: g.curvature,
            weight: ds,
        });
    }
    check_simple(&curve)?;
    let kmax = curve.max_curvature();
    if ds * kmax > 1.0 {
        let msg = format!("node spacing {ds:.3e} times max curvature {kmax:.3e} exceeds 1");
        warn!("{msg}");
        curve.warnings.push(msg);
    }
    Ok(curve)
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let orient = |p: Vec2, q: Vec2, r: Vec2| (q - p).perp(&(r - p));
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Reject self-intersecting or clockwise curves using a fine polygon.
fn check_simple(curve: &InterfaceCurve) -> Result<()> {
    let period = curve.shape.period();
    let n = (4 * curve.len()).max(256);
    let pts: Vec<Vec2> = (0..n).map(|k| curve.shape.point(period * k as f64 / n as f64)).collect();
    if signed_area(&pts) <= 0.0 {
        return Err(KfbiError::Geometry("curve is not counterclockwise or encloses no area".into()));
    }
    // bounding boxes of blocks of segments prune most pairs
    let block = 16;
    let nb = n.div_ceil(block);
    let bbox: Vec<(Vec2, Vec2)> = (0..nb)
        .map(|b| {
            let mut lo = Vec2::repeat(f64::INFINITY);
            let mut hi = Vec2::repeat(f64::NEG_INFINITY);
            for i in b * block..=((b + 1) * block).min(n) {
                let p = pts[i % n];
                lo = lo.inf(&p);
                hi = hi.sup(&p);
            }
            (lo, hi)
        })
        .collect();
    for bi in 0..nb {
        for bj in bi..nb {
            let (l1, h1) = bbox[bi];
            let (l2, h2) = bbox[bj];
            if l1.x > h2.x || l2.x > h1.x || l1.y > h2.y || l2.y > h1.y {
                continue;
            }
            for i in bi * block..((bi + 1) * block).min(n) {
                for j in (bj * block).max(i + 2)..((bj + 1) * block).min(n) {
                    if i == 0 && j == n - 1 {
                        continue;
                    }
                    if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                        return Err(KfbiError::Geometry("curve intersects itself".into()));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Check the curve against a grid: it must stay `3h` away from the walls and
/// its nodes must resolve the curvature.
pub fn validate_for_grid(curve: &InterfaceCurve, grid: &StaggeredGrid) -> Result<()> {
    let h = grid.h();
    let period = curve.shape.period();
    let n = 4 * curve.shape.panels();
    for k in 0..n {
        let x = curve.shape.point(period * k as f64 / n as f64);
        if grid.wall_distance(x) < 3.0 * h {
            return Err(KfbiError::Geometry(format!(
                "interface point ({:.4}, {:.4}) is within 3h of the domain boundary",
                x.x, x.y
            )));
        }
    }
    let kmax = curve.max_curvature();
    if curve.spacing() * kmax > 1.0 {
        return Err(KfbiError::Resolution { spacing: curve.spacing(), max_curvature: kmax });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_circle_with_four_nodes() {
        let c = discretize_interface(&CurveShape::circle(Vec2::zeros(), 1.0), 4).unwrap();
        assert_eq!(c.warnings().len(), 1);
        for (i, n) in c.nodes().iter().enumerate() {
            let a = i as f64 * PI / 2.0;
            assert!((n.pos - Vec2::new(a.cos(), a.sin())).norm() < 1e-12);
            assert!((n.curvature - 1.0).abs() < 1e-12);
            assert!((n.weight - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_curvature_at_vertex() {
        let c = discretize_interface(&CurveShape::Ellipse { center: Vec2::zeros(), a: 1.0, b: 0.5 }, 64).unwrap();
        let g = c.geometry_at(0.0);
        assert!((g.pos - Vec2::new(1.0, 0.0)).norm() < 1e-14);
        assert!((g.curvature - 4.0).abs() < 1e-12);
        assert!((g.normal - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn arclength_roundtrip() {
        let c = discretize_interface(&CurveShape::parse("polar: r0=0.8 amp=0.2 k=3").unwrap(), 100).unwrap();
        for k in 0..37 {
            let s = c.length() * k as f64 / 37.0;
            assert!((c.s_of_t(c.t_of_s(s)) - s).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_figure_eight() {
        let pts: Vec<Vec2> = (0..40)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 40.0;
                Vec2::new(t.sin(), (2.0 * t).sin() * 0.5)
            })
            .collect();
        let shape = CurveShape::from_control_points(&pts).unwrap();
        assert!(discretize_interface(&shape, 64).is_err());
    }

    #[test]
    fn wall_distance_is_checked() {
        let g = StaggeredGrid::new(-1.0, 1.0, 32).unwrap();
        let c = discretize_interface(&CurveShape::circle(Vec2::zeros(), 0.95), 64).unwrap();
        assert!(validate_for_grid(&c, &g).is_err());
        let c = discretize_interface(&CurveShape::circle(Vec2::zeros(), 0.5), 64).unwrap();
        assert!(validate_for_grid(&c, &g).is_ok());
    }
}
