use std::f64::consts::PI;
use std::path::Path;

use super::spline::PeriodicSpline;
use crate::error::{KfbiError, Result};
use crate::Vec2;

/// A closed curve `t -> r(t)` over `[0, period)`.
///
/// Analytic shapes use `θ = 2π t` on `[0, 1)`; control-point shapes are
/// periodic cubic splines through the points at integer parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveShape {
    Ellipse { center: Vec2, a: f64, b: f64 },
    /// `r(θ) = r0 + amp sin(k θ)` about `center`.
    Polar { center: Vec2, r0: f64, amp: f64, k: u32 },
    Spline { x: PeriodicSpline, y: PeriodicSpline },
}

impl CurveShape {
    pub fn circle(center: Vec2, r: f64) -> Self {
        CurveShape::Ellipse { center, a: r, b: r }
    }

    /// Periodic spline through `points`, reordered counterclockwise if needed.
    pub fn from_control_points(points: &[Vec2]) -> Result<Self> {
        if points.len() < 4 {
            return Err(KfbiError::Geometry(format!("need at least 4 control points, got {}", points.len())));
        }
        let mut pts = points.to_vec();
        if pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-14 {
            pts.pop();
        }
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        Ok(CurveShape::Spline {
            x: PeriodicSpline::new(pts.iter().map(|p| p.x).collect(), 1.0),
            y: PeriodicSpline::new(pts.iter().map(|p| p.y).collect(), 1.0),
        })
    }

    /// Parse `circle: r=1`, `ellipse: a=1 b=0.5`, `polar: r0=0.8 amp=0.2 k=3`
    /// (each with optional `cx=`, `cy=`).
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| KfbiError::Config(format!("curve spec `{spec}` has no `kind:` prefix")))?;
        let mut vals = std::collections::HashMap::new();
        for tok in rest.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| KfbiError::Config(format!("expected key=value, got `{tok}`")))?;
            let v: f64 = v.parse().map_err(|_| KfbiError::Config(format!("bad number in `{tok}`")))?;
            vals.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| vals.get(k).copied().ok_or_else(|| KfbiError::Config(format!("curve spec missing `{k}`")));
        let center = Vec2::new(vals.get("cx").copied().unwrap_or(0.0), vals.get("cy").copied().unwrap_or(0.0));
        let shape = match kind.trim() {
            "circle" => Self::circle(center, get("r")?),
            "ellipse" => CurveShape::Ellipse { center, a: get("a")?, b: get("b")? },
            "polar" => {
                let k = get("k")?;
                if k < 0.0 || k.fract() != 0.0 {
                    return Err(KfbiError::Config("polar `k` must be a nonnegative integer".into()));
                }
                CurveShape::Polar { center, r0: get("r0")?, amp: get("amp")?, k: k as u32 }
            }
            other => return Err(KfbiError::Config(format!("unknown curve kind `{other}`"))),
        };
        shape.validate()?;
        Ok(shape)
    }

    /// Control points from a two-column CSV file (header optional).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
            let (a, b) = (cols.next(), cols.next());
            match (a.and_then(|s| s.parse::<f64>().ok()), b.and_then(|s| s.parse::<f64>().ok())) {
                (Some(x), Some(y)) => pts.push(Vec2::new(x, y)),
                _ if lineno == 0 => continue,
                _ => return Err(KfbiError::Config(format!("{}:{}: expected two numbers", path.display(), lineno + 1))),
            }
        }
        Self::from_control_points(&pts)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CurveShape::Ellipse { a, b, .. } if !(a > 0.0 && b > 0.0) => {
                Err(KfbiError::Geometry("ellipse semi-axes must be positive".into()))
            }
            CurveShape::Polar { r0, amp, .. } if !(r0 > amp.abs()) => {
                Err(KfbiError::Geometry("polar curve must keep r > 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            CurveShape::Spline { x, .. } => x.period(),
            _ => 1.0,
        }
    }

    /// `r(t)`, `r'(t)`, `r''(t)`.
    pub fn eval(&self, t: f64) -> (Vec2, Vec2, Vec2) {
        match *self {
            CurveShape::Ellipse { center, a, b } => {
                let w = 2.0 * PI;
                let (s, c) = (w * t).sin_cos();
                (
                    center + Vec2::new(a * c, b * s),
                    Vec2::new(-a * w * s, b * w * c),
                    Vec2::new(-a * w * w * c, -b * w * w * s),
                )
            }
            CurveShape::Polar { center, r0, amp, k } => {
                let w = 2.0 * PI;
                let th = w * t;
                let kf = k as f64;
                let r = r0 + amp * (kf * th).sin();
                let r1 = amp * kf * (kf * th).cos();
                let r2 = -amp * kf * kf * (kf * th).sin();
                let (s, c) = th.sin_cos();
                let p = Vec2::new(r * c, r * s);
                let d1 = Vec2::new(r1 * c - r * s, r1 * s + r * c);
                let d2 = Vec2::new(r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s);
                (center + p, d1 * w, d2 * (w * w))
            }
            CurveShape::Spline { ref x, ref y } => {
                let ex = x.eval_all(t);
                let ey = y.eval_all(t);
                (Vec2::new(ex[0], ey[0]), Vec2::new(ex[1], ey[1]), Vec2::new(ex[2], ey[2]))
            }
        }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.eval(t).0
    }

    /// Control points of a spline shape; analytic shapes return `None`.
    pub fn control_points(&self) -> Option<Vec<Vec2>> {
        match self {
            CurveShape::Spline { x, y } => {
                Some(x.values().iter().zip(y.values()).map(|(a, b)| Vec2::new(*a, *b)).collect())
            }
            _ => None,
        }
    }

    /// Cheap parameter-space segmentation used for quadrature and sampling.
    pub(crate) fn panels(&self) -> usize {
        match self {
            CurveShape::Spline { x, .. } => 4 * x.values().len(),
            CurveShape::Polar { k, .. } => 64 * (*k as usize + 4),
            CurveShape::Ellipse { .. } => 256,
        }
    }
}

/// Shoelace area of a closed polygon, positive when counterclockwise.
pub fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        a.x * b.y - b.x * a.y
    })
    .sum::<f64>()
}
