//! Second-order forward-mode differentiation in two variables.
//!
//! Used to turn closed-form exact solutions into body forces, traction
//! jumps and derivative jumps without hand-written derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and Hessian of a scalar function of `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, ..Default::default() }
    }

    /// The coordinate functions `x` and `y` at a point.
    pub fn vars(x: f64, y: f64) -> (Self, Self) {
        (Self { v: x, gx: 1.0, ..Default::default() }, Self { v: y, gy: 1.0, ..Default::default() })
    }

    pub fn laplacian(&self) -> f64 {
        self.hxx + self.hyy
    }

    pub fn grad(&self) -> [f64; 2] {
        [self.gx, self.gy]
    }

    /// Apply `g` given `g(v)`, `g'(v)`, `g''(v)`.
    fn chain(&self, g0: f64, g1: f64, g2: f64) -> Self {
        Self {
            v: g0,
            gx: g1 * self.gx,
            gy: g1 * self.gy,
            hxx: g1 * self.hxx + g2 * self.gx * self.gx,
            hxy: g1 * self.hxy + g2 * self.gx * self.gy,
            hyy: g1 * self.hyy + g2 * self.gy * self.gy,
        }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let kf = k as f64;
                self.chain(self.v.powi(k), kf * self.v.powi(k - 1), kf * (kf - 1.0) * self.v.powi(k - 2))
            }
        }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            gx: self.gx + o.gx,
            gy: self.gy + o.gy,
            hxx: self.hxx + o.hxx,
            hxy: self.hxy + o.hxy,
            hyy: self.hyy + o.hyy,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * -1.0
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            gx: self.v * o.gx + o.v * self.gx,
            gy: self.v * o.gy + o.v * self.gy,
            hxx: self.v * o.hxx + o.v * self.hxx + 2.0 * self.gx * o.gx,
            hxy: self.v * o.hxy + o.v * self.hxy + self.gx * o.gy + self.gy * o.gx,
            hyy: self.v * o.hyy + o.v * self.hyy + 2.0 * self.gy * o.gy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        self + (-c)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        Jet2 {
            v: self.v * c,
            gx: self.gx * c,
            gy: self.gy * c,
            hxx: self.hxx * c,
            hxy: self.hxy * c,
            hyy: self.hyy * c,
        }
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, c: f64) -> Jet2 {
        self * (1.0 / c)
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, j: Jet2) -> Jet2 {
        j + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j * self
    }
}

impl Div<Jet2> for f64 {
    type Output = Jet2;
    fn div(self, j: Jet2) -> Jet2 {
        j.recip() * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_check(f: impl Fn(Jet2, Jet2) -> Jet2, x: f64, y: f64) {
        let (jx, jy) = Jet2::vars(x, y);
        let j = f(jx, jy);
        let val = |a: f64, b: f64| {
            let (u, v) = Jet2::vars(a, b);
            f(u, v).v
        };
        let e = 1e-4;
        let gx = (val(x + e, y) - val(x - e, y)) / (2.0 * e);
        let gy = (val(x, y + e) - val(x, y - e)) / (2.0 * e);
        let hxx = (val(x + e, y) - 2.0 * val(x, y) + val(x - e, y)) / (e * e);
        let hyy = (val(x, y + e) - 2.0 * val(x, y) + val(x, y - e)) / (e * e);
        let hxy = (val(x + e, y + e) - val(x + e, y - e) - val(x - e, y + e) + val(x - e, y - e)) / (4.0 * e * e);
        let scale = 1.0 + j.v.abs();
        assert!((j.gx - gx).abs() < 1e-6 * scale, "gx {} {}", j.gx, gx);
        assert!((j.gy - gy).abs() < 1e-6 * scale);
        assert!((j.hxx - hxx).abs() < 1e-4 * scale, "hxx {} {}", j.hxx, hxx);
        assert!((j.hxy - hxy).abs() < 1e-4 * scale);
        assert!((j.hyy - hyy).abs() < 1e-4 * scale);
    }

    #[test]
    fn polynomial_derivatives() {
        let (x, y) = Jet2::vars(2.0, -1.0);
        let f = x * x * y + 3.0 * y.powi(3);
        assert_eq!(f.v, -4.0 - 3.0);
        assert_eq!(f.gx, 2.0 * 2.0 * -1.0);
        assert_eq!(f.gy, 4.0 + 9.0);
        assert_eq!(f.hxx, -2.0);
        assert_eq!(f.hxy, 4.0);
        assert_eq!(f.hyy, 18.0 * -1.0);
    }

    proptest! {
        #[test]
        fn transcendental_matches_finite_differences(x in 0.3f64..1.5, y in -1.0f64..1.0) {
            fd_check(|x, y| (x * x + y * y).sqrt() * (y.sin() + x.cos()).exp(), x, y);
            fd_check(|x, y| y / (x * x + 1.0) - 2.0 / (x + 3.0), x, y);
        }
    }
}
