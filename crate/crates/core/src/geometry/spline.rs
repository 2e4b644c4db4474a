/// Periodic cubic interpolating spline on uniform knots `t_i = i dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    dt: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

/// Solve the cyclic system `m_{i-1} + 4 m_i + m_{i+1} = r_i` in place.
fn solve_cyclic_141(r: &mut [f64]) {
    let n = r.len();
    if n == 1 {
        r[0] /= 6.0;
        return;
    }
    if n == 2 {
        // both neighbors coincide: 4 m0 + 2 m1 = r0, 2 m0 + 4 m1 = r1
        let (a, b) = (r[0], r[1]);
        r[0] = (4.0 * a - 2.0 * b) / 12.0;
        r[1] = (4.0 * b - 2.0 * a) / 12.0;
        return;
    }
    // Sherman-Morrison on tridiag(1, 4, 1) with corner ones:
    // A = T + u vᵀ, u = (g, 0, ..., 0, 1), v = (1, 0, ..., 0, 1/g)
    let g = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= g;
    diag[n - 1] -= 1.0 / g;
    let thomas = |d: &mut [f64]| {
        let mut c = vec![0.0; n];
        let mut denom = diag[0];
        c[0] = 1.0 / denom;
        d[0] /= denom;
        for i in 1..n {
            denom = diag[i] - c[i - 1];
            c[i] = 1.0 / denom;
            d[i] = (d[i] - d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
    };
    thomas(r);
    let mut u = vec![0.0; n];
    u[0] = g;
    u[n - 1] = 1.0;
    thomas(&mut u);
    let fac = (r[0] + r[n - 1] / g) / (1.0 + u[0] + u[n - 1] / g);
    for i in 0..n {
        r[i] -= fac * u[i];
    }
}

impl PeriodicSpline {
    /// Interpolate `y` at knots `0, dt, 2 dt, ...`; the period is `y.len() dt`.
    pub fn new(y: Vec<f64>, dt: f64) -> Self {
        let n = y.len();
        assert!(n >= 1 && dt > 0.0, "periodic spline needs data and a positive spacing");
        let mut m: Vec<f64> = (0..n)
            .map(|i| 6.0 * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]) / (dt * dt))
            .collect();
        solve_cyclic_141(&mut m);
        Self { dt, y, m }
    }

    pub fn period(&self) -> f64 {
        self.dt * self.y.len() as f64
    }

    pub fn knot_spacing(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> (usize, usize, f64, f64) {
        let n = self.y.len();
        let p = self.period();
        let mut tt = t.rem_euclid(p);
        if tt >= p {
            tt = 0.0;
        }
        let mut i = (tt / self.dt).floor() as usize;
        if i >= n {
            i = n - 1;
        }
        let a = tt - i as f64 * self.dt;
        let b = self.dt - a;
        (i, (i + 1) % n, a, b)
    }

    /// Value and first three derivatives at `t` (wrapped into the period).
    pub fn eval_all(&self, t: f64) -> [f64; 4] {
        let (i, j, a, b) = self.locate(t);
        let h = self.dt;
        let (mi, mj, yi, yj) = (self.m[i], self.m[j], self.y[i], self.y[j]);
        let v = mi * b * b * b / (6.0 * h) + mj * a * a * a / (6.0 * h) + (yi - mi * h * h / 6.0) * b / h
            + (yj - mj * h * h / 6.0) * a / h;
        let d1 = -mi * b * b / (2.0 * h) + mj * a * a / (2.0 * h) + (yj - yi) / h - (mj - mi) * h / 6.0;
        let d2 = (mi * b + mj * a) / h;
        let d3 = (mj - mi) / h;
        [v, d1, d2, d3]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t)[0]
    }
}
