//! GMRES with a max-norm stopping rule, full by default.

use crate::error::{KfbiError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Stop once the max-norm residual falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Krylov dimension before restarting; `None` keeps the full basis.
    pub restart: Option<usize>,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, restart: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Max-norm residual before the first iteration and after each one.
    pub history: Vec<f64>,
}

impl GmresResult {
    pub fn residual(&self) -> f64 {
        *self.history.last().unwrap_or(&0.0)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` from `x0`. The residual after step `k` is
/// `V_{k+1}(β e₁ - H̄ y_k)`, formed explicitly so the max norm is exact up
/// to the loss of orthogonality in the basis.
pub fn gmres<F>(mut apply: F, b: &[f64], x0: &[f64], opts: &GmresOptions) -> Result<GmresResult>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = b.len();
    if x0.len() != n {
        return Err(KfbiError::Config(format!("initial guess has length {}, expected {n}", x0.len())));
    }
    let residual_of = |apply: &mut F, x: &[f64]| -> Result<Vec<f64>> {
        let mut r = b.to_vec();
        if x.iter().any(|v| *v != 0.0) {
            let ax = apply(x)?;
            for (r, a) in r.iter_mut().zip(&ax) {
                *r -= a;
            }
        }
        Ok(r)
    };
    let mut x = x0.to_vec();
    let mut r0 = residual_of(&mut apply, &x)?;
    let mut history = vec![max_abs(&r0)];
    if history[0] < opts.tol || n == 0 {
        return Ok(GmresResult { x, iterations: 0, history });
    }
    let mut iterations = 0;
    loop {
        let budget = opts.max_iter.saturating_sub(iterations);
        let steps = opts.restart.unwrap_or(budget).min(budget).min(n);
        if steps == 0 {
            let residual = *history.last().unwrap();
            return Err(KfbiError::GmresConvergence { iterations, residual, tol: opts.tol });
        }
        let (done, stalled) = cycle(&mut apply, &r0, &mut x, steps, opts.tol, &mut history)?;
        iterations += done;
        if *history.last().unwrap() < opts.tol {
            return Ok(GmresResult { x, iterations, history });
        }
        if stalled {
            let residual = *history.last().unwrap();
            return Err(KfbiError::GmresConvergence { iterations, residual, tol: opts.tol });
        }
        r0 = residual_of(&mut apply, &x)?;
    }
}

/// One Arnoldi cycle of at most `steps` iterations from residual `r0`;
/// updates `x` and returns the steps taken and whether the basis broke down
/// without reaching the tolerance.
fn cycle<F>(
    apply: &mut F,
    r0: &[f64],
    x: &mut [f64],
    steps: usize,
    tol: f64,
    history: &mut Vec<f64>,
) -> Result<(usize, bool)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = r0.len();
    let beta = dot(r0, r0).sqrt();
    let mut v: Vec<Vec<f64>> = vec![r0.iter().map(|x| x / beta).collect()];
    // columns of the upper Hessenberg matrix, unrotated and rotated
    let mut hbar: Vec<Vec<f64>> = Vec::new();
    let mut rot: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut y = Vec::new();
    let mut taken = 0;
    let mut breakdown = false;
    for k in 0..steps {
        let mut w = apply(&v[k])?;
        let mut col = vec![0.0; k + 2];
        for (i, vi) in v.iter().enumerate() {
            let hij = dot(&w, vi);
            col[i] = hij;
            for (wj, vj) in w.iter_mut().zip(vi) {
                *wj -= hij * vj;
            }
        }
        let hn = dot(&w, &w).sqrt();
        col[k + 1] = hn;
        hbar.push(col.clone());
        for (i, &(c, s)) in cs.iter().enumerate() {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = c * a + s * b;
            col[i + 1] = -s * a + c * b;
        }
        let (a, bb) = (col[k], col[k + 1]);
        let den = a.hypot(bb);
        let (c, s) = if den == 0.0 { (1.0, 0.0) } else { (a / den, bb / den) };
        col[k] = den;
        col[k + 1] = 0.0;
        cs.push((c, s));
        g.push(-s * g[k]);
        g[k] *= c;
        rot.push(col);
        breakdown = hn <= 1e-14 * beta;
        if !breakdown {
            v.push(w.iter().map(|x| x / hn).collect());
        }

        // y from the rotated triangle, then the explicit residual
        let m = k + 1;
        y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = g[i];
            for j in i + 1..m {
                s -= rot[j][i] * y[j];
            }
            y[i] = s / rot[i][i];
        }
        let mut coef = vec![0.0; m + 1];
        coef[0] = beta;
        for (j, yj) in y.iter().enumerate() {
            for (i, h) in hbar[j].iter().enumerate() {
                coef[i] -= h * yj;
            }
        }
        let mut r = vec![0.0; n];
        for (ci, vi) in coef.iter().zip(&v) {
            for (rr, vv) in r.iter_mut().zip(vi) {
                *rr += ci * vv;
            }
        }
        let res = max_abs(&r);
        history.push(res);
        taken = m;
        if res < tol || breakdown {
            break;
        }
    }
    for (yj, vj) in y.iter().zip(&v) {
        for (xx, vv) in x.iter_mut().zip(vj) {
            *xx += yj * vv;
        }
    }
    Ok((taken, breakdown && *history.last().unwrap() >= tol))
}

/// `max |A(a x + b y) - a A x - b A y|` relative to the output scale.
pub fn linearity_defect<F>(mut apply: F, x: &[f64], y: &[f64], a: f64, b: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let z: Vec<f64> = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
    let (az, ax, ay) = (apply(&z)?, apply(x)?, apply(y)?);
    let mut d: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..z.len() {
        d = d.max((az[i] - a * ax[i] - b * ay[i]).abs());
        scale = scale.max((a * ax[i]).abs()).max((b * ay[i]).abs());
    }
    Ok(if scale > 0.0 { d / scale } else { d })
}
