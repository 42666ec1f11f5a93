//! Jacobi-preconditioned conjugate gradient for the assembled SPD systems.
//!
//! Sequential with a fixed reduction order, so iteration counts and
//! residuals are bit-stable run to run.

use crate::error::SolveError;
use crate::solver::system::CsrMatrix;

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Convergence when ||b - Ax|| <= rel_tol * ||b||.
    pub rel_tol: f64,
    /// Cap on iterations as a multiple of the unknown count.
    pub max_iter_factor: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter_factor: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CgReport {
    pub iterations: usize,
    /// Final relative residual ||r|| / ||b||.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves A·x = b in place, starting from the initial guess in `x`.
pub fn solve(
    matrix: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    opts: &CgOptions,
) -> Result<CgReport, SolveError> {
    let n = matrix.n;
    if n == 0 {
        return Ok(CgReport::default());
    }

    let diag = matrix.diagonal();
    let mut inv_diag = vec![0.0; n];
    for (i, d) in diag.iter().enumerate() {
        if *d <= 0.0 || !d.is_finite() {
            return Err(SolveError::NonFinite {
                context: format!("matrix diagonal entry {i} = {d}"),
            });
        }
        inv_diag[i] = 1.0 / d;
    }

    let norm_b = dot(b, b).sqrt();
    if norm_b == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport { iterations: 0, residual: 0.0 });
    }

    let mut r = vec![0.0; n];
    matrix.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    let max_iter = opts.max_iter_factor.saturating_mul(n).max(1);
    let target = opts.rel_tol * norm_b;
    let mut residual = dot(&r, &r).sqrt();

    for iter in 0..=max_iter {
        if residual <= target {
            return Ok(CgReport { iterations: iter, residual: residual / norm_b });
        }
        if iter == max_iter {
            break;
        }

        matrix.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(SolveError::NonFinite {
                context: format!("p'Ap = {pap} at iteration {iter} (matrix not SPD?)"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        residual = dot(&r, &r).sqrt();
    }

    Err(SolveError::CgNonConvergence {
        iterations: max_iter,
        residual: residual / norm_b,
        tolerance: opts.rel_tol,
    })
}
