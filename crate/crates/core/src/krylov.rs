//! Linear solvers for the time-slab systems: unpreconditioned conjugate
//! gradients, restarted GMRES and a dense LU fallback.

use faer::linalg::solvers::Solve;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Outcome of an iterative solve. `history` holds the relative residual
/// after every iteration (entry 0 is the initial residual).
#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub method: &'static str,
    pub iterations: usize,
    pub relative_residual: f64,
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients for a symmetric positive definite operator. `x`
/// holds the initial guess on entry and the solution on exit. Stops once
/// ‖b − Ax‖ ≤ tol·‖b‖.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iterations: usize,
) -> Result<SolveStats> {
    let n = b.len();
    if x.len() != n {
        return Err(Error::Dimension(format!("cg: rhs has {n} entries, guess {}", x.len())));
    }
    let bnorm = norm(b);
    let mut history = Vec::new();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { method: "cg", iterations: 0, relative_residual: 0.0, history: vec![0.0] });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    history.push(rr.sqrt() / bnorm);
    let mut it = 0;
    while rr.sqrt() > tol * bnorm {
        if it == max_iterations {
            return Err(Error::NoConvergence { method: "cg", iterations: it, residual: rr.sqrt() / bnorm });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite(pap));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        it += 1;
        history.push(rr.sqrt() / bnorm);
    }
    Ok(SolveStats { method: "cg", iterations: it, relative_residual: rr.sqrt() / bnorm, history })
}

/// Restarted GMRES(m) with Givens rotations for general square operators.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iterations: usize,
) -> Result<SolveStats> {
    let n = b.len();
    if x.len() != n {
        return Err(Error::Dimension(format!("gmres: rhs has {n} entries, guess {}", x.len())));
    }
    let m = restart.max(1).min(n.max(1));
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { method: "gmres", iterations: 0, relative_residual: 0.0, history: vec![0.0] });
    }
    let mut history = Vec::new();
    let mut total = 0;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    loop {
        apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        if history.is_empty() {
            history.push(beta / bnorm);
        }
        if beta <= tol * bnorm {
            return Ok(SolveStats { method: "gmres", iterations: total, relative_residual: beta / bnorm, history });
        }
        if total >= max_iterations {
            return Err(Error::NoConvergence { method: "gmres", iterations: total, residual: beta / bnorm });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns, rotated in place to upper triangular form.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < max_iterations {
            apply(&basis[k], &mut w);
            let mut col = vec![0.0; k + 2];
            // modified Gram–Schmidt, applied twice for robustness
            for _ in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    col[j] += c;
                    for i in 0..n {
                        w[i] -= c * v[i];
                    }
                }
            }
            let wn = norm(&w);
            col[k + 1] = wn;
            for j in 0..k {
                let t = cs[j] * col[j] + sn[j] * col[j + 1];
                col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
                col[j] = t;
            }
            let d = col[k].hypot(col[k + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (col[k] / d, col[k + 1] / d) };
            col[k] = d;
            col[k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            cs.push(c);
            sn.push(s);
            h.push(col);
            k += 1;
            total += 1;
            history.push(g[k].abs() / bnorm);
            if g[k].abs() <= tol * bnorm || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k×k triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            if h[i][i] == 0.0 {
                return Err(Error::Singular);
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * basis[j][i];
            }
        }
    }
}

/// Dense LU with partial pivoting.
pub fn dense_solve(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "dense solve: {}x{} matrix, rhs of {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let dense = a.to_dense();
    let lu = dense.partial_piv_lu();
    let mut rhs = faer::Mat::from_fn(b.len(), 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<f64> = (0..b.len()).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}
