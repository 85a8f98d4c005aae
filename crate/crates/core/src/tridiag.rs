//! Eigensolver for real symmetric tridiagonal matrices.
//!
//! The primary path is the implicit-shift QL iteration with eigenvector
//! accumulation (EISPACK `tql2`). If its residuals are out of tolerance the
//! solver falls back to Sturm-sequence bisection followed by inverse
//! iteration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl TridiagonalEigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Which algorithm produced a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ImplicitQl,
    BisectionInverseIteration,
}

/// `|| T v - lambda v ||_2`.
pub fn residual(diag: &[f64], offdiag: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * v[i];
        if i > 0 {
            r += offdiag[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r += offdiag[i] * v[i + 1];
        }
        s += r * r;
    }
    s.sqrt()
}

/// Max-row-sum bound on `||T||`.
pub fn norm_bound(diag: &[f64], offdiag: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i].abs();
            if i > 0 {
                s += offdiag[i - 1].abs();
            }
            if i + 1 < n {
                s += offdiag[i].abs();
            }
            s
        })
        .fold(0.0, f64::max)
}

/// Flips each eigenvector so its first entry of non-negligible magnitude is
/// positive.
pub fn normalize_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let max = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if let Some(first) = col.iter().copied().find(|v| v.abs() > 1e-10 * max) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Decomposes the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `offdiag` (`offdiag.len() == diag.len() - 1`).
pub fn eigen_symmetric_tridiagonal(
    diag: &[f64],
    offdiag: &[f64],
) -> Result<(TridiagonalEigen, Method)> {
    let n = diag.len();
    if n == 0 {
        return Ok((
            TridiagonalEigen {
                values: vec![],
                vectors: DMatrix::zeros(0, 0),
            },
            Method::ImplicitQl,
        ));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::NotTridiagonal(format!(
            "diagonal length {n} with off-diagonal length {}",
            offdiag.len()
        )));
    }
    let scale = norm_bound(diag, offdiag).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    if let Ok(mut eig) = implicit_ql(diag, offdiag) {
        normalize_signs(&mut eig.vectors);
        if max_residual(diag, offdiag, &eig) <= tol {
            return Ok((eig, Method::ImplicitQl));
        }
    }
    let mut eig = bisection_inverse_iteration(diag, offdiag)?;
    normalize_signs(&mut eig.vectors);
    if max_residual(diag, offdiag, &eig) > tol {
        return Err(Error::Convergence(
            "residual above tolerance after bisection fallback".into(),
        ));
    }
    Ok((eig, Method::BisectionInverseIteration))
}

fn max_residual(diag: &[f64], offdiag: &[f64], eig: &TridiagonalEigen) -> f64 {
    (0..eig.len())
        .map(|k| residual(diag, offdiag, eig.values[k], &eig.vector(k)))
        .fold(0.0, f64::max)
}

/// Implicit QL with eigenvector accumulation, after `tql2` from EISPACK.
pub fn implicit_ql(diag: &[f64], offdiag: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(offdiag);
    let mut v = DMatrix::<f64>::identity(n, n);

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::Convergence(format!(
                        "implicit QL did not converge for eigenvalue {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * hk;
                        v[(k, i)] = c * v[(k, i)] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(TridiagonalEigen { values, vectors })
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let n = diag.len();
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let qq = if q.abs() < tiny { tiny } else { q };
        q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bisection for every eigenvalue followed by inverse iteration and a final
/// modified Gram-Schmidt pass.
pub fn bisection_inverse_iteration(diag: &[f64], offdiag: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    let bound = norm_bound(diag, offdiag);
    let lo0 = -bound - 1.0;
    let hi0 = bound + 1.0;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(diag, offdiag, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        values.push(0.5 * (lo + hi));
    }

    let scale = bound.max(f64::MIN_POSITIVE);
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        // Perturb the shift slightly so the shifted matrix stays invertible.
        let shift = lambda + 1e-14 * scale;
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7 + k * 3) % 5) as f64)
            .collect();
        for _ in 0..4 {
            x = solve_shifted(diag, offdiag, shift, &x);
            for j in 0..k {
                let dot: f64 = (0..n).map(|i| vectors[(i, j)] * x[i]).sum();
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi -= dot * vectors[(i, j)];
                }
            }
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::Convergence(format!(
                    "inverse iteration broke down at {k}"
                )));
            }
            x.iter_mut().for_each(|v| *v /= nrm);
        }
        for i in 0..n {
            vectors[(i, k)] = x[i];
        }
    }
    Ok(TridiagonalEigen { values, vectors })
}

/// Solves `(T - shift I) x = b` by Gaussian elimination with partial pivoting
/// on the tridiagonal band.
fn solve_shifted(diag: &[f64], offdiag: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = 1e-300;
    // Band storage: row i has (sub, main, sup, sup2) after pivoting.
    let mut sub = vec![0.0; n];
    let mut main: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut sup = vec![0.0; n];
    let mut sup2 = vec![0.0; n];
    let k = n.saturating_sub(1);
    sup[..k].copy_from_slice(&offdiag[..k]);
    if k > 0 {
        sub[1..].copy_from_slice(&offdiag[..k]);
    }
    let mut rhs = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if sub[i + 1].abs() > main[i].abs() {
            // swap rows i and i+1
            std::mem::swap(&mut main[i], &mut sub[i + 1]);
            std::mem::swap(&mut sup[i], &mut main[i + 1]);
            std::mem::swap(&mut sup2[i], &mut sup[i + 1]);
            rhs.swap(i, i + 1);
        }
        let piv = if main[i].abs() < tiny { tiny } else { main[i] };
        main[i] = piv;
        let factor = sub[i + 1] / piv;
        sub[i + 1] = 0.0;
        main[i + 1] -= factor * sup[i];
        sup[i + 1] -= factor * sup2[i];
        rhs[i + 1] -= factor * rhs[i];
    }
    if main[n - 1].abs() < tiny {
        main[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= sup[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= sup2[i] * x[i + 2];
        }
        x[i] = s / main[i];
    }
    x
}
