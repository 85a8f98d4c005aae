//! The extremal-support basis of `C_a`.
//!
//! `psi_a` is supported on `[-a, a]` and its inverse transform on
//! `[-a, a+1-r]`; the modulates `xi^{-kx} psi_a` for `0 <= k < r` slide the
//! transform support along and span `C_a`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dft::{dft, idft, root_of_unity};
use crate::error::{Error, Result};
use crate::qseries::{gaussian_binomial, xi_pochhammer, xi_pow};
use crate::spectral::{residue_class, SpectralData};
use crate::zmod::{DiscreteInterval, GridFunction, GridSize, SUPPORT_TOL};

/// Relative singular-value cut used by the numerical kernel computations.
pub const KERNEL_REL_TOL: f64 = 1e-9;

fn check_basis_range(n: GridSize, a: usize) -> Result<()> {
    let (m, _) = residue_class(n.get());
    if a < m || 2 * a + 1 > n.get() {
        return Err(Error::OutOfRange(format!(
            "extremal basis needs m <= a <= (N-1)/2 with m={m}; got N={}, a={a}",
            n.get()
        )));
    }
    Ok(())
}

/// `sin(pi p / N)` with `p` reduced to `[0, N)` first.
fn sin_pi_over(n: usize, p: i64) -> f64 {
    let nn = n as i64;
    let q = p.rem_euclid(2 * nn);
    let s = (std::f64::consts::PI * q.rem_euclid(nn) as f64 / n as f64).sin();
    if q >= nn {
        -s
    } else {
        s
    }
}

/// `psi_a(x) = e^{i pi (r-1) x / N} prod_{k=1}^{N-2a-1} sin(pi (a+k-x) / N)` on
/// `[-a, a]`, zero elsewhere.
pub fn psi(n: GridSize, a: usize) -> Result<GridFunction> {
    check_basis_range(n, a)?;
    let nn = n.get();
    let r = 4 * a as i64 + 2 - nn as i64;
    let s = nn - 2 * a - 1;
    let iv = DiscreteInterval::new(n, a)?;
    Ok(GridFunction::from_interval(&iv, |x| {
        let mag: f64 = (1..=s as i64)
            .map(|k| sin_pi_over(nn, a as i64 + k - x))
            .product();
        root_of_unity(nn, (r - 1) as f64 * x as f64 / 2.0) * mag
    }))
}

/// The same function through `(-2i)^{-s} xi^{-Ns/4 + ax} (xi^{a+1-x}; xi)_s`,
/// `s = N - 2a - 1`.
pub fn psi_q_pochhammer(n: GridSize, a: usize) -> Result<GridFunction> {
    check_basis_range(n, a)?;
    let nn = n.get();
    let s = nn - 2 * a - 1;
    let lead =
        Complex64::new(0.0, -2.0).powi(-(s as i32)) * root_of_unity(nn, -((nn * s) as f64) / 4.0);
    let iv = DiscreteInterval::new(n, a)?;
    Ok(GridFunction::from_interval(&iv, |x| {
        lead * xi_pow(n, a as i64 * x) * xi_pochhammer(n, a as i64 + 1 - x, s)
    }))
}

/// Closed form of the inverse transform `F^{-1}[xi^{-kx} psi_a]`.
///
/// With `s = N - 2a - 1` and `j = y + a - k`, the value at `y` is
/// `(-2i)^{-s} xi^{-Ns/4} (-1)^j xi^{j(a+1) + j(j-1)/2} binom(s, j)_xi` for
/// `0 <= j <= s` and zero otherwise, so the support is `[-a+k, a+1-r+k]`.
pub fn psi_hat_closed_form(n: GridSize, a: usize, k: usize) -> Result<GridFunction> {
    check_basis_range(n, a)?;
    let nn = n.get();
    let r = 4 * a + 2 - nn;
    if k >= r {
        return Err(Error::OutOfRange(format!(
            "need 0 <= k < r = {r}; got k={k}"
        )));
    }
    let s = nn - 2 * a - 1;
    let lead =
        Complex64::new(0.0, -2.0).powi(-(s as i32)) * root_of_unity(nn, -((nn * s) as f64) / 4.0);
    let mut out = GridFunction::zeros(n);
    for j in 0..=s as i64 {
        let y = j - a as i64 + k as i64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let v = lead
            * sign
            * xi_pow(n, j * (a as i64 + 1) + j * (j - 1) / 2)
            * gaussian_binomial(n, s, j as usize)?;
        out.set(y, v);
    }
    Ok(out)
}

/// The basis `xi^{-kx} psi_a(x)`, `0 <= k < r`, of `C_a`.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalBasis {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    pub r: usize,
    pub psi: GridFunction,
    pub basis: Vec<GridFunction>,
}

impl ExtremalBasis {
    pub fn new(n: GridSize, a: usize) -> Result<Self> {
        let p = psi(n, a)?;
        let r = 4 * a + 2 - n.get();
        let basis = (0..r as i64)
            .map(|k| p.modulated(|x| xi_pow(n, -k * x)))
            .collect();
        Ok(ExtremalBasis {
            n: n.get(),
            a,
            r,
            psi: p,
            basis,
        })
    }

    /// Signed endpoints `[-a+k, a+1-r+k]` of the support of `F^{-1}` of the
    /// `k`-th basis element.
    pub fn inverse_transform_support(&self, k: usize) -> (i64, i64) {
        let (a, r, k) = (self.a as i64, self.r as i64, k as i64);
        (-a + k, a + 1 - r + k)
    }
}

/// Signed support of `f` as a cyclic arc `(start, len)` if it is one
/// contiguous interval on the circle.
pub fn support_arc(f: &GridFunction, tol: f64) -> Result<Option<(i64, usize)>> {
    let n = f.grid();
    let nn = n.get();
    let supp = f.support(tol)?;
    let mut mask = vec![false; nn];
    for &k in &supp {
        mask[k] = true;
    }
    if supp.len() == nn {
        return Ok(Some((n.signed(0), nn)));
    }
    // An arc starts where the previous point is outside the support.
    let starts: Vec<usize> = (0..nn)
        .filter(|&k| mask[k] && !mask[(k + nn - 1) % nn])
        .collect();
    Ok(match starts.as_slice() {
        [s] => Some((n.signed(*s), supp.len())),
        _ => None,
    })
}

fn singular_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// The `(N-2a-1) x (2a+1)` block of `F_N` with rows outside `[-a, a]` and
/// columns inside it; `C_a` is its kernel.
fn ca_constraint_matrix(n: GridSize, a: usize) -> Result<DMatrix<Complex64>> {
    let iv = DiscreteInterval::new(n, a)?;
    let rows = iv.complement_indices();
    let cols: Vec<i64> = iv.signed_points().collect();
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |p, q| {
        xi_pow(n, -(rows[p] as i64) * cols[q])
    }))
}

/// `dim C_a` from singular values of the constraint matrix, counting
/// `sigma <= rel_tol * sigma_max` as zero.
///
/// Diagnostic only: the smallest genuine singular values fall below `1e-9`
/// relative for `N` in the forties, so the count drifts for larger `N`.
pub fn dim_ca_svd(n: GridSize, a: usize, rel_tol: f64) -> Result<usize> {
    let m = ca_constraint_matrix(n, a)?;
    Ok(m.ncols() - singular_rank(&m, rel_tol))
}

/// `dim C_a` as `(2a+1) - rank`, with the rank computed exactly over
/// prime fields `F_p`, `p = 1 mod N`, where `xi` maps to a primitive `N`-th
/// root of unity `omega`.
///
/// Reduction mod a prime can only lower the rank, so each modular rank is a
/// certified lower bound; the maximum over two primes is returned.
pub fn dim_ca_rank_oracle(n: GridSize, a: usize) -> Result<usize> {
    let iv = DiscreteInterval::new(n, a)?;
    let rows = iv.complement_indices();
    let cols: Vec<i64> = iv.signed_points().collect();
    let nn = n.get() as u64;
    let rank = primes_one_mod(nn, 2)
        .into_iter()
        .map(|p| {
            let omega = pow_mod(primitive_root(p), (p - 1) / nn, p);
            let mut m: Vec<Vec<u64>> = rows
                .iter()
                .map(|&j| {
                    cols.iter()
                        .map(|&k| {
                            let e = (-(j as i64) * k).rem_euclid(nn as i64) as u64;
                            pow_mod(omega, e, p)
                        })
                        .collect()
                })
                .collect();
            rank_mod_p(&mut m, p)
        })
        .max()
        .unwrap_or(0);
    Ok(cols.len() - rank)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The first `count` primes `p = 1 mod n` above `2^20`; all stay below
/// `2^32` so products fit in `u64`.
fn primes_one_mod(n: u64, count: usize) -> Vec<u64> {
    let start = (1u64 << 20) / n + 1;
    (start..)
        .map(|t| t * n + 1)
        .filter(|&p| is_prime(p))
        .take(count)
        .collect()
}

fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            factors.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("every prime has a primitive root")
}

fn rank_mod_p(m: &mut [Vec<u64>], p: u64) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let factor = m[r][c] * inv % p;
                for cc in c..cols {
                    let sub = factor * m[rank][cc] % p;
                    m[r][cc] = (m[r][cc] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Dimension of `{g : supp g in supp f, supp Fg in supp Ff}`.
pub fn extremal_kernel_dim(f: &GridFunction) -> Result<usize> {
    let n = f.grid();
    let s = f.support(SUPPORT_TOL)?;
    let fh = dft(f);
    let sh = fh.support(SUPPORT_TOL)?;
    let outside: Vec<usize> = (0..n.get()).filter(|k| !sh.contains(k)).collect();
    let m = DMatrix::from_fn(outside.len(), s.len(), |p, q| {
        xi_pow(n, -((outside[p] * s[q]) as i64))
    });
    Ok(s.len() - singular_rank(&m, KERNEL_REL_TOL))
}

/// True iff every `g` with `supp g` inside `supp f` and `supp Fg` inside
/// `supp Ff` is a multiple of `f`.
pub fn is_extremal_support(f: &GridFunction) -> Result<bool> {
    Ok(extremal_kernel_dim(f)? == 1)
}

/// Support sizes of `f` and `Ff` against the classical uncertainty bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UncertaintyReport {
    pub support: usize,
    pub transform_support: usize,
    /// `|supp f| |supp Ff| >= N`.
    pub ds: bool,
    /// `|supp f| + |supp Ff| >= N + 1`, evaluated only for prime `N`.
    pub tao: Option<bool>,
}

pub fn uncertainty_check(f: &GridFunction) -> Result<UncertaintyReport> {
    let nn = f.grid().get();
    let support = f.support(SUPPORT_TOL)?.len();
    let transform_support = dft(f).support(SUPPORT_TOL)?.len();
    Ok(UncertaintyReport {
        support,
        transform_support,
        ds: support * transform_support >= nn,
        tao: is_prime(nn as u64).then_some(support + transform_support > nn),
    })
}

/// Orthogonal projector onto the span of `vectors`, discarding singular
/// directions below `rel_tol`.
pub fn span_projector(vectors: &[GridFunction], rel_tol: f64) -> Result<DMatrix<Complex64>> {
    let Some(first) = vectors.first() else {
        return Err(Error::Invalid("empty family has no span".into()));
    };
    let n = first.len();
    let m = DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j].values()[i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > rel_tol * max)
        .collect();
    let mut p = DMatrix::zeros(n, n);
    for k in keep {
        let col = u.column(k);
        p += col * col.adjoint();
    }
    Ok(p)
}

/// Frobenius distance between the projector onto the extremal basis and the
/// projector onto the `C_a` eigenvectors found by the spectral pipeline.
pub fn basis_projector_distance(n: GridSize, a: usize) -> Result<f64> {
    let basis = ExtremalBasis::new(n, a)?;
    let sd = SpectralData::compute(n, a)?;
    let rhos: Vec<GridFunction> = sd.simple.iter().map(|p| p.rho.clone()).collect();
    let p1 = span_projector(&basis.basis, KERNEL_REL_TOL)?;
    let p2 = span_projector(&rhos, KERNEL_REL_TOL)?;
    Ok((p1 - p2).norm())
}

/// Numerical inverse transform of the `k`-th basis element.
pub fn basis_inverse_transform(basis: &ExtremalBasis, k: usize) -> GridFunction {
    idft(&basis.basis[k])
}
