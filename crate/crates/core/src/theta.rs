//! Lattice theta `theta(x, tau) = sum_n exp(i pi tau (x + nN)^2 / N)` and Jacobi
//! theta `vartheta(z, tau) = sum_n exp(i pi tau n^2 + 2 pi i n z)`, with
//! `tau`-derivatives taken term by term.
//!
//! The DFT of `x -> theta(x, tau)` on Z/NZ is `x -> vartheta(-x/N, tau/N)`, so
//! theta values on `[-a, a]` and their transforms obey the interpolation
//! formula. Cramer's rule on that formula in the `tau` variable writes each
//! kernel entry as a ratio of Wronskians.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dft::dft;
use crate::error::{Error, Result};
use crate::interp::build_kernel;
use crate::zmod::{GridFunction, GridSize};

/// Dropped terms must be below this magnitude.
pub const TAIL_TOL: f64 = 1e-18;

/// Hadamard-normalized determinant below which a Wronskian is degenerate.
pub const WRONSKIAN_DEGENERACY: f64 = 1e-12;

fn check_tau(tau: Complex64) -> Result<()> {
    if tau.im > 0.0 && tau.re.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau.im))
    }
}

/// `sum_n exp(i pi kappa tau (c + n h)^2 + 2 pi i n z) (i pi kappa (c + n h)^2)^order`
/// summed outward from the Gaussian peak until the terms on both sides fall
/// below [`TAIL_TOL`] and are decaying. Returns the sum and the number of
/// terms kept on each side.
fn gaussian_series(
    kappa: f64,
    c: f64,
    h: f64,
    z: Complex64,
    tau: Complex64,
    order: u32,
    min_terms: usize,
) -> Result<(Complex64, usize)> {
    check_tau(tau)?;
    let ipk = Complex64::new(0.0, PI * kappa);
    let term = |n: i64| {
        let u = c + n as f64 * h;
        let u2 = u * u;
        let e = ipk * tau * u2 + Complex64::new(0.0, 2.0 * PI * n as f64) * z;
        e.exp() * (ipk * u2).powu(order)
    };
    let center = (-c / h).round() as i64;
    let mut sum = term(center);
    let mut prev = [f64::INFINITY; 2];
    let mut k = 1usize;
    loop {
        let lo = term(center - k as i64);
        let hi = term(center + k as i64);
        sum += lo + hi;
        let mags = [lo.norm(), hi.norm()];
        let decaying = mags[0] <= prev[0] && mags[1] <= prev[1];
        if k >= min_terms && decaying && mags[0] < TAIL_TOL && mags[1] < TAIL_TOL {
            return Ok((sum, k));
        }
        prev = mags;
        k += 1;
        if k > 100_000 {
            return Err(Error::Convergence("theta series did not converge".into()));
        }
    }
}

/// Which series a [`ThetaSeries`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThetaKind {
    Lattice,
    Jacobi,
}

/// Evaluator for the lattice or Jacobi theta series. `min_terms` forces at
/// least that many terms on each side of the peak (used to check that the
/// adaptive truncation has converged).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaSeries {
    #[serde(rename = "N")]
    pub n: usize,
    pub kind: ThetaKind,
    pub min_terms: usize,
}

impl ThetaSeries {
    pub fn lattice(n: GridSize) -> Self {
        ThetaSeries {
            n: n.get(),
            kind: ThetaKind::Lattice,
            min_terms: 1,
        }
    }

    pub fn jacobi() -> Self {
        ThetaSeries {
            n: 1,
            kind: ThetaKind::Jacobi,
            min_terms: 1,
        }
    }

    pub fn with_min_terms(mut self, k: usize) -> Self {
        self.min_terms = k;
        self
    }

    /// Value and truncation `K` at `arg` (real `x` for lattice theta, complex
    /// `z` for Jacobi theta).
    pub fn eval_with_truncation(
        &self,
        arg: Complex64,
        tau: Complex64,
        order: u32,
    ) -> Result<(Complex64, usize)> {
        match self.kind {
            ThetaKind::Lattice => {
                let nf = self.n as f64;
                gaussian_series(
                    1.0 / nf,
                    arg.re,
                    nf,
                    Complex64::new(0.0, 0.0),
                    tau,
                    order,
                    self.min_terms,
                )
            }
            ThetaKind::Jacobi => gaussian_series(1.0, 0.0, 1.0, arg, tau, order, self.min_terms),
        }
    }

    pub fn eval(&self, arg: Complex64, tau: Complex64, order: u32) -> Result<Complex64> {
        Ok(self.eval_with_truncation(arg, tau, order)?.0)
    }
}

/// `d^order/dtau^order theta(x, tau)` on Z/NZ.
pub fn theta(n: GridSize, x: f64, tau: Complex64, order: u32) -> Result<Complex64> {
    ThetaSeries::lattice(n).eval(Complex64::new(x, 0.0), tau, order)
}

/// `d^order/dtau^order vartheta(z, tau)`.
pub fn jacobi_theta(z: Complex64, tau: Complex64, order: u32) -> Result<Complex64> {
    ThetaSeries::jacobi().eval(z, tau, order)
}

/// `theta_2(tau) = sum_n exp(i pi tau (n + 1/2)^2)`, differentiated `order` times.
pub fn theta2(tau: Complex64, order: u32) -> Result<Complex64> {
    Ok(gaussian_series(1.0, 0.5, 1.0, Complex64::new(0.0, 0.0), tau, order, 1)?.0)
}

/// `theta_3(tau) = vartheta(0, tau)`, differentiated `order` times.
pub fn theta3(tau: Complex64, order: u32) -> Result<Complex64> {
    jacobi_theta(Complex64::new(0.0, 0.0), tau, order)
}

/// `theta_4(tau) = vartheta(1/2, tau)`, differentiated `order` times.
pub fn theta4(tau: Complex64, order: u32) -> Result<Complex64> {
    jacobi_theta(Complex64::new(0.5, 0.0), tau, order)
}

/// `max_x |F[theta(., tau)](x) - vartheta(-x/N, tau/N)|`.
pub fn dft_theta_check(n: GridSize, tau: Complex64) -> Result<f64> {
    let nn = n.get();
    let vals = (0..nn)
        .map(|x| theta(n, x as f64, tau, 0))
        .collect::<Result<Vec<_>>>()?;
    let fh = dft(&GridFunction::new(n, vals)?);
    let mut worst: f64 = 0.0;
    for x in 0..nn {
        let z = Complex64::new(-(x as f64) / nn as f64, 0.0);
        let rhs = jacobi_theta(z, tau / nn as f64, 0)?;
        worst = worst.max((fh.values()[x] - rhs).norm());
    }
    Ok(worst)
}

/// A function of `tau` entering a Wronskian.
#[derive(Debug, Clone, Copy)]
enum WFun {
    /// `theta(x, tau)`.
    Lattice(f64),
    /// `vartheta(z, tau / N)`.
    JacobiScaled(f64),
}

fn wfun_derivative(n: GridSize, f: WFun, tau: Complex64, order: u32) -> Result<Complex64> {
    match f {
        WFun::Lattice(x) => theta(n, x, tau, order),
        WFun::JacobiScaled(z) => {
            let nf = n.get() as f64;
            Ok(jacobi_theta(Complex64::new(z, 0.0), tau / nf, order)? / nf.powi(order as i32))
        }
    }
}

/// Wronskian matrix `M[k][i] = d^k f_i / dtau^k`, rows rescaled to unit max
/// so that high derivative orders do not swamp the elimination.
fn wronskian_matrix(n: GridSize, funs: &[WFun], tau: Complex64) -> Result<DMatrix<Complex64>> {
    let m = funs.len();
    let mut w = DMatrix::zeros(m, m);
    for k in 0..m {
        for (i, &f) in funs.iter().enumerate() {
            w[(k, i)] = wfun_derivative(n, f, tau, k as u32)?;
        }
    }
    Ok(w)
}

fn row_scales(w: &DMatrix<Complex64>) -> Vec<f64> {
    (0..w.nrows())
        .map(|k| {
            let s = w.row(k).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if s > 0.0 {
                1.0 / s
            } else {
                1.0
            }
        })
        .collect()
}

fn scaled_det(mut w: DMatrix<Complex64>, scales: &[f64]) -> Complex64 {
    for (k, &s) in scales.iter().enumerate() {
        w.row_mut(k).scale_mut(s);
    }
    w.determinant()
}

/// `|det W| / prod_i ||column_i||` after row scaling; 0 for a singular
/// matrix, 1 for orthogonal columns.
fn hadamard_ratio(w: &DMatrix<Complex64>, scales: &[f64]) -> f64 {
    let mut s = w.clone();
    for (k, &c) in scales.iter().enumerate() {
        s.row_mut(k).scale_mut(c);
    }
    let bound: f64 = (0..s.ncols()).map(|i| s.column(i).norm()).product();
    if bound == 0.0 {
        return 0.0;
    }
    s.determinant().norm() / bound
}

/// Ratios `W(numerator columns) / W(denominator columns)` where the
/// numerator replaces column `slot` with `theta(x, tau)`.
fn cramer_ratio(
    n: GridSize,
    funs: &[WFun],
    slot: usize,
    x: f64,
    tau: Complex64,
) -> Result<Complex64> {
    let den = wronskian_matrix(n, funs, tau)?;
    let scales = row_scales(&den);
    let h = hadamard_ratio(&den, &scales);
    if h < WRONSKIAN_DEGENERACY {
        return Err(Error::DegenerateWronskian(h));
    }
    let mut num_funs = funs.to_vec();
    num_funs[slot] = WFun::Lattice(x);
    let num = wronskian_matrix(n, &num_funs, tau)?;
    Ok(scaled_det(num, &scales) / scaled_det(den, &scales))
}

/// One kernel entry recovered from Wronskians.
#[derive(Debug, Clone, Serialize)]
pub struct WronskianEntry {
    pub y: i64,
    pub x: usize,
    /// `[re, im]` of the ratio at each `tau`.
    pub v_ratios: Vec<[f64; 2]>,
    pub w_ratios: Vec<[f64; 2]>,
    pub v_kernel: [f64; 2],
    pub w_kernel: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct WronskianReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    pub symmetrized: bool,
    /// No exterior points, nothing to check.
    pub vacuous: bool,
    /// Largest relative spread of a ratio across the `tau` list.
    pub tau_variation: f64,
    /// Largest relative deviation from the eigen-data kernel.
    pub kernel_deviation: f64,
    pub entries: Vec<WronskianEntry>,
}

impl WronskianReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.vacuous || (self.tau_variation <= tol && self.kernel_deviation <= tol)
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn check_wronskian_inputs(n: GridSize, a: usize, taus: &[Complex64]) -> Result<()> {
    if taus.len() < 2 {
        return Err(Error::Invalid("need at least two tau values".into()));
    }
    for &t in taus {
        check_tau(t)?;
    }
    if n.get() > 6 {
        return Err(Error::OutOfRange(format!(
            "Wronskian checks are limited to N <= 6; got N={}",
            n.get()
        )));
    }
    if 2 * a + 1 > n.get() {
        return Err(Error::InvalidInterval { n: n.get(), a });
    }
    if 4 * a + 2 < n.get() {
        return Err(Error::OutOfRange(format!(
            "Wronskian kernels need C_a nontrivial (4a+2 >= N); got N={}, a={a}",
            n.get()
        )));
    }
    Ok(())
}

/// Recovers `v_y(x)`, `w_y(x)` as Wronskian ratios in `tau` over the
/// functions `theta(-a..a, tau)`, `vartheta(-a/N..a/N, tau/N)` with
/// `theta(x, tau)` in position `y+a+1` (for `v`) or `y+3a+2` (for `w`), then
/// checks `tau`-independence and agreement with the eigen-data kernel.
///
/// Both theta families are even, so the columns for `+-y` coincide once
/// `a >= 1` and the denominator vanishes identically; those instances fail
/// with [`Error::DegenerateWronskian`].
pub fn wronskian_kernel_check(
    n: GridSize,
    a: usize,
    taus: &[Complex64],
) -> Result<WronskianReport> {
    check_wronskian_inputs(n, a, taus)?;
    let nn = n.get();
    let nf = nn as f64;
    let ai = a as i64;
    let kernel = build_kernel(n, a)?;
    let mut report = WronskianReport {
        n: nn,
        a,
        symmetrized: false,
        vacuous: kernel.x.is_empty(),
        tau_variation: 0.0,
        kernel_deviation: 0.0,
        entries: Vec::new(),
    };
    if report.vacuous {
        return Ok(report);
    }
    let mut funs: Vec<WFun> = (-ai..=ai).map(|y| WFun::Lattice(y as f64)).collect();
    funs.extend((-ai..=ai).map(|y| WFun::JacobiScaled(y as f64 / nf)));
    for (p, y) in (-ai..=ai).enumerate() {
        for (q, &x) in kernel.x.iter().enumerate() {
            let xs = n.signed(x) as f64;
            let v_r = taus
                .iter()
                .map(|&t| cramer_ratio(n, &funs, p, xs, t))
                .collect::<Result<Vec<_>>>()?;
            let w_r = taus
                .iter()
                .map(|&t| cramer_ratio(n, &funs, 2 * a + 1 + p, xs, t))
                .collect::<Result<Vec<_>>>()?;
            // the w column holds vartheta(y/N) = DFT of theta at -y
            let v_k = kernel.v[p][q];
            let w_k = kernel.w[2 * a - p][q];
            record(&mut report, y, x, &v_r, &w_r, v_k, w_k);
        }
    }
    Ok(report)
}

fn record(
    report: &mut WronskianReport,
    y: i64,
    x: usize,
    v_r: &[Complex64],
    w_r: &[Complex64],
    v_k: Complex64,
    w_k: Complex64,
) {
    for rs in [v_r, w_r] {
        for r in &rs[1..] {
            report.tau_variation = report.tau_variation.max(rel(*r, rs[0]));
        }
    }
    for r in v_r {
        report.kernel_deviation = report.kernel_deviation.max(rel(*r, v_k));
    }
    for r in w_r {
        report.kernel_deviation = report.kernel_deviation.max(rel(*r, w_k));
    }
    report.entries.push(WronskianEntry {
        y,
        x,
        v_ratios: v_r.iter().copied().map(pair).collect(),
        w_ratios: w_r.iter().copied().map(pair).collect(),
        v_kernel: pair(v_k),
        w_kernel: pair(w_k),
    });
}

/// Even-part variant: Wronskians over `theta(0..a, tau)` and
/// `vartheta(0..a/N, tau/N)`, whose ratios give `v_0`, `w_0` and
/// `v_y + v_{-y}`, `w_y + w_{-y}` for `y > 0`. It is non-degenerate only when
/// those `2a + 2` functions are independent (for example `N = 2` and
/// `N = 6, a = 1`).
pub fn symmetrized_wronskian_check(
    n: GridSize,
    a: usize,
    taus: &[Complex64],
) -> Result<WronskianReport> {
    check_wronskian_inputs(n, a, taus)?;
    let nn = n.get();
    let nf = nn as f64;
    let kernel = build_kernel(n, a)?;
    let mut report = WronskianReport {
        n: nn,
        a,
        symmetrized: true,
        vacuous: kernel.x.is_empty(),
        tau_variation: 0.0,
        kernel_deviation: 0.0,
        entries: Vec::new(),
    };
    if report.vacuous {
        return Ok(report);
    }
    let mut funs: Vec<WFun> = (0..=a).map(|y| WFun::Lattice(y as f64)).collect();
    funs.extend((0..=a).map(|y| WFun::JacobiScaled(y as f64 / nf)));
    for y in 0..=a {
        for (q, &x) in kernel.x.iter().enumerate() {
            let xs = n.signed(x) as f64;
            let v_r = taus
                .iter()
                .map(|&t| cramer_ratio(n, &funs, y, xs, t))
                .collect::<Result<Vec<_>>>()?;
            let w_r = taus
                .iter()
                .map(|&t| cramer_ratio(n, &funs, a + 1 + y, xs, t))
                .collect::<Result<Vec<_>>>()?;
            let (pp, pm) = (a + y, a - y);
            let (v_k, w_k) = if y == 0 {
                (kernel.v[pp][q], kernel.w[pp][q])
            } else {
                (
                    kernel.v[pp][q] + kernel.v[pm][q],
                    kernel.w[pp][q] + kernel.w[pm][q],
                )
            };
            record(&mut report, y as i64, x, &v_r, &w_r, v_k, w_k);
        }
    }
    Ok(report)
}

/// Residuals of the `N = 2` theta identities at one `tau`, each relative to
/// the magnitude of its terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct N2Identities {
    pub tau: [f64; 2],
    /// `2(theta2'(2t) + theta3'(2t)) theta3(t/2) - 1/2 (theta2(2t) + theta3(2t)) theta3'(t/2)`.
    pub identity1: f64,
    /// The second identity as printed:
    /// `2 theta3'(2t)(theta2(t/2) - theta3(t/2)) - 1/2 theta3(2t)(theta2'(t/2) - theta3'(t/2))`.
    pub identity2_printed: f64,
    /// `W(theta3(2t), theta2(2t) - theta3(t/2))`, which follows from the
    /// kernel values `v_0(1) = -1`, `w_0(1) = 1`.
    pub identity2_corrected: f64,
    /// `theta3(t/2) - theta3(2t) - theta2(2t)`.
    pub landen1: f64,
    /// `theta3(2t) - theta2(t/2) + theta3(t/2)` as printed.
    pub landen2_printed: f64,
    /// `theta3(2t) - (theta3(t/2) + theta4(t/2)) / 2`.
    pub landen2_variant: f64,
}

impl N2Identities {
    /// The asserted identities: the first Wronskian identity, the corrected
    /// second one and the first Landen relation.
    pub fn max_asserted(&self) -> f64 {
        self.identity1
            .max(self.identity2_corrected)
            .max(self.landen1)
    }
}

fn rel_sum(terms: &[Complex64]) -> f64 {
    let s: Complex64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        s.norm() / scale
    }
}

pub fn n2_identities_check(tau: Complex64) -> Result<N2Identities> {
    check_tau(tau)?;
    let t2 = tau * 2.0;
    let th = tau / 2.0;
    let (a2, a2d) = (theta2(t2, 0)?, theta2(t2, 1)?);
    let (b2, b2d) = (theta3(t2, 0)?, theta3(t2, 1)?);
    let (ah, ahd) = (theta2(th, 0)?, theta2(th, 1)?);
    let (bh, bhd) = (theta3(th, 0)?, theta3(th, 1)?);
    let dh = theta4(th, 0)?;
    Ok(N2Identities {
        tau: [tau.re, tau.im],
        identity1: rel_sum(&[(a2d + b2d) * bh * 2.0, -(a2 + b2) * bhd * 0.5]),
        identity2_printed: rel_sum(&[b2d * (ah - bh) * 2.0, -b2 * (ahd - bhd) * 0.5]),
        identity2_corrected: rel_sum(&[b2 * (a2d * 2.0 - bhd * 0.5), -b2d * 2.0 * (a2 - bh)]),
        landen1: rel_sum(&[bh, -b2, -a2]),
        landen2_printed: rel_sum(&[b2, -ah, bh]),
        landen2_variant: rel_sum(&[b2, -(bh + dh) * 0.5]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize) -> GridSize {
        GridSize::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const TAUS: [Complex64; 3] = [
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(1.0, 1.0),
    ];

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(
            theta(g(3), 0.0, c(0.0, -1.0), 0),
            Err(Error::InvalidTau(_))
        ));
        assert!(jacobi_theta(c(0.0, 0.0), c(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn lattice_via_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tau = c(0.0, 1.0);
        for _ in 0..8 {
            let x: f64 = rng.random_range(-3.0..3.0);
            let lhs = theta(g(4), x, tau, 0).unwrap();
            let rhs = (Complex64::i() * PI * tau * x * x / 4.0).exp()
                * jacobi_theta(tau * x, tau * 4.0, 0).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn n2_lattice_is_theta_constants() {
        for tau in TAUS {
            assert!(
                (theta(g(2), 0.0, tau, 0).unwrap() - theta3(tau * 2.0, 0).unwrap()).norm() < 1e-14
            );
            assert!(
                (theta(g(2), 1.0, tau, 0).unwrap() - theta2(tau * 2.0, 0).unwrap()).norm() < 1e-14
            );
        }
    }

    #[test]
    fn jacobi_identity() {
        let (tau, z) = (c(0.0, 2.0), c(0.3, 0.0));
        let lhs = jacobi_theta(z / tau, -tau.inv(), 0).unwrap();
        let rhs = (Complex64::i() * PI * z * z / tau).exp()
            * (-Complex64::i() * tau).sqrt()
            * jacobi_theta(z, tau, 0).unwrap();
        assert!((lhs - rhs).norm() <= 1e-11);
        for tau in TAUS {
            let a = jacobi_theta(c(0.3, 0.1) + 1.0, tau, 0).unwrap();
            let b = jacobi_theta(c(0.3, 0.1), tau, 0).unwrap();
            assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn lattice_modular_transform() {
        let tau = c(0.0, 1.0);
        let n = 3.0;
        let lhs = theta(g(3), 1.0, -tau.inv(), 0).unwrap();
        let rhs = (-Complex64::i() * tau / n).sqrt()
            * jacobi_theta(c(-1.0 / n, 0.0), tau / n, 0).unwrap();
        assert!((lhs - rhs).norm() <= 1e-11);
    }

    #[test]
    fn dft_of_theta() {
        for nn in 2..=8 {
            for tau in TAUS {
                assert!(
                    dft_theta_check(g(nn), tau).unwrap() <= 1e-11,
                    "N={nn} tau={tau}"
                );
            }
        }
        // the same transform through the modular route
        let (n, tau) = (g(4), c(0.0, 1.0));
        for x in 0..4 {
            let route =
                (4.0 / (-Complex64::i() * tau)).sqrt() * theta(n, x as f64, -tau.inv(), 0).unwrap();
            let direct = jacobi_theta(c(-(x as f64) / 4.0, 0.0), tau / 4.0, 0).unwrap();
            assert!((route - direct).norm() <= 1e-11);
        }
    }

    #[test]
    fn periodicity() {
        for nn in 2..=7usize {
            let n = g(nn);
            let nf = nn as f64;
            for tau in TAUS {
                for x in 0..nn {
                    let xf = x as f64;
                    let base = theta(n, xf, tau, 0).unwrap();
                    assert!((theta(n, xf + nf, tau, 0).unwrap() - base).norm() <= 1e-12);
                    assert!((theta(n, xf, tau + 2.0 * nf, 0).unwrap() - base).norm() <= 1e-12);
                    if nn % 2 == 0 {
                        let sign = if x % 2 == 0 { 1.0 } else { -1.0 };
                        assert!((theta(n, xf, tau + nf, 0).unwrap() - base * sign).norm() <= 1e-12);
                    }
                }
            }
        }
        // shifting tau by N alone flips odd-x values for even N
        let v = theta(g(2), 1.0, c(0.0, 1.0), 0).unwrap();
        let w = theta(g(2), 1.0, c(2.0, 1.0), 0).unwrap();
        assert!((v + w).norm() <= 1e-12);
    }

    #[test]
    fn truncation_is_converged() {
        for nn in [2usize, 5, 8] {
            let s = ThetaSeries::lattice(g(nn));
            for tau in TAUS {
                for order in 0..4 {
                    let (v, k) = s.eval_with_truncation(c(1.0, 0.0), tau, order).unwrap();
                    let w = s
                        .with_min_terms(2 * k)
                        .eval(c(1.0, 0.0), tau, order)
                        .unwrap();
                    assert!((v - w).norm() <= 1e-14 * v.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        for tau in TAUS {
            let d = theta(g(3), 1.0, tau, 1).unwrap();
            let up = theta(g(3), 1.0, tau + c(0.0, h), 0).unwrap();
            let dn = theta(g(3), 1.0, tau - c(0.0, h), 0).unwrap();
            let fd = (up - dn) / c(0.0, 2.0 * h);
            assert!((d - fd).norm() <= 1e-7 * d.norm().max(1.0));
        }
    }

    #[test]
    fn higher_derivatives_match_richardson() {
        // d^k = d/dtau of the exact (k-1)-th derivative, by Richardson-extrapolated
        // central differences along Im tau
        let h = 1e-4;
        for nn in [2usize, 4, 6] {
            let n = g(nn);
            for tau in TAUS {
                for k in 1..=4u32 {
                    let cd = |s: f64| {
                        let up = theta(n, 1.0, tau + c(0.0, s), k - 1).unwrap();
                        let dn = theta(n, 1.0, tau - c(0.0, s), k - 1).unwrap();
                        (up - dn) / c(0.0, 2.0 * s)
                    };
                    let rich = (cd(h / 2.0) * 4.0 - cd(h)) / 3.0;
                    let exact = theta(n, 1.0, tau, k).unwrap();
                    assert!(
                        (rich - exact).norm() <= 1e-6 * exact.norm().max(1.0),
                        "N={nn} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn n2_wronskian_recovers_kernel() {
        let r = wronskian_kernel_check(g(2), 0, &TAUS).unwrap();
        assert!(r.passes(1e-8), "{r:?}");
        let e = &r.entries[0];
        assert!((e.v_ratios[0][0] + 1.0).abs() <= 1e-10);
        assert!((e.w_ratios[0][0] - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn odd_full_interval_is_vacuous() {
        let r = wronskian_kernel_check(g(3), 1, &TAUS).unwrap();
        assert!(r.vacuous && r.entries.is_empty());
    }

    #[test]
    fn paired_columns_make_wronskian_degenerate() {
        for (nn, a) in [(4, 1), (5, 1), (6, 1), (6, 2)] {
            let err = wronskian_kernel_check(g(nn), a, &TAUS).unwrap_err();
            assert!(matches!(err, Error::DegenerateWronskian(_)), "N={nn} a={a}");
        }
    }

    #[test]
    fn symmetrized_wronskian() {
        for (nn, a) in [(2, 0), (6, 1)] {
            let r = symmetrized_wronskian_check(g(nn), a, &TAUS).unwrap();
            assert!(r.passes(1e-8), "N={nn} a={a} {r:?}");
        }
        assert!(symmetrized_wronskian_check(g(4), 1, &TAUS).is_err());
    }

    #[test]
    fn wronskian_input_guards() {
        assert!(wronskian_kernel_check(g(7), 2, &TAUS).is_err());
        assert!(wronskian_kernel_check(g(2), 0, &TAUS[..1]).is_err());
    }

    #[test]
    fn n2_identities() {
        for tau in TAUS {
            let r = n2_identities_check(tau).unwrap();
            assert!(r.max_asserted() <= 1e-9, "{r:?}");
            assert!(r.landen2_variant <= 1e-12);
            assert!(r.identity2_printed > 1e-3);
            assert!(r.landen2_printed > 1e-3);
        }
        assert!(n2_identities_check(c(0.0, 1.0)).unwrap().landen1 <= 1e-12);
    }
}
