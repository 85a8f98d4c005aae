//! Periodic tridiagonal operators commuting with `F_N`.
//!
//! `J0` has diagonal `2 cos(2 pi k / N)` and unit off-diagonals, `J1` has zero
//! diagonal and off-diagonals `cos(pi (2k - 1) / N)`. For a half-width `a`,
//! `J = J1 - cos(pi (2a + 1) / N) J0` decouples `[-a, a]` from its complement
//! because its off-diagonal coefficient vanishes at `x = a` and `x = -a - 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dft::{dft_power, CyclicOperator};
use crate::error::{Error, Result};
use crate::zmod::GridSize;

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `cos(pi p / q)` with the reflections `cos(-t) = cos(t)`,
/// `cos(pi - t) = -cos(t)` applied exactly, so that symmetric arguments give
/// bitwise equal magnitudes and `cos(pi / 2) = 0`.
pub fn cos_pi_rational(p: i64, q: i64) -> f64 {
    assert!(q > 0, "denominator must be positive");
    let mut p = p.rem_euclid(2 * q);
    if p > q {
        p = 2 * q - p;
    }
    if 2 * p == q {
        0.0
    } else if 2 * p > q {
        -(PI * (q - p) as f64 / q as f64).cos()
    } else {
        (PI * p as f64 / q as f64).cos()
    }
}

/// `delta^k f(x) = f(x + k)`.
pub fn shift_operator(n: GridSize, k: i64) -> CyclicOperator {
    let mut op = CyclicOperator::zeros(n);
    for x in 0..n.get() {
        let col = n.canonical(x as i64 + k);
        let v = op.entry(x, col) + re(1.0);
        op.set_entry(x, col, v);
    }
    op
}

/// Multiplication by `exp(2 pi i k x / N)`.
pub fn modulation_operator(n: GridSize, k: i64) -> CyclicOperator {
    let nn = n.get() as i64;
    CyclicOperator::diagonal(n, |x| {
        let e = (k * x as i64).rem_euclid(nn) as f64;
        let t = 2.0 * PI * e / nn as f64;
        Complex64::new(t.cos(), t.sin())
    })
}

/// Adds `v` to the symmetric pair of entries linking `i` and `i + 1 mod N`.
fn add_link(op: &mut CyclicOperator, n: usize, i: usize, v: f64) {
    let j = (i + 1) % n;
    let cur = op.entry(i, j);
    op.set_entry(i, j, cur + re(v));
    if i != j {
        let cur = op.entry(j, i);
        op.set_entry(j, i, cur + re(v));
    }
}

/// `J0 = delta + delta^{-1} + 2 cos(2 pi x / N)`.
///
/// Links are accumulated, so for `N = 2` the single off-diagonal pair
/// receives both the interior and the corner contribution.
pub fn build_j0(n: GridSize) -> CyclicOperator {
    let nn = n.get();
    let mut op =
        CyclicOperator::diagonal(n, |k| re(2.0 * cos_pi_rational(2 * k as i64, nn as i64)));
    for i in 0..nn {
        add_link(&mut op, nn, i, 1.0);
    }
    op
}

/// Off-diagonal coefficient of `J1` linking `k - 1` and `k`.
fn j1_coefficient(n: usize, k: usize) -> f64 {
    cos_pi_rational(2 * k as i64 - 1, n as i64)
}

/// `J1`: zero diagonal, entries `(k-1, k) = (k, k-1) = cos(pi (2k-1) / N)` for
/// `k = 1..N-1`, corners `cos(pi (2N-1) / N)`.
pub fn build_j1(n: GridSize) -> CyclicOperator {
    let nn = n.get();
    let mut op = CyclicOperator::zeros(n);
    for k in 1..=nn {
        add_link(&mut op, nn, k - 1, j1_coefficient(nn, k));
    }
    op
}

/// The pair `(N, a)` defining `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommutantSpec {
    pub n: GridSize,
    pub a: usize,
}

impl CommutantSpec {
    /// Accepts any `0 <= a <= (N-1)/2`.
    pub fn new(n: GridSize, a: usize) -> Result<Self> {
        if 2 * a + 1 > n.get() {
            return Err(Error::InvalidInterval { n: n.get(), a });
        }
        Ok(CommutantSpec { n, a })
    }

    /// `cos(pi (2a + 1) / N)`.
    pub fn coupling(&self) -> f64 {
        cos_pi_rational(2 * self.a as i64 + 1, self.n.get() as i64)
    }

    /// Whether `a >= (N-2)/4`, the range where the spectral pairing holds.
    pub fn in_spectral_range(&self) -> bool {
        4 * self.a + 2 >= self.n.get()
    }

    pub fn coefficients(&self) -> CoefficientFunctions {
        CoefficientFunctions {
            n: self.n.get(),
            coupling: self.coupling(),
        }
    }
}

/// The coefficients of `J = A(x) delta + B(x) + A(x-1) delta^{-1}`.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientFunctions {
    n: usize,
    coupling: f64,
}

impl CoefficientFunctions {
    /// `A(x) = cos(pi (2x + 1) / N) - cos(pi (2a + 1) / N)`.
    pub fn a(&self, x: i64) -> f64 {
        cos_pi_rational(2 * x + 1, self.n as i64) - self.coupling
    }

    /// `B(x) = -2 cos(pi (2a + 1) / N) cos(2 pi x / N)`.
    pub fn b(&self, x: i64) -> f64 {
        -2.0 * self.coupling * cos_pi_rational(2 * x, self.n as i64)
    }
}

/// `J = J1 - cos(pi (2a + 1) / N) J0`.
pub fn build_j(spec: &CommutantSpec) -> CyclicOperator {
    let j0 = build_j0(spec.n);
    let j1 = build_j1(spec.n);
    j1.sub(&j0.scaled(re(spec.coupling()))).expect("same grid")
}

/// `J` assembled from its difference-operator coefficients.
pub fn build_j_difference_form(spec: &CommutantSpec) -> CyclicOperator {
    let n = spec.n;
    let nn = n.get();
    let c = spec.coefficients();
    let mut op = CyclicOperator::diagonal(n, |k| re(c.b(k as i64)));
    for x in 0..nn {
        let xs = x as i64;
        // A(x) delta contributes to (x, x+1); A(x-1) delta^{-1} to (x, x-1).
        let up = n.canonical(xs + 1);
        let cur = op.entry(x, up);
        op.set_entry(x, up, cur + re(c.a(xs)));
        let down = n.canonical(xs - 1);
        let cur = op.entry(x, down);
        op.set_entry(x, down, cur + re(c.a(xs - 1)));
    }
    op
}

/// A fourth root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FourthRoot {
    One,
    I,
    MinusOne,
    MinusI,
}

impl FourthRoot {
    pub const ALL: [FourthRoot; 4] = [
        FourthRoot::One,
        FourthRoot::I,
        FourthRoot::MinusOne,
        FourthRoot::MinusI,
    ];

    /// Accepts `lambda` within `1e-12` of `1, i, -1, -i`.
    pub fn from_complex(lambda: Complex64) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| (r.value() - lambda).norm() < 1e-12)
            .ok_or(Error::NotFourthRoot)
    }

    pub fn value(self) -> Complex64 {
        match self {
            FourthRoot::One => re(1.0),
            FourthRoot::I => Complex64::new(0.0, 1.0),
            FourthRoot::MinusOne => re(-1.0),
            FourthRoot::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    /// `lambda^{-k}`.
    pub fn inverse_pow(self, k: u32) -> Complex64 {
        let inv = self.value().conj();
        (0..k).fold(re(1.0), |acc, _| acc * inv)
    }
}

/// `J0^(lambda) = sum_{k=0}^{3} lambda^{-k} F^{-k} delta F^k`.
///
/// Satisfies `F^{-1} J0^(lambda) F = lambda J0^(lambda)`; `J0^(1) = J0`.
pub fn build_twisted_j0(n: GridSize, lambda: FourthRoot) -> CyclicOperator {
    conjugation_average(&shift_operator(n, 1), |k| lambda.inverse_pow(k))
}

/// Checked variant taking an arbitrary complex `lambda`.
pub fn build_twisted_j0_checked(n: GridSize, lambda: Complex64) -> Result<CyclicOperator> {
    Ok(build_twisted_j0(n, FourthRoot::from_complex(lambda)?))
}

/// `sum_{k=0}^{3} weight(k) F^{-k} T F^k`.
fn conjugation_average<W>(t: &CyclicOperator, mut weight: W) -> CyclicOperator
where
    W: FnMut(u32) -> Complex64,
{
    let n = t.grid();
    let mut acc = CyclicOperator::zeros(n);
    for k in 0..4u32 {
        let conj = dft_power(n, -(k as i32))
            .compose(t)
            .and_then(|m| m.compose(&dft_power(n, k as i32)))
            .expect("same grid");
        acc = acc.add(&conj.scaled(weight(k))).expect("same grid");
    }
    acc
}

/// `1/2 e^{i pi / N} sum_k F^{-k} (e^{2 pi i x / N} delta) F^k`, an independent
/// route to `J1` (the modulation is read with the `/N`).
pub fn j1_from_conjugation_average(n: GridSize) -> CyclicOperator {
    let t = modulation_operator(n, 1)
        .compose(&shift_operator(n, 1))
        .expect("same grid");
    let phase = Complex64::from_polar(0.5, PI / n.get() as f64);
    conjugation_average(&t, |_| re(1.0)).scaled(phase)
}

/// `||AB - BA||_F / (||A||_F ||B||_F)`; zero when either operand is zero.
pub fn commutator_norm(op1: &CyclicOperator, op2: &CyclicOperator) -> Result<f64> {
    let ab = op1.compose(op2)?;
    let ba = op2.compose(op1)?;
    let denom = op1.frobenius_norm() * op2.frobenius_norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(ab.sub(&ba)?.frobenius_norm() / denom)
}
