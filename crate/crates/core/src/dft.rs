//! The non-normalized discrete Fourier transform
//! `F_N f(k) = sum_j exp(-2 pi i j k / N) f(j)`, its inverse, and the
//! interval projections `P_a`, `P_a^perp`.
//!
//! With this convention `F_N^2 f(x) = N f(-x)`, `F_N^4 = N^2 id`, and the
//! eigenvalues of `F_N` are `+-sqrt(N)`, `+-i sqrt(N)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::zmod::{DiscreteInterval, GridFunction, GridSize};

/// A dense `N x N` complex operator on functions over Z/NZ.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicOperator {
    n: GridSize,
    entries: DMatrix<Complex64>,
}

impl CyclicOperator {
    pub fn from_matrix(n: GridSize, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != n.get() || entries.ncols() != n.get() {
            return Err(Error::SizeMismatch {
                expected: n.get(),
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(CyclicOperator { n, entries })
    }

    pub fn from_fn<F>(n: GridSize, f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        CyclicOperator {
            n,
            entries: DMatrix::from_fn(n.get(), n.get(), f),
        }
    }

    pub fn zeros(n: GridSize) -> Self {
        CyclicOperator {
            n,
            entries: DMatrix::zeros(n.get(), n.get()),
        }
    }

    pub fn identity(n: GridSize) -> Self {
        CyclicOperator {
            n,
            entries: DMatrix::identity(n.get(), n.get()),
        }
    }

    /// Diagonal (multiplication) operator `f(x) -> h(x) f(x)` with `h`
    /// evaluated at canonical indices.
    pub fn diagonal<F>(n: GridSize, mut h: F) -> Self
    where
        F: FnMut(usize) -> Complex64,
    {
        let mut m = DMatrix::zeros(n.get(), n.get());
        for k in 0..n.get() {
            m[(k, k)] = h(k);
        }
        CyclicOperator { n, entries: m }
    }

    pub fn grid(&self) -> GridSize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, v: Complex64) {
        self.entries[(row, col)] = v;
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n.get(),
                found: f.len(),
            });
        }
        let n = self.n.get();
        let x = f.values();
        let values = (0..n)
            .map(|i| (0..n).map(|j| self.entries[(i, j)] * x[j]).sum())
            .collect();
        GridFunction::new(self.n, values)
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &CyclicOperator) -> Result<CyclicOperator> {
        self.check_same(other)?;
        Ok(CyclicOperator {
            n: self.n,
            entries: &self.entries * &other.entries,
        })
    }

    pub fn add(&self, other: &CyclicOperator) -> Result<CyclicOperator> {
        self.check_same(other)?;
        Ok(CyclicOperator {
            n: self.n,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &CyclicOperator) -> Result<CyclicOperator> {
        self.check_same(other)?;
        Ok(CyclicOperator {
            n: self.n,
            entries: &self.entries - &other.entries,
        })
    }

    pub fn scaled(&self, c: Complex64) -> CyclicOperator {
        CyclicOperator {
            n: self.n,
            entries: &self.entries * c,
        }
    }

    pub fn pow(&self, k: u32) -> CyclicOperator {
        let mut out = CyclicOperator::identity(self.n);
        for _ in 0..k {
            out.entries = &out.entries * &self.entries;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries == self.entries.transpose()
    }

    /// Largest `|imag|` over all entries.
    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &CyclicOperator) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n.get(),
                found: other.n.get(),
            });
        }
        Ok(())
    }
}

/// `exp(2 pi i e / N)` for a real exponent `e`.
pub(crate) fn root_of_unity(n: usize, e: f64) -> Complex64 {
    let t = 2.0 * PI * e / n as f64;
    Complex64::new(t.cos(), t.sin())
}

/// `exp(-2 pi i (j k mod N) / N)`; reducing the exponent first keeps the
/// angle small.
fn kernel_entry(n: usize, j: usize, k: usize) -> Complex64 {
    let e = (j * k) % n;
    root_of_unity(n, -(e as f64))
}

/// The matrix of `F_N`: entry `(k, j) = exp(-2 pi i j k / N)`.
pub fn dft_matrix(n: GridSize) -> CyclicOperator {
    let nn = n.get();
    CyclicOperator::from_fn(n, |k, j| kernel_entry(nn, j, k))
}

/// The matrix of `F_N^{-1}`: `conj(F_N) / N`.
pub fn idft_matrix(n: GridSize) -> CyclicOperator {
    let nn = n.get();
    let scale = 1.0 / nn as f64;
    CyclicOperator::from_fn(n, |k, j| kernel_entry(nn, j, k).conj() * scale)
}

/// `F_N^k` for any integer `k`, built from `F_N` and `F_N^{-1}`.
pub fn dft_power(n: GridSize, k: i32) -> CyclicOperator {
    let base = if k >= 0 {
        dft_matrix(n)
    } else {
        idft_matrix(n)
    };
    base.pow(k.unsigned_abs())
}

pub fn dft(f: &GridFunction) -> GridFunction {
    dft_matrix(f.grid())
        .apply(f)
        .expect("operator built on the function's own grid")
}

pub fn idft(f: &GridFunction) -> GridFunction {
    idft_matrix(f.grid())
        .apply(f)
        .expect("operator built on the function's own grid")
}

/// `P_a f` (zero outside `[-a, a]`) or, with `complement`, `P_a^perp f`.
pub fn project_interval(
    f: &GridFunction,
    interval: &DiscreteInterval,
    complement: bool,
) -> Result<GridFunction> {
    if f.grid() != interval.grid() {
        return Err(Error::SizeMismatch {
            expected: interval.grid().get(),
            found: f.len(),
        });
    }
    let n = f.grid();
    let mut out = f.clone();
    for (k, v) in out.values_mut().iter_mut().enumerate() {
        if interval.contains(n.signed(k)) == complement {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

/// The projection `P_a` (or `P_a^perp`) as a diagonal operator.
pub fn projection_operator(interval: &DiscreteInterval, complement: bool) -> CyclicOperator {
    let n = interval.grid();
    CyclicOperator::diagonal(n, |k| {
        if interval.contains(n.signed(k)) != complement {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
