//! Index arithmetic on Z/NZ, discrete intervals `[-a, a]`, and the
//! [`GridFunction`] container.
//!
//! Values are always stored in canonical order `0, 1, ..., N-1`. Signed
//! indices `x` are mapped through `x mod N` at the API boundary.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative threshold used by [`GridFunction::support`] when no explicit
/// tolerance is given.
pub const SUPPORT_TOL: f64 = 1e-10;

/// The modulus `N >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridSize(usize);

impl GridSize {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGridSize(n));
        }
        Ok(GridSize(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Canonical representative of `x mod N` in `0..N`.
    #[inline]
    pub fn canonical(self, x: i64) -> usize {
        x.rem_euclid(self.0 as i64) as usize
    }

    /// Signed representative of `k` in `-floor(N/2) ..= ceil(N/2) - 1`.
    #[inline]
    pub fn signed(self, k: usize) -> i64 {
        let n = self.0;
        let k = k % n;
        if k < n.div_ceil(2) {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }
}

/// The discrete interval `[-a, a]` inside Z/NZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiscreteInterval {
    n: GridSize,
    a: usize,
}

impl DiscreteInterval {
    /// Requires `2a + 1 <= N` so the interval has `2a + 1` distinct residues.
    pub fn new(n: GridSize, a: usize) -> Result<Self> {
        if 2 * a + 1 > n.get() {
            return Err(Error::InvalidInterval { n: n.get(), a });
        }
        Ok(DiscreteInterval { n, a })
    }

    pub fn grid(&self) -> GridSize {
        self.n
    }

    pub fn half_width(&self) -> usize {
        self.a
    }

    pub fn len(&self) -> usize {
        2 * self.a + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn complement_len(&self) -> usize {
        self.n.get() - self.len()
    }

    /// True iff `x mod N` equals `y mod N` for some `y` in `-a..=a`.
    pub fn contains(&self, x: i64) -> bool {
        let k = self.n.canonical(x);
        let a = self.a;
        k <= a || k >= self.n.get() - a
    }

    /// Signed points `-a, ..., a`.
    pub fn signed_points(&self) -> impl Iterator<Item = i64> {
        let a = self.a as i64;
        -a..=a
    }

    /// Canonical indices of the interval, ordered by signed index `-a..=a`.
    pub fn indices(&self) -> Vec<usize> {
        self.signed_points().map(|x| self.n.canonical(x)).collect()
    }

    /// Canonical indices of the complement arc `a+1, ..., N-a-1`.
    pub fn complement_indices(&self) -> Vec<usize> {
        (self.a + 1..self.n.get() - self.a).collect()
    }
}

/// Tests membership of a signed index in `[-a, a]`.
pub fn interval_membership(x: i64, interval: &DiscreteInterval) -> bool {
    interval.contains(x)
}

/// A complex-valued function on Z/NZ.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: GridSize,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(n: GridSize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n.get() {
            return Err(Error::SizeMismatch {
                expected: n.get(),
                found: values.len(),
            });
        }
        Ok(GridFunction { n, values })
    }

    pub fn from_real(n: GridSize, values: &[f64]) -> Result<Self> {
        Self::new(n, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(n: GridSize) -> Self {
        GridFunction {
            n,
            values: vec![Complex64::new(0.0, 0.0); n.get()],
        }
    }

    pub fn constant(n: GridSize, c: Complex64) -> Self {
        GridFunction {
            n,
            values: vec![c; n.get()],
        }
    }

    /// Indicator of the single point `x mod N`.
    pub fn delta(n: GridSize, x: i64) -> Self {
        let mut f = Self::zeros(n);
        f.values[n.canonical(x)] = Complex64::new(1.0, 0.0);
        f
    }

    /// Evaluates `g` on the signed points of `interval`, zero elsewhere.
    pub fn from_interval<F>(interval: &DiscreteInterval, mut g: F) -> Self
    where
        F: FnMut(i64) -> Complex64,
    {
        let n = interval.grid();
        let mut f = Self::zeros(n);
        for x in interval.signed_points() {
            f.values[n.canonical(x)] = g(x);
        }
        f
    }

    /// Evaluates `g` at every signed index of Z/NZ.
    pub fn from_signed_fn<F>(n: GridSize, mut g: F) -> Self
    where
        F: FnMut(i64) -> Complex64,
    {
        let values = (0..n.get()).map(|k| g(n.signed(k))).collect();
        GridFunction { n, values }
    }

    pub fn grid(&self) -> GridSize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at signed (or any integer) index `x`.
    pub fn at(&self, x: i64) -> Complex64 {
        self.values[self.n.canonical(x)]
    }

    pub fn set(&mut self, x: i64, v: Complex64) {
        let k = self.n.canonical(x);
        self.values[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Canonical indices whose magnitude exceeds `tol * max_j |f(j)|`.
    pub fn support(&self, tol: f64) -> Result<Vec<usize>> {
        let max = self.max_abs();
        if max == 0.0 {
            return Err(Error::ZeroFunction);
        }
        let cut = tol * max;
        Ok(self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > cut)
            .map(|(k, _)| k)
            .collect())
    }

    /// `sum_k f(k) * conj(g(k))`.
    pub fn inner_product(&self, other: &GridFunction) -> Result<Complex64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(f, g)| f * g.conj())
            .sum())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        GridFunction {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Normalizes to unit L2 norm. Fails on the zero function.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroFunction);
        }
        Ok(self.scaled(Complex64::new(1.0 / nrm, 0.0)))
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Pointwise product with `h(x)` evaluated at signed indices.
    pub fn modulated<F>(&self, mut h: F) -> Self
    where
        F: FnMut(i64) -> Complex64,
    {
        let n = self.n;
        GridFunction {
            n,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| v * h(n.signed(k)))
                .collect(),
        }
    }

    /// `x -> f(-x)`.
    pub fn reflected(&self) -> Self {
        let n = self.n;
        let values = (0..n.get())
            .map(|k| self.values[(n.get() - k) % n.get()])
            .collect();
        GridFunction { n, values }
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n.get(),
                found: other.n.get(),
            });
        }
        Ok(())
    }
}

/// Standalone form of [`GridFunction::support`].
pub fn support(f: &GridFunction, tol: f64) -> Result<Vec<usize>> {
    f.support(tol)
}

/// Standalone form of [`GridFunction::inner_product`].
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.inner_product(g)
}

#[derive(Serialize, Deserialize)]
struct GridFunctionRepr {
    #[serde(rename = "N")]
    n: usize,
    values: Vec<[f64; 2]>,
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GridFunctionRepr {
            n: self.n.get(),
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GridFunctionRepr::deserialize(deserializer)?;
        let n = GridSize::new(repr.n).map_err(D::Error::custom)?;
        let values = repr
            .values
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        GridFunction::new(n, values).map_err(D::Error::custom)
    }
}
