//! q-Pochhammer symbols and Gaussian binomials, with `q` usually the root of
//! unity `xi = e^{2 pi i / N}`.

use num_complex::Complex64;

use crate::dft::root_of_unity;
use crate::error::{Error, Result};
use crate::zmod::GridSize;

/// `xi^e` with `xi = e^{2 pi i / N}`, reducing `e` mod `N` first.
pub fn xi_pow(n: GridSize, e: i64) -> Complex64 {
    let nn = n.get() as i64;
    root_of_unity(n.get(), e.rem_euclid(nn) as f64)
}

/// `(z; q)_n = (1 - z)(1 - z q) ... (1 - z q^{n-1})`.
pub fn q_pochhammer(z: Complex64, q: Complex64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut t = z;
    for _ in 0..n {
        acc *= Complex64::new(1.0, 0.0) - t;
        t *= q;
    }
    acc
}

/// `(xi^e; xi)_n` with every power of `xi` reduced exactly.
pub fn xi_pochhammer(n: GridSize, e: i64, len: usize) -> Complex64 {
    (0..len as i64).fold(Complex64::new(1.0, 0.0), |acc, i| {
        acc * (Complex64::new(1.0, 0.0) - xi_pow(n, e + i))
    })
}

/// Gaussian binomial `binom(top, j)_xi = prod_{i=1}^{j} (1 - xi^{top+1-i}) / (1 - xi^i)`.
///
/// Only the product form is meaningful at a root of unity; it requires
/// `j < N` so that no denominator vanishes. Returns 0 for `j > top`.
pub fn gaussian_binomial(n: GridSize, top: usize, j: usize) -> Result<Complex64> {
    if j >= n.get() {
        return Err(Error::OutOfRange(format!(
            "Gaussian binomial at a root of unity needs j < N; got j={j}, N={}",
            n.get()
        )));
    }
    if j > top {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok((1..=j as i64).fold(one, |acc, i| {
        acc * (one - xi_pow(n, top as i64 + 1 - i)) / (one - xi_pow(n, i))
    }))
}

/// The function `x -> (-z)^x xi^{x(x-1)/2} binom(len, x)_xi` for
/// `0 <= x <= len`, zero elsewhere. Its DFT is `k -> (z xi^{-k}; xi)_len`.
pub fn q_binomial_expansion(n: GridSize, z: Complex64, len: usize) -> Result<Vec<Complex64>> {
    if len >= n.get() {
        return Err(Error::OutOfRange(format!(
            "need len < N; got len={len}, N={}",
            n.get()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n.get()];
    let mut zp = Complex64::new(1.0, 0.0);
    for (x, slot) in out.iter_mut().enumerate().take(len + 1) {
        let xi = x as i64;
        *slot = zp * xi_pow(n, xi * (xi - 1) / 2) * gaussian_binomial(n, len, x)?;
        zp *= -z;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::dft;
    use crate::zmod::GridFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize) -> GridSize {
        GridSize::new(n).unwrap()
    }

    #[test]
    fn empty_products() {
        assert_eq!(
            gaussian_binomial(g(7), 0, 0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            q_pochhammer(Complex64::new(3.0, 1.0), Complex64::new(0.5, 0.0), 0),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            gaussian_binomial(g(7), 2, 3).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(gaussian_binomial(g(7), 9, 7).is_err());
    }

    #[test]
    fn binomial_symmetry_and_pascal() {
        let n = g(11);
        for top in 1..10usize {
            for j in 1..top {
                let b = gaussian_binomial(n, top, j).unwrap();
                assert!((b - gaussian_binomial(n, top, top - j).unwrap()).norm() < 1e-12);
                // binom(top, j) = binom(top-1, j-1) + q^j binom(top-1, j)
                let rhs = gaussian_binomial(n, top - 1, j - 1).unwrap()
                    + xi_pow(n, j as i64) * gaussian_binomial(n, top - 1, j).unwrap();
                assert!((b - rhs).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn pochhammer_agrees_with_exact_powers() {
        let n = g(13);
        let xi = xi_pow(n, 1);
        for e in -5..5 {
            let a = q_pochhammer(xi_pow(n, e), xi, 9);
            let b = xi_pochhammer(n, e, 9);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn expansion_transforms_to_pochhammer() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for nn in 2..=16usize {
            let n = g(nn);
            for len in 0..nn {
                let z = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                let f = GridFunction::new(n, q_binomial_expansion(n, z, len).unwrap()).unwrap();
                let fh = dft(&f);
                for k in 0..nn {
                    let expect = q_pochhammer(z * xi_pow(n, -(k as i64)), xi_pow(n, 1), len);
                    assert!(
                        (fh.values()[k] - expect).norm() <= 1e-10,
                        "N={nn} len={len} k={k}"
                    );
                }
            }
        }
    }
}
