//! Reconstruction of `f` from `f` and `Ff` on `[-a, a]`.
//!
//! On each doubled eigenspace `span{phi_j, phi~_j}` the transform acts by
//! `[[alpha_j, beta_j], [beta_j, -alpha_j]]` with `|alpha_j|^2 + |beta_j|^2 = N`.
//! Solving that 2x2 action for the `phi~_j` coefficient gives the magic
//! functions `v_y`, `w_y`:
//!
//! `f(x) = sum_{y in [-a,a]} v_y(x) f(y) + w_y(x) Ff(y)` for `x` outside `[-a, a]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::{dft, dft_matrix, CyclicOperator};
use crate::error::{Error, Result};
use crate::spectral::{FourierEigenvalue, Parity, SpectralData};
use crate::zmod::{DiscreteInterval, GridFunction, GridSize};

/// How `F_N` acts on one doubled eigenspace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenspaceAction {
    pub j: usize,
    pub lambda: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub parity: Parity,
}

/// Computes `alpha_j = <F phi, phi>` and `beta_j = <F phi, phi~>` (both
/// vectors are unit) and checks the 2x2 action on `span{phi_j, phi~_j}`.
pub fn eigenspace_action(
    sd: &SpectralData,
    f: &CyclicOperator,
    j: usize,
) -> Result<EigenspaceAction> {
    let pair = sd
        .doubled
        .get(j)
        .ok_or_else(|| Error::OutOfRange(format!("doubled pair {j} of {}", sd.doubled.len())))?;
    let root = (sd.n.get() as f64).sqrt();
    let (phi, phit) = (&pair.phi, &pair.phi_tilde);
    let fphi = f.apply(phi)?;
    let alpha = fphi.inner_product(phi)? / phi.norm().powi(2);
    let beta = fphi.inner_product(phit)? / phit.norm().powi(2);
    if beta.norm() < 1e-10 * root {
        return Err(Error::BetaTooSmall {
            j,
            beta: beta.norm(),
        });
    }
    let fail = |reason: String| Error::EigenspaceAction { j, reason };

    let res1 = fphi
        .sub(&phi.scaled(alpha).add(&phit.scaled(beta))?)?
        .norm();
    let fphit = f.apply(phit)?;
    let res2 = fphit
        .sub(&phi.scaled(beta).sub(&phit.scaled(alpha))?)?
        .norm();
    let tol = 1e-9 * root;
    if res1 > tol || res2 > tol {
        return Err(fail(format!("2x2 action residual {:e}", res1.max(res2))));
    }
    let parity = if alpha.im.abs() <= tol && beta.im.abs() <= tol {
        Parity::Even
    } else if alpha.re.abs() <= tol && beta.re.abs() <= tol {
        Parity::Odd
    } else {
        return Err(fail(format!(
            "alpha={alpha}, beta={beta} are neither both real nor both imaginary"
        )));
    };
    Ok(EigenspaceAction {
        j,
        lambda: pair.lambda,
        alpha,
        beta,
        parity,
    })
}

/// `eigenspace_action` for every doubled pair.
pub fn all_actions(sd: &SpectralData) -> Result<Vec<EigenspaceAction>> {
    let f = dft_matrix(sd.n);
    (0..sd.doubled.len())
        .map(|j| eigenspace_action(sd, &f, j))
        .collect()
}

/// Tables `v[y][x]`, `w[y][x]` with `y` running over `[-a, a]` in signed order
/// and `x` over the complement `a+1, ..., N-a-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationKernel {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    /// Signed points of `[-a, a]`.
    pub y: Vec<i64>,
    /// Canonical exterior points.
    pub x: Vec<usize>,
    /// `max_j sqrt(N) / |beta_j|`.
    pub condition: f64,
    pub v: Vec<Vec<Complex64>>,
    pub w: Vec<Vec<Complex64>>,
}

/// `v_y(x) = sum_j (-alpha_j / beta_j) phi_j(y) phi~_j(x)` and
/// `w_y(x) = sum_j (1 / beta_j) phi_j(y) phi~_j(x)`.
pub fn magic_functions(
    actions: &[EigenspaceAction],
    sd: &SpectralData,
) -> Result<InterpolationKernel> {
    if actions.len() != sd.doubled.len() {
        return Err(Error::Invalid(format!(
            "{} actions for {} doubled pairs",
            actions.len(),
            sd.doubled.len()
        )));
    }
    let iv = sd.interval();
    let ys: Vec<i64> = iv.signed_points().collect();
    let xs = iv.complement_indices();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![vec![zero; xs.len()]; ys.len()];
    let mut w = vec![vec![zero; xs.len()]; ys.len()];
    let root = (sd.n.get() as f64).sqrt();
    let mut condition: f64 = 0.0;
    for (act, pair) in actions.iter().zip(&sd.doubled) {
        let inv_beta = act.beta.inv();
        let va = -act.alpha * inv_beta;
        condition = condition.max(root * inv_beta.norm());
        for (p, &y) in ys.iter().enumerate() {
            let py = pair.phi.at(y);
            for (q, &x) in xs.iter().enumerate() {
                let pt = py * pair.phi_tilde.values()[x];
                v[p][q] += va * pt;
                w[p][q] += inv_beta * pt;
            }
        }
    }
    Ok(InterpolationKernel {
        n: sd.n.get(),
        a: sd.a,
        y: ys,
        x: xs,
        condition,
        v,
        w,
    })
}

/// Spectral pipeline plus kernel for `(N, a)`.
pub fn build_kernel(n: GridSize, a: usize) -> Result<InterpolationKernel> {
    let sd = SpectralData::compute(n, a)?;
    magic_functions(&all_actions(&sd)?, &sd)
}

impl InterpolationKernel {
    fn check_inputs(&self, f_in: &[Complex64], fhat_in: &[Complex64]) -> Result<()> {
        for given in [f_in.len(), fhat_in.len()] {
            if given != self.y.len() {
                return Err(Error::SizeMismatch {
                    expected: self.y.len(),
                    found: given,
                });
            }
        }
        Ok(())
    }

    /// Exterior values `f(x)`, `x` in `self.x` order, from `f` and `Ff` on
    /// `[-a, a]` given in signed order.
    pub fn reconstruct(&self, f_in: &[Complex64], fhat_in: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_inputs(f_in, fhat_in)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.x.len()];
        for p in 0..self.y.len() {
            for (q, o) in out.iter_mut().enumerate() {
                *o += self.v[p][q] * f_in[p] + self.w[p][q] * fhat_in[p];
            }
        }
        Ok(out)
    }

    /// The whole function: the given interval values plus the reconstructed
    /// exterior.
    pub fn reconstruct_full(
        &self,
        f_in: &[Complex64],
        fhat_in: &[Complex64],
    ) -> Result<GridFunction> {
        let n = GridSize::new(self.n)?;
        let ext = self.reconstruct(f_in, fhat_in)?;
        let mut f = GridFunction::zeros(n);
        for (&y, &v) in self.y.iter().zip(f_in) {
            f.set(y, v);
        }
        for (&x, v) in self.x.iter().zip(ext) {
            f.values_mut()[x] = v;
        }
        Ok(f)
    }
}

/// Restriction of `f` to `[-a, a]` in signed order.
pub fn restrict(f: &GridFunction, interval: &DiscreteInterval) -> Vec<Complex64> {
    interval.signed_points().map(|y| f.at(y)).collect()
}

/// Exterior values of `Ff` from the same data:
/// `Ff(x) = sum_j phi~_j(x) / beta_j sum_y (N f(-y) - alpha_j Ff(y)) phi_j(y)`.
pub fn reconstruct_transform(
    sd: &SpectralData,
    actions: &[EigenspaceAction],
    f_in: &[Complex64],
    fhat_in: &[Complex64],
) -> Result<Vec<Complex64>> {
    let iv = sd.interval();
    let ys: Vec<i64> = iv.signed_points().collect();
    if f_in.len() != ys.len() || fhat_in.len() != ys.len() {
        return Err(Error::SizeMismatch {
            expected: ys.len(),
            found: f_in.len().min(fhat_in.len()),
        });
    }
    let nn = sd.n.get() as f64;
    let xs = iv.complement_indices();
    let a = sd.a as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
    for (act, pair) in actions.iter().zip(&sd.doubled) {
        let mut coef = Complex64::new(0.0, 0.0);
        for (p, &y) in ys.iter().enumerate() {
            // f(-y) sits at position of -y in signed order
            let f_neg = f_in[(a - y) as usize];
            coef += (f_neg * nn - act.alpha * fhat_in[p]) * pair.phi.at(y);
        }
        coef /= act.beta;
        for (q, &x) in xs.iter().enumerate() {
            out[q] += coef * pair.phi_tilde.values()[x];
        }
    }
    Ok(out)
}

/// Brute-force kernel: rows of the pseudo-inverse of
/// `f -> (f|[-a,a], Ff|[-a,a])` at the exterior points.
pub fn pseudo_inverse_kernel(
    n: GridSize,
    a: usize,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let iv = DiscreteInterval::new(n, a)?;
    let ys = iv.indices();
    let xs = iv.complement_indices();
    let nn = n.get();
    let k = ys.len();
    let fm = dft_matrix(n);
    let l = DMatrix::from_fn(2 * k, nn, |r, c| {
        if r < k {
            if ys[r] == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else {
            fm.entry(ys[r - k], c)
        }
    });
    let pinv = l
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let v = DMatrix::from_fn(k, xs.len(), |p, q| pinv[(xs[q], p)]);
    let w = DMatrix::from_fn(k, xs.len(), |p, q| pinv[(xs[q], k + p)]);
    Ok((v, w))
}

/// The `N` eigenvectors of `F_N`: each `rho_k`, and for each doubled pair
/// `(alpha +- t) phi + beta phi~` with eigenvalue `+-t`, `t = sqrt(alpha^2 + beta^2)`.
pub fn full_eigenbasis(
    sd: &SpectralData,
    actions: &[EigenspaceAction],
) -> Result<Vec<(FourierEigenvalue, GridFunction)>> {
    if sd.fourier_on_ca.len() != sd.simple.len() {
        return Err(Error::Invalid(
            "spectral data lacks F_N eigenvalues on C_a".into(),
        ));
    }
    let mut out: Vec<(FourierEigenvalue, GridFunction)> = sd
        .simple
        .iter()
        .zip(&sd.fourier_on_ca)
        .map(|(p, fa)| (fa.eigenvalue, p.rho.clone()))
        .collect();
    for (act, pair) in actions.iter().zip(&sd.doubled) {
        let t = (act.alpha * act.alpha + act.beta * act.beta).sqrt();
        for sign in [1.0, -1.0] {
            let nu = t * sign;
            let f = pair
                .phi
                .scaled(act.alpha + nu)
                .add(&pair.phi_tilde.scaled(act.beta))?;
            out.push((FourierEigenvalue::nearest(nu, sd.n), f));
        }
    }
    Ok(out)
}

/// Smallest singular value of the matrix of normalized eigenvectors; zero
/// would mean they fail to span.
pub fn eigenbasis_min_singular_value(basis: &[(FourierEigenvalue, GridFunction)]) -> Result<f64> {
    let Some((_, first)) = basis.first() else {
        return Ok(0.0);
    };
    let n = first.len();
    let normed: Vec<GridFunction> = basis
        .iter()
        .map(|(_, f)| f.normalized())
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(n, basis.len(), |i, j| normed[j].values()[i]);
    Ok(m.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Maximum exterior error `max |f(x) - reconstructed(x)| / ||f||_inf` for `f`.
pub fn reconstruction_error(kernel: &InterpolationKernel, f: &GridFunction) -> Result<f64> {
    let n = f.grid();
    let iv = DiscreteInterval::new(n, kernel.a)?;
    let fh = dft(f);
    let ext = kernel.reconstruct(&restrict(f, &iv), &restrict(&fh, &iv))?;
    let err = kernel
        .x
        .iter()
        .zip(&ext)
        .map(|(&x, v)| (f.values()[x] - v).norm())
        .fold(0.0, f64::max);
    Ok(err / f.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::parity_of;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize) -> GridSize {
        GridSize::new(n).unwrap()
    }

    fn random_fn(n: GridSize, rng: &mut ChaCha8Rng) -> GridFunction {
        let vals = (0..n.get())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        GridFunction::new(n, vals).unwrap()
    }

    fn valid_pairs(max_n: usize) -> impl Iterator<Item = (usize, usize)> {
        (2..=max_n).flat_map(|n| {
            (0..=(n - 1) / 2)
                .filter(move |&a| 4 * a + 2 >= n)
                .map(move |a| (n, a))
        })
    }

    #[test]
    fn n2_example() {
        let sd = SpectralData::compute(g(2), 0).unwrap();
        let acts = all_actions(&sd).unwrap();
        assert_eq!(acts.len(), 1);
        assert!((acts[0].alpha - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((acts[0].beta - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let k = magic_functions(&acts, &sd).unwrap();
        assert!((k.v[0][0] - Complex64::new(-1.0, 0.0)).norm() <= 1e-12);
        assert!((k.w[0][0] - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn action_norm_and_parity() {
        for (nn, a) in valid_pairs(32) {
            let sd = SpectralData::compute(g(nn), a).unwrap();
            for (act, pair) in all_actions(&sd).unwrap().iter().zip(&sd.doubled) {
                let s = act.alpha.norm_sqr() + act.beta.norm_sqr();
                assert!((s - nn as f64).abs() <= 1e-9 * nn as f64, "N={nn} a={a}");
                assert_eq!(Some(act.parity), parity_of(&pair.phi, 1e-9), "N={nn} a={a}");
            }
        }
    }

    #[test]
    fn odd_n_full_interval_has_empty_tables() {
        let k = build_kernel(g(9), 4).unwrap();
        assert!(k.x.is_empty());
        assert!(k.v.iter().all(Vec::is_empty));
        assert_eq!(k.condition, 0.0);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for (nn, a) in valid_pairs(32) {
            let k = build_kernel(g(nn), a).unwrap();
            for _ in 0..3 {
                let f = random_fn(g(nn), &mut rng);
                let err = reconstruction_error(&k, &f).unwrap();
                assert!(err <= 1e-8, "N={nn} a={a} err={err:e}");
            }
        }
    }

    #[test]
    fn ca_functions_reconstruct_to_zero() {
        let sd = SpectralData::compute(g(10), 3).unwrap();
        let acts = all_actions(&sd).unwrap();
        let k = magic_functions(&acts, &sd).unwrap();
        let iv = sd.interval();
        let rho = &sd.simple[0].rho;
        let ext = k
            .reconstruct(&restrict(rho, &iv), &restrict(&dft(rho), &iv))
            .unwrap();
        assert!(ext.iter().all(|v| v.norm() <= 1e-10));
    }

    #[test]
    fn exterior_delta() {
        let n = g(8);
        let k = build_kernel(n, 2).unwrap();
        let f = GridFunction::delta(n, 3);
        let iv = DiscreteInterval::new(n, 2).unwrap();
        let fin = restrict(&f, &iv);
        assert!(fin.iter().all(|v| v.norm() == 0.0));
        let full = k.reconstruct_full(&fin, &restrict(&dft(&f), &iv)).unwrap();
        assert!(full.sub(&f).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn dual_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (nn, a) in valid_pairs(24) {
            let sd = SpectralData::compute(g(nn), a).unwrap();
            let acts = all_actions(&sd).unwrap();
            let iv = sd.interval();
            let f = random_fn(g(nn), &mut rng);
            let fh = dft(&f);
            let ext =
                reconstruct_transform(&sd, &acts, &restrict(&f, &iv), &restrict(&fh, &iv)).unwrap();
            for (&x, v) in iv.complement_indices().iter().zip(&ext) {
                assert!(
                    (fh.values()[x] - v).norm() <= 1e-8 * fh.max_abs(),
                    "N={nn} a={a}"
                );
            }
        }
    }

    #[test]
    fn kernel_matches_pseudo_inverse() {
        for (nn, a) in valid_pairs(16) {
            let k = build_kernel(g(nn), a).unwrap();
            let (v, w) = pseudo_inverse_kernel(g(nn), a).unwrap();
            for p in 0..k.y.len() {
                for q in 0..k.x.len() {
                    assert!((k.v[p][q] - v[(p, q)]).norm() <= 1e-9, "N={nn} a={a}");
                    assert!((k.w[p][q] - w[(p, q)]).norm() <= 1e-9, "N={nn} a={a}");
                }
            }
        }
    }

    #[test]
    fn full_eigenbasis_n6() {
        let sd = SpectralData::compute(g(6), 1).unwrap();
        let acts = all_actions(&sd).unwrap();
        let basis = full_eigenbasis(&sd, &acts).unwrap();
        assert_eq!(basis.len(), 6);
        let mut counts = [0; 4];
        for (ev, _) in &basis {
            counts[ev.index()] += 1;
        }
        // oracle: rank of the spectral projector (1/4) sum_k (F/nu)^k is its trace
        let f = dft_matrix(g(6));
        for ev in FourierEigenvalue::ALL {
            let nu = ev.value(g(6));
            let mut term = CyclicOperator::identity(g(6));
            let mut trace = Complex64::new(0.0, 0.0);
            for _ in 0..4 {
                trace += term.matrix().trace();
                term = term.compose(&f).unwrap().scaled(nu.inv());
            }
            assert!(
                (trace / 4.0 - counts[ev.index()] as f64).norm() < 1e-9,
                "{ev}"
            );
        }
        assert_eq!(counts, [2, 1, 2, 1]);
    }

    #[test]
    fn full_eigenbasis_properties() {
        for (nn, a) in valid_pairs(32) {
            let sd = SpectralData::compute(g(nn), a).unwrap();
            let acts = all_actions(&sd).unwrap();
            let basis = full_eigenbasis(&sd, &acts).unwrap();
            assert_eq!(basis.len(), nn);
            let root = (nn as f64).sqrt();
            for (ev, f) in &basis {
                let res = dft(f).sub(&f.scaled(ev.value(g(nn)))).unwrap().norm() / f.norm();
                assert!(res <= 1e-8 * root, "N={nn} a={a}");
            }
            for (i, (e1, f1)) in basis.iter().enumerate() {
                for (e2, f2) in &basis[i + 1..] {
                    if e1 != e2 {
                        let o = f1.inner_product(f2).unwrap().norm() / (f1.norm() * f2.norm());
                        assert!(o <= 1e-8, "N={nn} a={a}");
                    }
                }
            }
            assert!(
                eigenbasis_min_singular_value(&basis).unwrap() > 1e-3,
                "N={nn} a={a}"
            );
        }
    }

    #[test]
    fn kernel_json_round_trip() {
        let k = build_kernel(g(6), 1).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        let back: InterpolationKernel = serde_json::from_str(&s).unwrap();
        assert_eq!(k, back);
        assert!(s.contains("\"v\":[[["));
    }
}
