//! Explicit eigenfunctions of `F_N` on `C_m` when `dim C_m = d <= 4`.
//!
//! Write `N = 4m + 2 - d`. Each case combines a real even sine product
//! `P(x) = prod_k sin(pi (m + k - x) / N)` on `[-m, m]` with a low-degree
//! trigonometric factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::commutant::{build_twisted_j0, FourthRoot};
use crate::dft::dft;
use crate::error::{Error, Result};
use crate::extremal::psi_hat_closed_form;
use crate::spectral::{residue_class, FourierEigenvalue, SpectralData};
use crate::zmod::{DiscreteInterval, GridFunction, GridSize};

/// Which closed form produced a function; `plus` selects the upper sign of
/// the `+-` in the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case")]
pub enum CaseTag {
    Case1,
    Case2Even,
    Case2Odd,
    Case3Odd,
    Case3Even { plus: bool },
    Case4Even { plus: bool },
    Case4Odd { plus: bool },
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormEigenfunction {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub eigenvalue: FourierEigenvalue,
    pub values: GridFunction,
    pub case_tag: CaseTag,
    /// `||F f - nu f|| / ||f||`.
    pub residual: f64,
}

fn with_residual(
    n: GridSize,
    case_tag: CaseTag,
    eigenvalue: FourierEigenvalue,
    values: GridFunction,
) -> Result<ClosedFormEigenfunction> {
    let residual = fourier_residual(&values, eigenvalue)?;
    let (m, d) = residue_class(n.get());
    Ok(ClosedFormEigenfunction {
        n: n.get(),
        m,
        d,
        eigenvalue,
        values,
        case_tag,
        residual,
    })
}

/// `||F f - nu f|| / ||f||`.
pub fn fourier_residual(f: &GridFunction, eigenvalue: FourierEigenvalue) -> Result<f64> {
    let nu = eigenvalue.value(f.grid());
    Ok(dft(f).sub(&f.scaled(nu))?.norm() / f.norm())
}

fn require_class(n: GridSize, d: usize, case: &'static str) -> Result<(usize, DiscreteInterval)> {
    let (m, dd) = residue_class(n.get());
    if dd != d || 2 * m + 1 > n.get() {
        return Err(Error::WrongResidueClass { n: n.get(), case });
    }
    Ok((m, DiscreteInterval::new(n, m)?))
}

/// `prod_{k=1}^{len} sin(pi (m + k - x) / N)`.
fn sine_product(n: usize, m: usize, len: usize, x: i64) -> f64 {
    (1..=len as i64)
        .map(|k| (PI * (m as i64 + k - x) as f64 / n as f64).sin())
        .product()
}

fn real_on(iv: &DiscreteInterval, g: impl Fn(i64) -> f64) -> GridFunction {
    GridFunction::from_interval(iv, |x| Complex64::new(g(x), 0.0))
}

/// `N = 4m + 1`: `psi_m` itself, eigenvalue `sqrt N`.
pub fn case1(n: GridSize) -> Result<ClosedFormEigenfunction> {
    let (m, iv) = require_class(n, 1, "N = 4m+1")?;
    let nn = n.get();
    let f = real_on(&iv, |x| sine_product(nn, m, 2 * m, x));
    with_residual(n, CaseTag::Case1, FourierEigenvalue::PlusSqrtN, f)
}

/// `N = 4m`: the even function (eigenvalue `sqrt N`) and the odd function
/// (eigenvalue `-i sqrt N`).
pub fn case2(n: GridSize) -> Result<Vec<ClosedFormEigenfunction>> {
    let (m, iv) = require_class(n, 2, "N = 4m")?;
    let nn = n.get();
    let t = |x: i64| PI * x as f64 / nn as f64;
    let even = real_on(&iv, |x| t(x).cos() * sine_product(nn, m, 2 * m - 1, x));
    let odd = real_on(&iv, |x| t(x).sin() * sine_product(nn, m, 2 * m - 1, x));
    Ok(vec![
        with_residual(n, CaseTag::Case2Even, FourierEigenvalue::PlusSqrtN, even)?,
        with_residual(n, CaseTag::Case2Odd, FourierEigenvalue::MinusISqrtN, odd)?,
    ])
}

/// `N = 4m - 1`: one odd function (eigenvalue `-i sqrt N`) and two even
/// functions `(cos(2 pi x/N) - cos(2 pi m/N) +- sin(2 pi m/N)) P(x)`.
///
/// The eigenvalue of each even branch is read off from its Rayleigh quotient
/// rather than assumed.
pub fn case3(n: GridSize) -> Result<Vec<ClosedFormEigenfunction>> {
    let (m, iv) = require_class(n, 3, "N = 4m-1")?;
    let nn = n.get();
    let t = |x: i64| 2.0 * PI * x as f64 / nn as f64;
    let len = (2 * m).saturating_sub(2);
    let odd = real_on(&iv, |x| t(x).sin() * sine_product(nn, m, len, x));
    let mut out = vec![with_residual(
        n,
        CaseTag::Case3Odd,
        FourierEigenvalue::MinusISqrtN,
        odd,
    )?];
    let tm = t(m as i64);
    for plus in [true, false] {
        let sign = if plus { 1.0 } else { -1.0 };
        let f = real_on(&iv, |x| {
            (t(x).cos() - tm.cos() + sign * tm.sin()) * sine_product(nn, m, len, x)
        });
        let ev = rayleigh_eigenvalue(&f);
        out.push(with_residual(n, CaseTag::Case3Even { plus }, ev, f)?);
    }
    Ok(out)
}

fn rayleigh_eigenvalue(f: &GridFunction) -> FourierEigenvalue {
    let q = dft(f).inner_product(f).expect("same grid") / f.norm().powi(2);
    FourierEigenvalue::nearest(q, f.grid())
}

/// `psi^_m(m)`, the forward transform of `psi_m` at `m`.
///
/// Taken from the closed-form transform, where it is the single leading
/// coefficient `N (-2i)^{-s} xi^{-Ns/4}`. A numerical DFT would lose relative
/// accuracy here because `psi^_m(m)` is tiny next to `max |psi^_m|` for
/// large `N`.
pub fn psi_hat_at_m(n: GridSize) -> Result<Complex64> {
    let (m, _) = residue_class(n.get());
    Ok(psi_hat_closed_form(n, m, 0)?.at(-(m as i64)) * n.get() as f64)
}

/// `N = 4m - 2`: two even functions (eigenvalues `+-sqrt N`) and two odd
/// functions (eigenvalues `+-i sqrt N`).
///
/// With `P(x) = xi^{-3x/2} psi_m(x)`, the even pair is
/// `[cos(3 pi x/N) + (psi^(m) / (+-2 sqrt N P(m)) - cos(3 pi m/N)) cos(pi x/N)/cos(pi m/N)] P(x)`
/// and the odd pair is the same with sines and `-+` in the denominator.
pub fn case4(n: GridSize) -> Result<Vec<ClosedFormEigenfunction>> {
    let (m, iv) = require_class(n, 4, "N = 4m-2")?;
    let nn = n.get();
    let len = (2 * m).saturating_sub(3);
    let p = |x: i64| sine_product(nn, m, len, x);
    let t = |x: i64| PI * x as f64 / nn as f64;
    let mi = m as i64;
    let hat = psi_hat_at_m(n)?;
    if hat.im.abs() > 1e-9 * hat.norm() {
        return Err(Error::Invalid(format!("psi^_m(m) = {hat} is not real")));
    }
    let root = (nn as f64).sqrt();
    let mut out = Vec::with_capacity(4);
    for plus in [true, false] {
        let sign = if plus { 1.0 } else { -1.0 };
        let c = hat.re / (sign * 2.0 * root * p(mi)) - (3.0 * t(mi)).cos();
        let f = real_on(&iv, |x| {
            ((3.0 * t(x)).cos() + c * t(x).cos() / t(mi).cos()) * p(x)
        });
        let ev = if plus {
            FourierEigenvalue::PlusSqrtN
        } else {
            FourierEigenvalue::MinusSqrtN
        };
        out.push(with_residual(n, CaseTag::Case4Even { plus }, ev, f)?);
    }
    for plus in [true, false] {
        let sign = if plus { -1.0 } else { 1.0 };
        let c = hat.re / (sign * 2.0 * root * p(mi)) - (3.0 * t(mi)).sin();
        let f = real_on(&iv, |x| {
            ((3.0 * t(x)).sin() + c * t(x).sin() / t(mi).sin()) * p(x)
        });
        let ev = if plus {
            FourierEigenvalue::PlusISqrtN
        } else {
            FourierEigenvalue::MinusISqrtN
        };
        out.push(with_residual(n, CaseTag::Case4Odd { plus }, ev, f)?);
    }
    Ok(out)
}

/// All closed-form eigenfunctions for the residue class of `N`.
pub fn closed_form_eigenfunctions(n: GridSize) -> Result<Vec<ClosedFormEigenfunction>> {
    match residue_class(n.get()).1 {
        1 => Ok(vec![case1(n)?]),
        2 => case2(n),
        3 => case3(n),
        _ => case4(n),
    }
}

/// `prod_{k=m+1}^{2m} [cos(2 pi x/N) - cos(2 pi k/N)]` for `N = 4m + 1`.
pub fn kong_case1(n: GridSize) -> Result<GridFunction> {
    let (m, iv) = require_class(n, 1, "N = 4m+1")?;
    let w = 2.0 * PI / n.get() as f64;
    Ok(real_on(&iv, |x| {
        ((m + 1)..=(2 * m))
            .map(|k| (w * x as f64).cos() - (w * k as f64).cos())
            .product()
    }))
}

/// `sin(2 pi x/N) prod_{k=m+1}^{2m-1} [cos(2 pi x/N) - cos(2 pi k/N)]` for
/// `N = 4m`; this is the odd function of case 2.
pub fn kong_case2_odd(n: GridSize) -> Result<GridFunction> {
    let (m, iv) = require_class(n, 2, "N = 4m")?;
    let w = 2.0 * PI / n.get() as f64;
    Ok(real_on(&iv, |x| {
        let prod: f64 = ((m + 1)..2 * m)
            .map(|k| (w * x as f64).cos() - (w * k as f64).cos())
            .product();
        (w * x as f64).sin() * prod
    }))
}

/// `|<f, g>| / (||f|| ||g||)`; equals 1 exactly when `f` and `g` span the
/// same ray.
pub fn ray_overlap(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    Ok(f.inner_product(g)?.norm() / (f.norm() * g.norm()))
}

/// Largest ray overlap between `f` and the `C_m` eigenvectors that the
/// spectral pipeline assigns the same `F_N` eigenvalue.
pub fn spectral_overlap(f: &ClosedFormEigenfunction, sd: &SpectralData) -> Result<f64> {
    let mut best: f64 = 0.0;
    for (pair, fa) in sd.simple.iter().zip(&sd.fourier_on_ca) {
        if fa.eigenvalue == f.eigenvalue {
            best = best.max(ray_overlap(&f.values, &pair.rho)?);
        }
    }
    Ok(best)
}

/// The `sqrt N` eigenfunction of `C_m` from the applicable case.
pub fn base_eigenfunction(n: GridSize) -> Result<GridFunction> {
    closed_form_eigenfunctions(n)?
        .into_iter()
        .find(|f| f.eigenvalue == FourierEigenvalue::PlusSqrtN)
        .map(|f| f.values)
        .ok_or_else(|| Error::Invalid("no sqrt(N) eigenfunction".into()))
}

/// True iff the `sqrt N` base eigenfunction satisfies
/// `|f(+-m)| > 1e-10 ||f||_inf`.
pub fn base_case_nonvanishing(n: GridSize) -> Result<bool> {
    let f = base_eigenfunction(n)?;
    let (m, _) = residue_class(n.get());
    let cut = 1e-10 * f.max_abs();
    Ok(f.at(m as i64).norm() > cut && f.at(-(m as i64)).norm() > cut)
}

/// Outcome of one induction step `f -> J0^(lambda) f`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InductionStep {
    pub lambda: [f64; 2],
    /// `max |f_lambda|` outside `[-(m+1), m+1]`, relative.
    pub leak: f64,
    /// `max |F f_lambda|` outside `[-(m+1), m+1]`, relative.
    pub transform_leak: f64,
    /// `||F f_lambda - lambda^{-1} sqrt N f_lambda|| / ||f_lambda||`.
    pub residual: f64,
    /// `min(|f_lambda(m+1)|, |f_lambda(-m-1)|) / ||f_lambda||_inf`.
    pub endpoint: f64,
}

impl InductionStep {
    pub fn passes(&self, n: GridSize) -> bool {
        let root = (n.get() as f64).sqrt();
        self.leak <= 1e-10
            && self.transform_leak <= 1e-10
            && self.residual <= 1e-9 * root
            && self.endpoint > 1e-10
    }
}

/// Applies `J0^(lambda)` for every fourth root `lambda` to the `sqrt N` base
/// eigenfunction of `C_m`, reporting how well `f_lambda` lands in
/// `C_{m+1}` with eigenvalue `lambda^{-1} sqrt N`.
pub fn induction_step(n: GridSize) -> Result<Vec<InductionStep>> {
    let (m, _) = residue_class(n.get());
    let target = DiscreteInterval::new(n, m + 1)?;
    let f = base_eigenfunction(n)?;
    let root = (n.get() as f64).sqrt();
    FourthRoot::ALL
        .into_iter()
        .map(|lambda| {
            let fl = build_twisted_j0(n, lambda).apply(&f)?;
            let scale = fl.max_abs();
            if scale == 0.0 {
                return Err(Error::ZeroFunction);
            }
            let fh = dft(&fl);
            let outside = target.complement_indices();
            let leak = outside
                .iter()
                .map(|&k| fl.values()[k].norm())
                .fold(0.0, f64::max)
                / scale;
            let transform_leak = outside
                .iter()
                .map(|&k| fh.values()[k].norm())
                .fold(0.0, f64::max)
                / fh.max_abs();
            let nu = lambda.value().conj() * root;
            let residual = fh.sub(&fl.scaled(nu))?.norm() / fl.norm();
            let e = m as i64 + 1;
            let endpoint = fl.at(e).norm().min(fl.at(-e).norm()) / scale;
            let lv = lambda.value();
            Ok(InductionStep {
                lambda: [lv.re, lv.im],
                leak,
                transform_leak,
                residual,
                endpoint,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::psi;
    use crate::spectral::parity_of;
    use crate::spectral::Parity;

    fn g(n: usize) -> GridSize {
        GridSize::new(n).unwrap()
    }

    #[test]
    fn residue_class_guard() {
        assert!(matches!(case1(g(8)), Err(Error::WrongResidueClass { .. })));
        assert!(case2(g(9)).is_err());
        assert!(case3(g(10)).is_err());
        assert!(case4(g(11)).is_err());
    }

    #[test]
    fn closed_forms_are_eigenfunctions_in_cm() {
        for nn in 5..=65 {
            let n = g(nn);
            let (m, d) = residue_class(nn);
            let fs = closed_form_eigenfunctions(n).unwrap();
            assert_eq!(fs.len(), d);
            let iv = DiscreteInterval::new(n, m).unwrap();
            for f in &fs {
                assert!(
                    f.residual <= 1e-9 * (nn as f64).sqrt(),
                    "N={nn} {:?} residual {:e}",
                    f.case_tag,
                    f.residual
                );
                let fh = dft(&f.values);
                for k in iv.complement_indices() {
                    assert_eq!(f.values.values()[k], Complex64::new(0.0, 0.0));
                    assert!(fh.values()[k].norm() <= 1e-9 * fh.max_abs());
                }
            }
            let mut evs: Vec<_> = fs.iter().map(|f| f.eigenvalue).collect();
            evs.dedup();
            assert_eq!(evs.len(), d, "distinct eigenvalues at N={nn}");
            for (i, f) in fs.iter().enumerate() {
                for h in &fs[i + 1..] {
                    assert!(ray_overlap(&f.values, &h.values).unwrap() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_spectral_rays() {
        for nn in 5..=65 {
            let n = g(nn);
            let (m, _) = residue_class(nn);
            let sd = SpectralData::compute(n, m).unwrap();
            for f in closed_form_eigenfunctions(n).unwrap() {
                let o = spectral_overlap(&f, &sd).unwrap();
                assert!(o >= 1.0 - 1e-9, "N={nn} {:?} overlap {o}", f.case_tag);
            }
        }
    }

    #[test]
    fn case_examples() {
        let f = case1(g(5)).unwrap();
        assert_eq!(f.eigenvalue, FourierEigenvalue::PlusSqrtN);
        assert!(f.residual <= 1e-10);

        let fs = case2(g(8)).unwrap();
        assert_eq!(fs[0].eigenvalue, FourierEigenvalue::PlusSqrtN);
        assert_eq!(fs[1].eigenvalue, FourierEigenvalue::MinusISqrtN);
        assert_eq!(parity_of(&fs[0].values, 1e-14), Some(Parity::Even));
        assert_eq!(parity_of(&fs[1].values, 1e-14), Some(Parity::Odd));

        let fs = case3(g(7)).unwrap();
        let evs: Vec<_> = fs.iter().map(|f| f.eigenvalue).collect();
        assert_eq!(
            evs,
            vec![
                FourierEigenvalue::MinusISqrtN,
                FourierEigenvalue::PlusSqrtN,
                FourierEigenvalue::MinusSqrtN
            ]
        );

        let fs = case4(g(6)).unwrap();
        let mut idx: Vec<_> = fs.iter().map(|f| f.eigenvalue.index()).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn case3_plus_branch_carries_plus_sqrt_n() {
        for nn in (7..=67).step_by(4) {
            let fs = case3(g(nn)).unwrap();
            assert_eq!(fs[1].case_tag, CaseTag::Case3Even { plus: true });
            assert_eq!(fs[1].eigenvalue, FourierEigenvalue::PlusSqrtN);
            assert_eq!(fs[2].eigenvalue, FourierEigenvalue::MinusSqrtN);
        }
    }

    #[test]
    fn case4_transform_vanishing() {
        for nn in (6..=66).step_by(4) {
            let n = g(nn);
            let (m, _) = residue_class(nn);
            let h = dft(&psi(n, m).unwrap());
            let scale = h.max_abs();
            assert!(h.at(m as i64).norm() > 1e-9 * scale);
            for k in 1..=3 {
                assert!(h.at((m + k) as i64).norm() <= 1e-10 * scale, "N={nn} k={k}");
            }
        }
    }

    #[test]
    fn psi_hat_matches_closed_form_transform() {
        // F psi(x) = N F^{-1} psi(-x)
        for nn in (6..=30).step_by(4) {
            let n = g(nn);
            let (m, _) = residue_class(nn);
            let numeric = dft(&psi(n, m).unwrap()).at(m as i64);
            let closed = psi_hat_at_m(n).unwrap();
            assert!((numeric - closed).norm() <= 1e-10 * closed.norm());
        }
    }

    #[test]
    fn kong_forms_agree() {
        for nn in (5..=65).step_by(4) {
            let ours = case1(g(nn)).unwrap().values;
            let kong = kong_case1(g(nn)).unwrap();
            assert!(ray_overlap(&ours, &kong).unwrap() >= 1.0 - 1e-9, "N={nn}");
        }
        for nn in (8..=64).step_by(4) {
            let fs = case2(g(nn)).unwrap();
            let kong = kong_case2_odd(g(nn)).unwrap();
            assert!(
                ray_overlap(&fs[1].values, &kong).unwrap() >= 1.0 - 1e-9,
                "N={nn}"
            );
            assert!(ray_overlap(&fs[0].values, &kong).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn base_case_examples() {
        for nn in [5, 8, 6, 7] {
            assert!(base_case_nonvanishing(g(nn)).unwrap(), "N={nn}");
        }
    }

    #[test]
    fn induction_step_lands_in_next_space() {
        for nn in 5..=32 {
            let n = g(nn);
            let (m, _) = residue_class(nn);
            if 2 * m + 3 > nn {
                assert!(induction_step(n).is_err());
                continue;
            }
            for step in induction_step(n).unwrap() {
                assert!(step.passes(n), "N={nn} {step:?}");
            }
        }
    }
}
