//! Spectral decomposition of `J` through its two Jacobi blocks.
//!
//! For `a >= (N-2)/4` the block of `J` on `[-a, a]` has `2a + 1` simple
//! eigenvalues and the complement block has `s = N - 2a - 1`. Every
//! complement eigenvalue reappears in the interval block; these are the
//! doubled eigenvalues `lambda_j` with eigenvectors `phi_j` (inside) and
//! `phi~_j` (outside). The remaining `r = 4a + 2 - N` interval eigenvectors
//! `rho_k` span `C_a` and diagonalize `F_N` there.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::commutant::{build_j, CommutantSpec};
use crate::dft::{dft_matrix, CyclicOperator};
use crate::error::{Error, Result};
use crate::tridiag::eigen_symmetric_tridiagonal;
use crate::zmod::{DiscreteInterval, GridFunction, GridSize};

/// Maximum magnitude of a cut entry of `J` for the blocks to count as
/// decoupled.
pub const DECOUPLE_TOL: f64 = 1e-14;

/// Relative matching tolerance for doubled eigenvalues.
pub const MATCH_REL_TOL: f64 = 1e-8;

/// Relative residual tolerance for `F rho = nu rho`.
pub const FOURIER_RESIDUAL_TOL: f64 = 1e-9;

/// A real symmetric tridiagonal restriction of `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiBlock {
    pub n: GridSize,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Block row -> canonical index in Z/NZ.
    pub index_map: Vec<usize>,
}

impl JacobiBlock {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Lifts a block vector to a function on Z/NZ.
    pub fn embed(&self, v: &[f64]) -> GridFunction {
        let mut f = GridFunction::zeros(self.n);
        for (&k, &x) in self.index_map.iter().zip(v) {
            f.values_mut()[k] = Complex64::new(x, 0.0);
        }
        f
    }
}

/// Extracts the principal submatrix of `j` on `[-a, a]` (ordered `-a..=a`) or
/// on the complement arc (ordered `a+1, ..., N-a-1`).
///
/// Fails if any entry coupling the block to the rest exceeds
/// [`DECOUPLE_TOL`], or if the block is not real symmetric tridiagonal.
pub fn restrict_j(
    j: &CyclicOperator,
    interval: &DiscreteInterval,
    complement: bool,
) -> Result<JacobiBlock> {
    let n = interval.grid();
    if j.grid() != n {
        return Err(Error::SizeMismatch {
            expected: n.get(),
            found: j.grid().get(),
        });
    }
    let (inside, outside) = if complement {
        (interval.complement_indices(), interval.indices())
    } else {
        (interval.indices(), interval.complement_indices())
    };
    for &r in &inside {
        for &c in &outside {
            for (row, col) in [(r, c), (c, r)] {
                let v = j.entry(row, col).norm();
                if v > DECOUPLE_TOL {
                    return Err(Error::NotDecoupled { row, col, value: v });
                }
            }
        }
    }
    let m = inside.len();
    let mut diag = Vec::with_capacity(m);
    let mut offdiag = Vec::with_capacity(m.saturating_sub(1));
    for p in 0..m {
        for q in 0..m {
            let v = j.entry(inside[p], inside[q]);
            if v.im.abs() > DECOUPLE_TOL {
                return Err(Error::NotTridiagonal(format!(
                    "complex entry at ({p}, {q})"
                )));
            }
            if p.abs_diff(q) > 1 && v.re.abs() > DECOUPLE_TOL {
                return Err(Error::NotTridiagonal(format!(
                    "entry {:e} outside the band at ({p}, {q})",
                    v.re
                )));
            }
        }
        diag.push(j.entry(inside[p], inside[p]).re);
        if p + 1 < m {
            let up = j.entry(inside[p], inside[p + 1]).re;
            let down = j.entry(inside[p + 1], inside[p]).re;
            if up != down {
                return Err(Error::NotTridiagonal(format!(
                    "asymmetric link at ({p}, {})",
                    p + 1
                )));
            }
            offdiag.push(up);
        }
    }
    Ok(JacobiBlock {
        n,
        diag,
        offdiag,
        index_map: inside,
    })
}

/// One eigenpair of a Jacobi block; `vector` is in block coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Ascending, strictly separated eigenpairs with orthonormal, sign-normalized
/// eigenvectors (first entry positive).
pub fn eigendecompose_block(block: &JacobiBlock) -> Result<Vec<BlockEigenpair>> {
    let (eig, _) = eigen_symmetric_tridiagonal(&block.diag, &block.offdiag)?;
    let values = &eig.values;
    if values.len() > 1 {
        let range = values[values.len() - 1] - values[0];
        for w in values.windows(2) {
            if w[1] - w[0] <= 1e-10 * range {
                return Err(Error::SpectralCollision(w[0]));
            }
        }
    }
    let m = values.len();
    let gram = eig.vectors.transpose() * &eig.vectors;
    for p in 0..m {
        for q in 0..m {
            let target = if p == q { 1.0 } else { 0.0 };
            if (gram[(p, q)] - target).abs() > 1e-10 {
                return Err(Error::Convergence("eigenvectors not orthonormal".into()));
            }
        }
    }
    Ok((0..m)
        .map(|k| BlockEigenpair {
            value: values[k],
            vector: eig.vector(k),
        })
        .collect())
}

/// The eigenvalues `sqrt(N), -i sqrt(N), -sqrt(N), i sqrt(N)` of `F_N`, in
/// the column order of the multiplicity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FourierEigenvalue {
    PlusSqrtN,
    MinusISqrtN,
    MinusSqrtN,
    PlusISqrtN,
}

impl FourierEigenvalue {
    pub const ALL: [FourierEigenvalue; 4] = [
        FourierEigenvalue::PlusSqrtN,
        FourierEigenvalue::MinusISqrtN,
        FourierEigenvalue::MinusSqrtN,
        FourierEigenvalue::PlusISqrtN,
    ];

    pub fn index(self) -> usize {
        match self {
            FourierEigenvalue::PlusSqrtN => 0,
            FourierEigenvalue::MinusISqrtN => 1,
            FourierEigenvalue::MinusSqrtN => 2,
            FourierEigenvalue::PlusISqrtN => 3,
        }
    }

    /// The unit phase `1, -i, -1, i`.
    pub fn phase(self) -> Complex64 {
        match self {
            FourierEigenvalue::PlusSqrtN => Complex64::new(1.0, 0.0),
            FourierEigenvalue::MinusISqrtN => Complex64::new(0.0, -1.0),
            FourierEigenvalue::MinusSqrtN => Complex64::new(-1.0, 0.0),
            FourierEigenvalue::PlusISqrtN => Complex64::new(0.0, 1.0),
        }
    }

    pub fn value(self, n: GridSize) -> Complex64 {
        self.phase() * (n.get() as f64).sqrt()
    }

    /// The candidate closest to `z`.
    pub fn nearest(z: Complex64, n: GridSize) -> Self {
        Self::ALL
            .into_iter()
            .min_by(|a, b| (a.value(n) - z).norm().total_cmp(&(b.value(n) - z).norm()))
            .expect("non-empty")
    }

    pub fn is_real(self) -> bool {
        matches!(
            self,
            FourierEigenvalue::PlusSqrtN | FourierEigenvalue::MinusSqrtN
        )
    }
}

impl fmt::Display for FourierEigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FourierEigenvalue::PlusSqrtN => "sqrt(N)",
            FourierEigenvalue::MinusISqrtN => "-i sqrt(N)",
            FourierEigenvalue::MinusSqrtN => "-sqrt(N)",
            FourierEigenvalue::PlusISqrtN => "i sqrt(N)",
        };
        f.write_str(s)
    }
}

/// Eigenvector of the interval block whose eigenvalue is not shared with the
/// complement; an element of `C_a`.
#[derive(Debug, Clone)]
pub struct SimplePair {
    pub mu: f64,
    pub rho: GridFunction,
}

/// A doubled eigenvalue with its interval and complement eigenvectors.
#[derive(Debug, Clone)]
pub struct DoubledPair {
    /// Eigenvalue as computed on the interval block.
    pub lambda: f64,
    /// The matching eigenvalue computed on the complement block.
    pub lambda_complement: f64,
    pub phi: GridFunction,
    pub phi_tilde: GridFunction,
}

/// `F_N` eigenvalue of one `rho_k` with its residual.
#[derive(Debug, Clone, Copy)]
pub struct FourierAssignment {
    pub eigenvalue: FourierEigenvalue,
    pub residual: f64,
}

/// Full labelled eigenstructure of `J` for one `(N, a)`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub n: GridSize,
    pub a: usize,
    pub r: usize,
    pub s: usize,
    pub simple: Vec<SimplePair>,
    pub doubled: Vec<DoubledPair>,
    /// `F_N` eigenvalue of each `rho_k`, filled by [`SpectralData::compute`]
    /// or [`fourier_eigenvalues_on_ca`].
    pub fourier_on_ca: Vec<FourierAssignment>,
    /// Tolerance used when matching the two block spectra.
    pub match_tolerance: f64,
}

impl SpectralData {
    /// Runs the whole pipeline for `J` built from `(N, a)`.
    pub fn compute(n: GridSize, a: usize) -> Result<Self> {
        let spec = CommutantSpec::new(n, a)?;
        Self::from_operator(&build_j(&spec), n, a)
    }

    /// Runs the pipeline on a supplied operator (normally `J`).
    pub fn from_operator(j: &CyclicOperator, n: GridSize, a: usize) -> Result<Self> {
        let interval = DiscreteInterval::new(n, a)?;
        let inner = restrict_j(j, &interval, false)?;
        let outer = restrict_j(j, &interval, true)?;
        let mut sd = pair_spectra(&inner, &outer, n, a)?;
        sd.fourier_on_ca = fourier_eigenvalues_on_ca(&sd, &dft_matrix(n))?;
        Ok(sd)
    }

    pub fn interval(&self) -> DiscreteInterval {
        DiscreteInterval::new(self.n, self.a).expect("validated on construction")
    }

    /// Counts of `F_N` eigenvalues on `C_a`, ordered as
    /// `(sqrt N, -i sqrt N, -sqrt N, i sqrt N)`.
    pub fn multiplicities(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for fa in &self.fourier_on_ca {
            counts[fa.eigenvalue.index()] += 1;
        }
        counts
    }

    /// All eigenvalues of `J` with multiplicity: the `mu_k` once and each
    /// `lambda_j` twice, ascending.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.simple.iter().map(|p| p.mu).collect();
        for d in &self.doubled {
            v.push(d.lambda);
            v.push(d.lambda_complement);
        }
        v.sort_by(f64::total_cmp);
        v
    }
}

fn check_pairing_range(n: GridSize, a: usize) -> Result<()> {
    if 4 * a + 2 < n.get() {
        return Err(Error::OutOfRange(format!(
            "spectral pairing needs a >= (N-2)/4; got N={}, a={a}",
            n.get()
        )));
    }
    Ok(())
}

/// Matches every complement eigenvalue to exactly one interval eigenvalue.
///
/// The matching tolerance is `1e-8 * max(range, 1)` where `range` spans both
/// spectra; the floor of 1 keeps `N = 2` (where `J = 0`) well defined. Two
/// interval candidates within tolerance of one complement eigenvalue is an
/// error, as is any count of unmatched interval eigenvalues other than `r`.
pub fn pair_spectra(
    inner: &JacobiBlock,
    outer: &JacobiBlock,
    n: GridSize,
    a: usize,
) -> Result<SpectralData> {
    check_pairing_range(n, a)?;
    let r = 4 * a + 2 - n.get();
    let s = n.get() - 2 * a - 1;
    if inner.size() != 2 * a + 1 || outer.size() != s {
        return Err(Error::Pairing(format!(
            "block sizes ({}, {}) do not match (2a+1, N-2a-1) = ({}, {s})",
            inner.size(),
            outer.size(),
            2 * a + 1
        )));
    }
    let in_eig = eigendecompose_block(inner)?;
    let out_eig = eigendecompose_block(outer)?;

    let all = in_eig.iter().chain(&out_eig).map(|p| p.value);
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let range = if lo.is_finite() { hi - lo } else { 0.0 };
    let tol = MATCH_REL_TOL * range.max(1.0);

    let mut partner: Vec<Option<usize>> = vec![None; in_eig.len()];
    for (jo, op) in out_eig.iter().enumerate() {
        let candidates: Vec<usize> = in_eig
            .iter()
            .enumerate()
            .filter(|(_, ip)| (ip.value - op.value).abs() <= tol)
            .map(|(k, _)| k)
            .collect();
        match candidates.as_slice() {
            [] => {
                return Err(Error::Pairing(format!(
                    "complement eigenvalue {} has no partner on the interval",
                    op.value
                )))
            }
            [k] => {
                if partner[*k].is_some() {
                    return Err(Error::SpectralCollision(op.value));
                }
                partner[*k] = Some(jo);
            }
            _ => return Err(Error::SpectralCollision(op.value)),
        }
    }

    let mut simple = Vec::new();
    let mut doubled = Vec::new();
    for (k, ip) in in_eig.iter().enumerate() {
        match partner[k] {
            Some(jo) => doubled.push(DoubledPair {
                lambda: ip.value,
                lambda_complement: out_eig[jo].value,
                phi: inner.embed(&ip.vector),
                phi_tilde: outer.embed(&out_eig[jo].vector),
            }),
            None => simple.push(SimplePair {
                mu: ip.value,
                rho: inner.embed(&ip.vector),
            }),
        }
    }
    if simple.len() != r {
        return Err(Error::Pairing(format!(
            "{} unmatched interval eigenvalues, expected r = {r}",
            simple.len()
        )));
    }
    Ok(SpectralData {
        n,
        a,
        r,
        s,
        simple,
        doubled,
        fourier_on_ca: Vec::new(),
        match_tolerance: tol,
    })
}

/// Assigns each `rho_k` its `F_N` eigenvalue `nu_k`, requiring
/// `||F rho_k - nu_k rho_k|| <= 1e-9 sqrt(N) ||rho_k||`.
pub fn fourier_eigenvalues_on_ca(
    sd: &SpectralData,
    f: &CyclicOperator,
) -> Result<Vec<FourierAssignment>> {
    let sqrt_n = (sd.n.get() as f64).sqrt();
    sd.simple
        .iter()
        .enumerate()
        .map(|(k, pair)| {
            let rho = &pair.rho;
            let frho = f.apply(rho)?;
            let nrm2 = rho.norm().powi(2);
            let rayleigh = frho.inner_product(rho)? / nrm2;
            let ev = FourierEigenvalue::nearest(rayleigh, sd.n);
            let residual = frho.sub(&rho.scaled(ev.value(sd.n)))?.norm();
            if residual > FOURIER_RESIDUAL_TOL * sqrt_n * rho.norm() {
                return Err(Error::NotFourierEigenvector {
                    index: k + 1,
                    residual,
                });
            }
            Ok(FourierAssignment {
                eigenvalue: ev,
                residual,
            })
        })
        .collect()
}

/// Writes `N = 4m + 2 - d` with `1 <= d <= 4`; returns `(m, d)`.
pub fn residue_class(n: usize) -> (usize, usize) {
    let m = (n - 1).div_ceil(4);
    (m, 4 * m + 2 - n)
}

/// Closed-form multiplicities of `F_N` on `C_a` for `a >= m`, ordered
/// `(sqrt N, -i sqrt N, -sqrt N, i sqrt N)`.
pub fn multiplicity_closed_form(n: usize, a: usize) -> Result<[usize; 4]> {
    let (m, d) = residue_class(n);
    if a < m || 2 * a + 1 > n {
        return Err(Error::OutOfRange(format!(
            "multiplicity table needs m <= a <= (N-1)/2 with m={m}; got N={n}, a={a}"
        )));
    }
    let x = a - m + 1;
    Ok(match d {
        4 => [x, x, x, x],
        3 => [x, x, x, x - 1],
        2 => [x, x, x - 1, x - 1],
        _ => [x, x - 1, x - 1, x - 1],
    })
}

/// Multiplicities of `F_N` on `C_a` computed from the spectral pipeline and
/// checked against the closed form.
pub fn multiplicity_table(n: GridSize, a: usize) -> Result<[usize; 4]> {
    let expected = multiplicity_closed_form(n.get(), a)?;
    let computed = SpectralData::compute(n, a)?.multiplicities();
    if computed != expected {
        return Err(Error::Invalid(format!(
            "multiplicities {computed:?} differ from closed form {expected:?} at N={}, a={a}",
            n.get()
        )));
    }
    Ok(computed)
}

/// One CSV row of the multiplicity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    pub m_plus: usize,
    pub m_minus_i: usize,
    pub m_minus: usize,
    pub m_plus_i: usize,
}

impl MultiplicityRow {
    pub fn new(n: usize, a: usize, counts: [usize; 4]) -> Self {
        MultiplicityRow {
            n,
            a,
            m_plus: counts[0],
            m_minus_i: counts[1],
            m_minus: counts[2],
            m_plus_i: counts[3],
        }
    }
}

/// Writes rows with the header `N,a,m_plus,m_minus_i,m_minus,m_plus_i`.
pub fn write_multiplicity_csv<W: std::io::Write>(rows: &[MultiplicityRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Even or odd under `x -> -x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Parity of `f` if `f(-x) = +-f(x)` holds to `tol * max|f|`.
pub fn parity_of(f: &GridFunction, tol: f64) -> Option<Parity> {
    let refl = f.reflected();
    let scale = f.max_abs();
    let even = f.sub(&refl).ok()?.max_abs();
    let odd = f.add(&refl).ok()?.max_abs();
    if even <= tol * scale {
        Some(Parity::Even)
    } else if odd <= tol * scale {
        Some(Parity::Odd)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{dft, project_interval};
    use nalgebra::{DMatrix, SymmetricEigen};

    fn g(n: usize) -> GridSize {
        GridSize::new(n).unwrap()
    }

    fn blocks(n: usize, a: usize) -> (JacobiBlock, JacobiBlock) {
        let spec = CommutantSpec::new(g(n), a).unwrap();
        let j = build_j(&spec);
        let iv = DiscreteInterval::new(g(n), a).unwrap();
        (
            restrict_j(&j, &iv, false).unwrap(),
            restrict_j(&j, &iv, true).unwrap(),
        )
    }

    #[test]
    fn n6_a1_blocks() {
        let (inner, outer) = blocks(6, 1);
        assert_eq!(inner.size(), 3);
        assert_eq!(outer.size(), 3);
        let expect = 3f64.sqrt() / 2.0;
        for v in &inner.offdiag {
            assert!((v - expect).abs() < 1e-15);
        }
        assert_eq!(inner.index_map, vec![5, 0, 1]);
        assert_eq!(outer.index_map, vec![2, 3, 4]);
    }

    #[test]
    fn interval_block_is_jacobi() {
        for n in 3..=40 {
            for a in 0..=(n - 1) / 2 {
                let (inner, outer) = blocks(n, a);
                assert!(inner.offdiag.iter().all(|&v| v > 0.0), "N={n} a={a}");
                assert!(outer.offdiag.iter().all(|&v| v < 0.0), "N={n} a={a}");
            }
        }
    }

    #[test]
    fn perturbed_j_does_not_decouple() {
        let spec = CommutantSpec::new(g(8), 2).unwrap();
        let mut j = build_j(&spec);
        // link 2 <-> 3 crosses the cut of [-2, 2]
        let v = j.entry(2, 3) + Complex64::new(1e-3, 0.0);
        j.set_entry(2, 3, v);
        j.set_entry(3, 2, v);
        let iv = DiscreteInterval::new(g(8), 2).unwrap();
        let err = restrict_j(&j, &iv, false).unwrap_err();
        assert!(err.to_string().starts_with("J does not decouple; check a"));
    }

    #[test]
    fn block_eigen_matches_dense_oracle() {
        let (inner, _) = blocks(6, 1);
        let pairs = eigendecompose_block(&inner).unwrap();
        let dense = DMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                inner.diag[i]
            } else if i.abs_diff(j) == 1 {
                inner.offdiag[i.min(j)]
            } else {
                0.0
            }
        });
        let mut oracle: Vec<f64> = SymmetricEigen::new(dense)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        oracle.sort_by(f64::total_cmp);
        for (p, o) in pairs.iter().zip(&oracle) {
            assert!((p.value - o).abs() <= 1e-12);
            assert!(p.vector[0] > 0.0);
        }
    }

    #[test]
    fn one_by_one_block() {
        let block = JacobiBlock {
            n: g(3),
            diag: vec![0.75],
            offdiag: vec![],
            index_map: vec![0],
        };
        let pairs = eigendecompose_block(&block).unwrap();
        assert_eq!(
            pairs,
            vec![BlockEigenpair {
                value: 0.75,
                vector: vec![1.0]
            }]
        );
    }

    #[test]
    fn pairing_examples() {
        let sd = SpectralData::compute(g(6), 1).unwrap();
        assert_eq!((sd.r, sd.s), (0, 3));
        assert_eq!(sd.doubled.len(), 3);
        let sd = SpectralData::compute(g(5), 1).unwrap();
        assert_eq!((sd.r, sd.s), (1, 2));
        let sd = SpectralData::compute(g(13), 6).unwrap();
        assert_eq!((sd.r, sd.s), (13, 0));
        assert!(sd.doubled.is_empty());
    }

    #[test]
    fn pairing_rejects_small_a() {
        let (inner, outer) = blocks(12, 2);
        assert!(pair_spectra(&inner, &outer, g(12), 2).is_err());
    }

    #[test]
    fn n2_degenerate_case_pairs() {
        let sd = SpectralData::compute(g(2), 0).unwrap();
        assert_eq!((sd.r, sd.s), (0, 1));
        assert_eq!(sd.doubled[0].phi, GridFunction::delta(g(2), 0));
        assert_eq!(sd.doubled[0].phi_tilde, GridFunction::delta(g(2), 1));
    }

    #[test]
    fn fourier_eigenvalue_examples() {
        let sd = SpectralData::compute(g(5), 1).unwrap();
        assert_eq!(sd.fourier_on_ca.len(), 1);
        assert_eq!(sd.fourier_on_ca[0].eigenvalue, FourierEigenvalue::PlusSqrtN);

        let sd = SpectralData::compute(g(4), 1).unwrap();
        let mut evs: Vec<_> = sd.fourier_on_ca.iter().map(|f| f.eigenvalue).collect();
        evs.sort_by_key(|e| e.index());
        assert_eq!(
            evs,
            vec![FourierEigenvalue::PlusSqrtN, FourierEigenvalue::MinusISqrtN]
        );

        let sd = SpectralData::compute(g(13), 3).unwrap();
        assert_eq!(sd.multiplicities(), [1, 0, 0, 0]);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity_table(g(6), 2).unwrap(), [1, 1, 1, 1]);
        assert_eq!(multiplicity_table(g(8), 2).unwrap(), [1, 1, 0, 0]);
        assert_eq!(multiplicity_table(g(7), 2).unwrap(), [1, 1, 1, 0]);
    }

    #[test]
    fn residue_classes() {
        assert_eq!(residue_class(5), (1, 1));
        assert_eq!(residue_class(6), (2, 4));
        assert_eq!(residue_class(7), (2, 3));
        assert_eq!(residue_class(8), (2, 2));
        assert_eq!(residue_class(2), (1, 4));
    }

    #[test]
    fn closed_form_sums_to_dimension() {
        for n in 2..=64usize {
            let (m, _) = residue_class(n);
            for a in m..=(n - 1) / 2 {
                let row = multiplicity_closed_form(n, a).unwrap();
                assert_eq!(row.iter().sum::<usize>(), 4 * a + 2 - n);
            }
        }
    }

    #[test]
    fn full_spectrum_matches_dense_oracle() {
        for n in 2..=24 {
            for a in 0..=(n - 1) / 2 {
                if 4 * a + 2 < n {
                    continue;
                }
                let sd = SpectralData::compute(g(n), a).unwrap();
                let j = build_j(&CommutantSpec::new(g(n), a).unwrap());
                let dense = DMatrix::from_fn(n, n, |r, c| j.entry(r, c).re);
                let mut oracle: Vec<f64> = SymmetricEigen::new(dense)
                    .eigenvalues
                    .iter()
                    .copied()
                    .collect();
                oracle.sort_by(f64::total_cmp);
                for (x, y) in sd.all_eigenvalues().iter().zip(&oracle) {
                    assert!((x - y).abs() <= 1e-10, "N={n} a={a}");
                }
            }
        }
    }

    #[test]
    fn fourier_image_of_complement_eigenvector() {
        for n in 4..=20 {
            for a in 0..=(n - 1) / 2 {
                if 4 * a + 2 < n {
                    continue;
                }
                let sd = SpectralData::compute(g(n), a).unwrap();
                let iv = sd.interval();
                let j = build_j(&CommutantSpec::new(g(n), a).unwrap());
                for d in &sd.doubled {
                    let p = project_interval(&dft(&d.phi_tilde), &iv, false).unwrap();
                    assert!(p.norm() > 1e-6);
                    let res = j
                        .apply(&p)
                        .unwrap()
                        .sub(&p.scaled(Complex64::new(d.lambda, 0.0)))
                        .unwrap();
                    assert!(res.norm() <= 1e-9 * p.norm(), "N={n} a={a}");
                }
            }
        }
    }

    #[test]
    fn doubled_pairs_share_parity() {
        for n in 3..=24 {
            for a in 0..=(n - 1) / 2 {
                if 4 * a + 2 < n {
                    continue;
                }
                let sd = SpectralData::compute(g(n), a).unwrap();
                for d in &sd.doubled {
                    let p = parity_of(&d.phi, 1e-9).expect("phi has a parity");
                    let q = parity_of(&d.phi_tilde, 1e-9).expect("phi~ has a parity");
                    assert_eq!(p, q, "N={n} a={a}");
                }
            }
        }
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        write_multiplicity_csv(&[MultiplicityRow::new(8, 2, [1, 1, 0, 0])], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "N,a,m_plus,m_minus_i,m_minus,m_plus_i\n8,2,1,1,0,0\n"
        );
    }
}
