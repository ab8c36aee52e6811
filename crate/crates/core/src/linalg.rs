//! Dense complex Hermitian matrix services.
//!
//! Everything in this crate lives at "identity scale": frame operators,
//! subset sums and targets all satisfy `0 <= A <= I` up to rounding, so the
//! tolerances below are absolute.
//!
//! The eigensolver is nalgebra's Hermitian tridiagonal QR. Results are
//! re-sorted ascending (stable, so ties keep solver order) and each
//! eigenvector is phase-fixed so its first non-negligible component is real
//! and positive.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Closed-interval membership tolerance for spectral projectors.
pub const SPECTRAL_TOL: f64 = 1e-12;

/// Components below this modulus are skipped when fixing eigenvector phase.
const PHASE_TOL: f64 = 1e-8;

/// A square complex matrix equal to its own conjugate transpose.
///
/// Construction symmetrizes its input as `(A + A*) / 2`, so the stored
/// entries are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl HermitianMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(Self::from_raw(matrix))
    }

    /// Symmetrizes without validation; used on internally produced matrices.
    pub(crate) fn from_raw(matrix: CMatrix) -> Self {
        let adjoint = matrix.adjoint();
        Self { inner: (matrix + adjoint) * C64::new(0.5, 0.0) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: CMatrix::identity(dim, dim) }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            inner: CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }),
        }
    }

    /// Builds from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("rows must form a square matrix".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// The rank-one matrix `u u*`.
    pub fn outer(u: &CVector) -> Self {
        Self { inner: u * u.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.real_diagonal().iter().sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { inner: &self.inner * C64::new(factor, 0.0) }
    }

    /// `X A X*` for an arbitrary (possibly rectangular) `X`.
    pub fn congruence(&self, x: &CMatrix) -> Self {
        Self::from_raw(x * &self.inner * x.adjoint())
    }

    /// `A B A` for Hermitian `B`; the result is Hermitian.
    pub fn sandwich(&self, middle: &HermitianMatrix) -> Self {
        Self::from_raw(&self.inner * &middle.inner * &self.inner)
    }

    /// Adds `u u*` in place.
    pub fn add_outer(&mut self, u: &CVector) {
        self.inner.gerc(C64::new(1.0, 0.0), u, u, C64::new(1.0, 0.0));
    }

    /// Subtracts `u u*` in place.
    pub fn sub_outer(&mut self, u: &CVector) {
        self.inner.gerc(C64::new(-1.0, 0.0), u, u, C64::new(1.0, 0.0));
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = match self.dim() {
            0 => Vec::new(),
            1 => vec![self.inner[(0, 0)].re],
            _ => self.inner.clone().symmetric_eigenvalues().iter().copied().collect(),
        };
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn eigh(&self) -> SpectralDecomposition {
        let n = self.dim();
        if n == 0 {
            return SpectralDecomposition { eigenvalues: Vec::new(), eigenvectors: CMatrix::zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(self.inner.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut eigenvectors = CMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(k).into_owned();
            if let Some(lead) = v.iter().find(|z| z.norm() > PHASE_TOL).copied() {
                let phase = lead.conj() / lead.norm();
                v *= phase;
            }
            eigenvectors.set_column(col, &v);
        }
        SpectralDecomposition { eigenvalues, eigenvectors }
    }

    /// Spectral norm, i.e. the largest absolute eigenvalue.
    pub fn norm(&self) -> f64 {
        let (lo, hi) = extreme_eigenvalues(&self.inner);
        lo.abs().max(hi.abs())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        extreme_eigenvalues(&self.inner).0
    }

    pub fn max_eigenvalue(&self) -> f64 {
        extreme_eigenvalues(&self.inner).1
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_dim(&self, other: &HermitianMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

impl SpectralDecomposition {
    /// `U diag(f(λ)) U*` over the eigenpairs where `keep(λ)` holds.
    pub fn reassemble(&self, keep: impl Fn(f64) -> bool, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.eigenvectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            if keep(lambda) {
                let v = self.eigenvectors.column(k);
                out.gerc(C64::new(f(lambda), 0.0), &v, &v, C64::new(1.0, 0.0));
            }
        }
        HermitianMatrix::from_raw(out)
    }

    /// Columns of the eigenvectors whose eigenvalue satisfies `keep`, as an
    /// `n x k` matrix, together with those eigenvalues.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> (CMatrix, Vec<f64>) {
        let picked: Vec<usize> = (0..self.eigenvalues.len()).filter(|&k| keep(self.eigenvalues[k])).collect();
        let n = self.eigenvectors.nrows();
        let mut basis = CMatrix::zeros(n, picked.len());
        for (col, &k) in picked.iter().enumerate() {
            basis.set_column(col, &self.eigenvectors.column(k));
        }
        (basis, picked.iter().map(|&k| self.eigenvalues[k]).collect())
    }
}

/// Smallest and largest eigenvalue of a Hermitian matrix, with closed forms
/// for dimension one and two.
pub(crate) fn extreme_eigenvalues(m: &CMatrix) -> (f64, f64) {
    match m.nrows() {
        0 => (0.0, 0.0),
        1 => (m[(0, 0)].re, m[(0, 0)].re),
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let mean = 0.5 * (a + d);
            let half_gap = 0.5 * (a - d);
            let radius = (half_gap * half_gap + b.norm_sqr()).sqrt();
            (mean - radius, mean + radius)
        }
        _ => {
            let values = m.clone().symmetric_eigenvalues();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    }
}

/// Spectral norm of a raw Hermitian matrix; skips validation.
pub(crate) fn raw_norm(m: &CMatrix) -> f64 {
    let (lo, hi) = extreme_eigenvalues(m);
    lo.abs().max(hi.abs())
}

/// Largest eigenvalue of a raw Hermitian matrix (the norm when PSD).
pub(crate) fn raw_max_eigenvalue(m: &CMatrix) -> f64 {
    extreme_eigenvalues(m).1
}

pub fn operator_norm(a: &HermitianMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(a.norm())
}

/// `A <= B` in the Loewner order: the smallest eigenvalue of `B - A` is at
/// least `-tol`.
pub fn psd_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    a.check_same_dim(b)?;
    Ok((b - a).min_eigenvalue() >= -tol)
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue in
/// `[lo, hi]` (closed, widened by [`SPECTRAL_TOL`]). `hi` may be infinite.
pub fn spectral_projector(b: &HermitianMatrix, lo: f64, hi: f64) -> Result<HermitianMatrix> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidInput(format!("bad spectral interval [{lo}, {hi}]")));
    }
    let eig = b.eigh();
    Ok(eig.reassemble(|l| in_interval(l, lo, hi), |_| 1.0))
}

/// `B^{-1/2}` restricted to the spectral subspace where `B >= lo`, zero on
/// its complement.
pub fn inv_sqrt_on_range(b: &HermitianMatrix, lo: f64) -> Result<HermitianMatrix> {
    if !lo.is_finite() || lo <= 0.0 {
        return Err(Error::InvalidInput(format!("spectral cut must be positive, got {lo}")));
    }
    let eig = b.eigh();
    Ok(eig.reassemble(|l| in_interval(l, lo, f64::INFINITY), |l| 1.0 / l.sqrt()))
}

pub(crate) fn in_interval(lambda: f64, lo: f64, hi: f64) -> bool {
    lambda >= lo - SPECTRAL_TOL && lambda <= hi + SPECTRAL_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::new(m).unwrap()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> HermitianMatrix {
        let q = random_hermitian(rng, n).eigh().eigenvectors;
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
        HermitianMatrix::from_real_diagonal(&diag).congruence(&q)
    }

    fn off(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        (a - b).as_matrix().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn norm_of_simple_matrices() {
        assert_eq!(operator_norm(&HermitianMatrix::from_real_diagonal(&[1.0, 2.0, 3.0])).unwrap(), 3.0);
        assert_eq!(operator_norm(&HermitianMatrix::zeros(4)).unwrap(), 0.0);
        let swap = HermitianMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!((operator_norm(&swap).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_non_square() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::InvalidInput(_))));
        assert!(HermitianMatrix::new(CMatrix::zeros(2, 3)).is_err());
        let inf = HermitianMatrix::from_real_diagonal(&[f64::INFINITY]);
        assert!(operator_norm(&inf).is_err());
    }

    #[test]
    fn construction_symmetrizes() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 1.0);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.entry(0, 1), C64::new(0.5, 0.5));
        assert_eq!(h.entry(1, 0), C64::new(0.5, -0.5));
    }

    #[test]
    fn loewner_order_examples() {
        let i2 = HermitianMatrix::identity(2);
        assert!(psd_leq(&HermitianMatrix::zeros(2), &i2, 0.0).unwrap());
        assert!(!psd_leq(&i2, &i2.scale(0.5), 1e-9).unwrap());
        let half = HermitianMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(psd_leq(&half, &half, 0.0).unwrap());
        assert!(matches!(psd_leq(&i2, &HermitianMatrix::identity(3), 0.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spectral_projector_examples() {
        let b = HermitianMatrix::from_real_diagonal(&[0.01, 0.5, 0.9]);
        let p = spectral_projector(&b, 0.2, 1.0).unwrap();
        assert!(off(&p, &HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 1.0])) < 1e-15);
        let p = spectral_projector(&HermitianMatrix::identity(3), 0.5, 1.0).unwrap();
        assert!(off(&p, &HermitianMatrix::identity(3)) < 1e-15);
        assert!(spectral_projector(&b, 1.0, 0.5).is_err());
    }

    #[test]
    fn spectral_projector_boundary_is_included() {
        let b = HermitianMatrix::from_real_diagonal(&[0.2 - 5e-13, 0.1]);
        let p = spectral_projector(&b, 0.2, 1.0).unwrap();
        assert!((p.entry(0, 0).re - 1.0).abs() < 1e-15);
        assert!(p.entry(1, 1).re.abs() < 1e-15);
    }

    #[test]
    fn spectral_projector_sandwich_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps: f64 = 0.09;
        for _ in 0..20 {
            let b = random_psd(&mut rng, 4, 0.0, 1.0);
            let p = spectral_projector(&b, eps.sqrt(), 1.0).unwrap();
            let pbp = p.sandwich(&b);
            assert!(psd_leq(&p.scale(eps.sqrt()), &pbp, 1e-9).unwrap());
            assert!(psd_leq(&pbp, &p, 1e-9).unwrap());
        }
    }

    #[test]
    fn inv_sqrt_examples() {
        let b = HermitianMatrix::from_real_diagonal(&[0.25, 0.04]);
        let c = inv_sqrt_on_range(&b, 0.2).unwrap();
        assert!(off(&c, &HermitianMatrix::from_real_diagonal(&[2.0, 0.0])) < 1e-14);
        let c = inv_sqrt_on_range(&HermitianMatrix::identity(2), 0.5).unwrap();
        assert!(off(&c, &HermitianMatrix::identity(2)) < 1e-14);
        assert!(inv_sqrt_on_range(&b, 0.0).is_err());
        assert!(inv_sqrt_on_range(&b, -1.0).is_err());
    }

    #[test]
    fn inv_sqrt_whitens_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let b = random_psd(&mut rng, 4, 0.3, 1.0);
            let c = inv_sqrt_on_range(&b, 0.2).unwrap();
            let p = spectral_projector(&b, 0.2, f64::INFINITY).unwrap();
            assert!((&c.sandwich(&b) - &p).norm() < 1e-9);
            // P_E <= C <= lo^{-1/2} P_E
            assert!(psd_leq(&p, &c, 1e-9).unwrap());
            assert!(psd_leq(&c, &p.scale(0.2f64.powf(-0.5)), 1e-9).unwrap());
        }
    }

    #[test]
    fn eigenvalues_sorted_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_hermitian(&mut rng, 9);
        let eig = a.eigh();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let u = &eig.eigenvectors;
        let gram = u.adjoint() * u;
        assert!((gram - CMatrix::identity(9, 9)).iter().all(|z| z.norm() < 1e-10));
        let fast = a.eigenvalues();
        for (x, y) in fast.iter().zip(&eig.eigenvalues) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_closed_form_matches_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let a = random_hermitian(&mut rng, 2);
            let eig = a.eigh();
            let (lo, hi) = extreme_eigenvalues(a.as_matrix());
            assert!((lo - eig.eigenvalues[0]).abs() < 1e-13);
            assert!((hi - eig.eigenvalues[1]).abs() < 1e-13);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigh_round_trip(seed in any::<u64>(), n in 1usize..=64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, n);
            let eig = a.eigh();
            let rebuilt = eig.reassemble(|_| true, |l| l);
            let scale = a.norm().max(1.0);
            prop_assert!((&a - &rebuilt).norm() <= 1e-10 * scale);
            let u = &eig.eigenvectors;
            let defect = (u.adjoint() * u - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(defect < 1e-10);
        }

        #[test]
        fn norm_symmetric_and_subadditive(seed in any::<u64>(), n in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, n);
            let b = random_hermitian(&mut rng, n);
            prop_assert!((a.norm() - a.scale(-1.0).norm()).abs() < 1e-9);
            prop_assert!((&a + &b).norm() <= a.norm() + b.norm() + 1e-9);
            // Independent route: largest singular value.
            let sv = a.as_matrix().singular_values().max();
            prop_assert!((a.norm() - sv).abs() < 1e-9);
        }

        #[test]
        fn projector_is_idempotent_and_commutes(seed in any::<u64>(), n in 1usize..=6, lo in 0.0f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_psd(&mut rng, n, 0.0, 1.0);
            let p = spectral_projector(&b, lo, 1.0).unwrap();
            let p2 = HermitianMatrix::from_raw(p.as_matrix() * p.as_matrix());
            prop_assert!((&p2 - &p).norm() < 1e-9);
            let comm = p.as_matrix() * b.as_matrix() - b.as_matrix() * p.as_matrix();
            prop_assert!(comm.iter().all(|z| z.norm() < 1e-9));
        }

        #[test]
        fn inv_sqrt_whitens(seed in any::<u64>(), n in 1usize..=6, lo in 0.05f64..0.9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_psd(&mut rng, n, 0.0, 1.0);
            let c = inv_sqrt_on_range(&b, lo).unwrap();
            let p = spectral_projector(&b, lo, f64::INFINITY).unwrap();
            prop_assert!((&c.sandwich(&b) - &p).norm() < 1e-9);
        }
    }
}
