//! Hermitian functional calculus, polar decomposition of skew operators and
//! PSD verification.
//!
//! Every fractional power, logarithm or hyperbolic function of an operator in
//! this crate goes through [`herm_fun`], i.e. through a Hermitian
//! eigendecomposition. Skew matrices are stored real; their Hermitian
//! counterparts `iC` are built on demand.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;

/// Absolute floor applied to every relative tolerance.
pub const ABS_FLOOR: f64 = 1e-14;
/// Relative tolerance of the Hermitian symmetry check.
pub const HERM_TOL: f64 = 1e-12;
/// Margin below 1 required of the norm of a strict contraction.
pub const STRICT_MARGIN: f64 = 1e-8;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel_tol(scale: f64, rel: f64) -> f64 {
    (rel * scale).max(ABS_FLOOR)
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_r(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| c(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn identity_c(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest singular value.
pub fn op_norm_c(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

pub fn op_norm_r(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

/// The real 2n×2n matrix of a complex-linear map on ℂⁿ ≅ ℝ²ⁿ, with
/// coordinates ordered (Re x, Im x).
pub fn realify(m: &CMat) -> RMat {
    let (r, k) = m.shape();
    let mut out = RMat::zeros(2 * r, 2 * k);
    for i in 0..r {
        for j in 0..k {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + k)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + k)] = z.re;
        }
    }
    out
}

/// Stacks complex column vectors as real vectors (Re; Im).
pub fn realify_columns(m: &CMat) -> RMat {
    let (r, k) = m.shape();
    let mut out = RMat::zeros(2 * r, k);
    for i in 0..r {
        for j in 0..k {
            out[(i, j)] = m[(i, j)].re;
            out[(i + r, j)] = m[(i, j)].im;
        }
    }
    out
}

pub fn complexify_columns(m: &RMat) -> CMat {
    let r = m.nrows() / 2;
    CMat::from_fn(r, m.ncols(), |i, j| c(m[(i, j)], m[(i + r, j)]))
}

/// SVD with zero rows appended when `a` is wide, so that `V` is a full
/// orthogonal basis of the domain.
fn svd_parts(a: &RMat) -> (RMat, RVec, RMat) {
    let (rows, cols) = a.shape();
    let mut sq = RMat::zeros(rows.max(cols), cols);
    sq.view_mut((0, 0), (rows, cols)).copy_from(a);
    let svd = sq.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    (u, svd.singular_values, vt.transpose())
}

/// Orthonormal basis of the numerical null space of `a`: right singular
/// vectors with singular value ≤ `rel · σ_max` (floored).
pub fn null_space(a: &RMat, rel: f64) -> RMat {
    let cols = a.ncols();
    if cols == 0 {
        return RMat::zeros(0, 0);
    }
    let (_, s, v) = svd_parts(a);
    let smax = s.iter().fold(0.0f64, |m, &x| m.max(x));
    let cut = rel_tol(smax, rel);
    let keep: Vec<usize> = (0..s.len())
        .filter(|&k| s[k] <= cut && k < v.ncols())
        .collect();
    let mut out = RMat::zeros(cols, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &v.column(k).rows(0, cols));
    }
    out
}

/// Orthonormal basis of the numerical column space of `a`.
pub fn range_basis(a: &RMat, rel: f64) -> RMat {
    let rows = a.nrows();
    if a.ncols() == 0 || rows == 0 {
        return RMat::zeros(rows, 0);
    }
    let (u, s, _) = svd_parts(a);
    let smax = s.iter().fold(0.0f64, |m, &x| m.max(x));
    let cut = rel_tol(smax, rel);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > cut).collect();
    let mut out = RMat::zeros(rows, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &u.column(k).rows(0, rows));
    }
    out
}

pub fn numerical_rank(a: &RMat, rel: f64) -> usize {
    range_basis(a, rel).ncols()
}

/// Complex rank: singular values above `rel · σ_max` (floored).
pub fn numerical_rank_c(a: &CMat, rel: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let s = a.clone().singular_values();
    let smax = s.iter().fold(0.0f64, |m, &x| m.max(x));
    let cut = rel_tol(smax, rel);
    s.iter().filter(|&&x| x > cut).count()
}

/// Spectral-norm distance between the orthogonal projections onto the
/// column spans of `a` and `b`.
pub fn subspace_distance(a: &RMat, b: &RMat) -> f64 {
    let qa = range_basis(a, 1e-12);
    let qb = range_basis(b, 1e-12);
    let pa = &qa * qa.transpose();
    let pb = &qb * qb.transpose();
    op_norm_r(&(pa - pb))
}

/// A complex matrix equal to its conjugate transpose within
/// `1e-12 × max-abs-entry`. The stored entries are the exact Hermitian part.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = max_abs_c(&(&m - m.adjoint()));
        let tol = rel_tol(max_abs_c(&m), HERM_TOL);
        if defect > tol {
            return Err(Error::NonHermitian { defect, tol });
        }
        Ok(Self::hermitian_part(&m))
    }

    pub fn from_real(m: &RMat) -> Result<Self> {
        Self::new(to_complex(m))
    }

    /// `(m + m*)/2` without a symmetry check, for matrices that are
    /// Hermitian in exact arithmetic.
    pub fn hermitian_part(m: &CMat) -> Self {
        HermitianMatrix((m + m.adjoint()).scale(0.5))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn trace_norm(&self) -> f64 {
        herm_eig(self).values.iter().map(|x| x.abs()).sum()
    }
}

/// A real skew-symmetric matrix; stored as its exact skew part.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewSymmetricReal(RMat);

impl SkewSymmetricReal {
    pub fn new(m: RMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "skew matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = max_abs_r(&(&m + m.transpose()));
        if defect > 1e-12 * max_abs_r(&m).max(1.0) {
            return Err(Error::NonSkew(defect));
        }
        Ok(SkewSymmetricReal((&m - m.transpose()).scale(0.5)))
    }

    pub fn zeros(n: usize) -> Self {
        SkewSymmetricReal(RMat::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMat {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        op_norm_r(&self.0)
    }

    pub fn is_contraction(&self) -> bool {
        self.norm() <= 1.0 + 1e-12
    }

    pub fn is_strict(&self) -> bool {
        self.norm() <= 1.0 - STRICT_MARGIN
    }

    /// The Hermitian matrix `iC`.
    pub fn times_i(&self) -> HermitianMatrix {
        HermitianMatrix::hermitian_part(&self.0.map(|x| c(0.0, x)))
    }
}

/// Eigenvalues in ascending order with a unitary matrix of eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: RVec,
    pub vectors: CMat,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> CMat {
        self.apply(|x| c(x, 0.0))
    }

    pub fn apply<F: Fn(f64) -> Complex64>(&self, g: F) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let gk = g(self.values[k]);
            for r in 0..n {
                scaled[(r, k)] *= gk;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn herm_eig(a: &HermitianMatrix) -> EigenDecomposition {
    let n = a.dim();
    if n == 0 {
        return EigenDecomposition {
            values: RVec::zeros(0),
            vectors: CMat::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = RVec::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = CMat::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(k));
    }
    EigenDecomposition { values, vectors }
}

/// Real symmetric eigendecomposition, ascending.
pub fn sym_eig(a: &RMat) -> (RVec, RMat) {
    let n = a.nrows();
    if n == 0 {
        return (RVec::zeros(0), RMat::zeros(0, 0));
    }
    let sym = (a + a.transpose()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = RVec::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = RMat::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// `V diag(g(λ)) V*`. Fails with `DomainError` when `g` is not finite at
/// some eigenvalue.
pub fn herm_fun<F: Fn(f64) -> Complex64>(a: &HermitianMatrix, g: F) -> Result<CMat> {
    let eig = herm_eig(a);
    for &x in eig.values.iter() {
        let v = g(x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::DomainError(x));
        }
    }
    Ok(eig.apply(g))
}

pub fn herm_fun_real<F: Fn(f64) -> f64>(a: &HermitianMatrix, g: F) -> Result<HermitianMatrix> {
    herm_fun(a, |x| c(g(x), 0.0)).map(|m| HermitianMatrix::hermitian_part(&m))
}

/// Functional calculus for a real symmetric matrix with a real function.
pub fn sym_fun<F: Fn(f64) -> f64>(a: &RMat, g: F) -> Result<RMat> {
    let (vals, vecs) = sym_eig(a);
    let mut scaled = vecs.clone();
    for k in 0..vals.len() {
        let gk = g(vals[k]);
        if !gk.is_finite() {
            return Err(Error::DomainError(vals[k]));
        }
        scaled.column_mut(k).scale_mut(gk);
    }
    let out = scaled * vecs.transpose();
    Ok((&out + out.transpose()).scale(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eig: f64,
    pub threshold: f64,
}

/// `is_psd` iff `min_eig ≥ −tol · max(1, trace|G|)`.
pub fn psd_check(g: &HermitianMatrix, tol: f64) -> PsdReport {
    if g.dim() == 0 {
        return PsdReport {
            is_psd: true,
            min_eig: 0.0,
            threshold: 0.0,
        };
    }
    let eig = herm_eig(g);
    let min_eig = eig.values[0];
    let trace_abs: f64 = eig.values.iter().map(|x| x.abs()).sum();
    let threshold = -tol * trace_abs.max(1.0);
    PsdReport {
        is_psd: min_eig >= threshold,
        min_eig,
        threshold,
    }
}

/// Polar decomposition `D = I·|D|` of an injective real skew matrix.
#[derive(Clone, Debug)]
pub struct SkewPolar {
    pub complex_structure: RMat,
    pub abs: RMat,
}

pub fn polar_skew(d: &SkewSymmetricReal) -> Result<SkewPolar> {
    let dm = d.matrix();
    let n = d.dim();
    if n == 0 {
        return Ok(SkewPolar {
            complex_structure: RMat::zeros(0, 0),
            abs: RMat::zeros(0, 0),
        });
    }
    let svd = dm.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vᵀ"));
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if smax == 0.0 || smin <= 1e-12 * smax {
        return Err(Error::SingularD(smin));
    }
    let complex_structure = &u * &vt;
    let mut scaled = vt.transpose();
    for k in 0..n {
        scaled.column_mut(k).scale_mut(sv[k]);
    }
    let abs = scaled * &vt;
    let abs = (&abs + abs.transpose()).scale(0.5);
    Ok(SkewPolar {
        complex_structure,
        abs,
    })
}

/// Orthogonal projection onto the numerical kernel of a real skew matrix and
/// the polar parts on its orthogonal complement (`I` and `|D|` vanish on the
/// kernel).
#[derive(Clone, Debug)]
pub struct SkewPolarWithKernel {
    pub kernel_projection: RMat,
    pub complex_structure: RMat,
    pub abs: RMat,
}

pub fn polar_skew_with_kernel(d: &SkewSymmetricReal, rel: f64) -> SkewPolarWithKernel {
    let dm = d.matrix();
    let n = d.dim();
    if n == 0 {
        return SkewPolarWithKernel {
            kernel_projection: RMat::zeros(0, 0),
            complex_structure: RMat::zeros(0, 0),
            abs: RMat::zeros(0, 0),
        };
    }
    let svd = dm.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested Vᵀ"));
    let sv = &svd.singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = rel_tol(smax, rel);
    let mut p1 = RMat::zeros(n, n);
    let mut abs = RMat::zeros(n, n);
    let mut i_mat = RMat::zeros(n, n);
    for k in 0..n {
        if sv[k] > cut {
            let v = vt.row(k).transpose();
            let outer = &v * v.transpose();
            i_mat += u.column(k) * vt.row(k);
            abs += outer.scale(sv[k]);
            p1 += outer;
        }
    }
    let p1 = (&p1 + p1.transpose()).scale(0.5);
    SkewPolarWithKernel {
        kernel_projection: RMat::identity(n, n) - p1,
        complex_structure: i_mat,
        abs: (&abs + abs.transpose()).scale(0.5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rot() -> RMat {
        RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> HermitianMatrix {
        let m = CMat::from_fn(n, n, |i, j| {
            let k = (i * n + j) % seed.len();
            c(seed[k], seed[(k + 7) % seed.len()])
        });
        HermitianMatrix::hermitian_part(&m)
    }

    #[test]
    fn identity_eigenvalues() {
        let e = herm_eig(&HermitianMatrix::new(identity_c(3)).unwrap());
        assert!(e.values.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diagonal_eigen_sorted() {
        let a = HermitianMatrix::from_real(&RMat::from_diagonal(&RVec::from_vec(vec![2.0, -1.0])))
            .unwrap();
        let e = herm_eig(&a);
        assert_eq!(e.values.as_slice(), &[-1.0, 2.0]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn random_reconstruction() {
        let seed = [0.3, -1.2, 0.7, 2.1, -0.4, 0.9, 1.5, -2.2, 0.05, 0.61, -0.83];
        let a = random_hermitian(6, &seed);
        let e = herm_eig(&a);
        let rec = e.reconstruct();
        let scale = op_norm_c(a.matrix());
        assert!(max_abs_c(&(rec - a.matrix())) <= 1e-10 * scale);
        let u = &e.vectors;
        assert!(max_abs_c(&(u.adjoint() * u - identity_c(6))) <= 1e-10);
        for k in 0..6 {
            let v = u.column(k);
            let r = a.matrix() * v - v * c(e.values[k], 0.0);
            assert!(r.norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn fun_examples() {
        let id = HermitianMatrix::new(identity_c(3)).unwrap();
        let r = herm_fun(&id, |x| c(x.sqrt(), 0.0)).unwrap();
        assert!(max_abs_c(&(r - identity_c(3))) < 1e-15);

        let four = HermitianMatrix::from_real(&RMat::from_element(1, 1, 4.0)).unwrap();
        let r = herm_fun(&four, |x| c(x.sqrt(), 0.0)).unwrap();
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-15);

        let e2 = 2f64.exp();
        let d =
            HermitianMatrix::from_real(&RMat::from_diagonal(&RVec::from_vec(vec![e2, 1.0 / e2])))
                .unwrap();
        let r = herm_fun(&d, |x| c((x.ln() / 2.0).tanh(), 0.0)).unwrap();
        let t1 = 1f64.tanh();
        assert!((r[(0, 0)].re - t1).abs() < 1e-14);
        assert!((r[(1, 1)].re + t1).abs() < 1e-14);
        assert!(r[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn domain_error_on_log_of_nonpositive() {
        let a = HermitianMatrix::from_real(&RMat::from_diagonal(&RVec::from_vec(vec![1.0, 0.0])))
            .unwrap();
        assert!(matches!(
            herm_fun(&a, |x| c(x.ln(), 0.0)),
            Err(Error::DomainError(_))
        ));
        let b = HermitianMatrix::from_real(&RMat::from_diagonal(&RVec::from_vec(vec![1.0, -2.0])))
            .unwrap();
        assert!(matches!(
            herm_fun(&b, |x| c(x.ln(), 0.0)),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn psd_examples() {
        let z = HermitianMatrix::new(CMat::zeros(3, 3)).unwrap();
        let r = psd_check(&z, 1e-8);
        assert!(r.is_psd);
        assert_eq!(r.min_eig, 0.0);
        let d = HermitianMatrix::from_real(&RMat::from_diagonal(&RVec::from_vec(vec![1.0, -0.5])))
            .unwrap();
        let r = psd_check(&d, 1e-8);
        assert!(!r.is_psd);
        assert!((r.min_eig + 0.5).abs() < 1e-15);
    }

    fn check_polar(d: &RMat, p: &SkewPolar) {
        let n = d.nrows();
        let scale = op_norm_r(d);
        let i = &p.complex_structure;
        assert!(max_abs_r(&(d - i * &p.abs)) <= 1e-10 * scale);
        assert!(max_abs_r(&(i * i + RMat::identity(n, n))) <= 1e-10);
        assert!(max_abs_r(&(i.transpose() * i - RMat::identity(n, n))) <= 1e-10);
        assert!(max_abs_r(&(i * &p.abs - &p.abs * i)) <= 1e-10 * scale);
    }

    #[test]
    fn polar_examples() {
        let d = SkewSymmetricReal::new(rot()).unwrap();
        let p = polar_skew(&d).unwrap();
        assert!(max_abs_r(&(&p.complex_structure - rot())) < 1e-14);
        assert!(max_abs_r(&(&p.abs - RMat::identity(2, 2))) < 1e-14);

        let d3 = SkewSymmetricReal::new(rot().scale(3.0)).unwrap();
        let p = polar_skew(&d3).unwrap();
        assert!(max_abs_r(&(&p.complex_structure - rot())) < 1e-14);
        assert!(max_abs_r(&(&p.abs - RMat::identity(2, 2).scale(3.0))) < 1e-13);

        let mut i0 = RMat::zeros(4, 4);
        i0.view_mut((0, 0), (2, 2)).copy_from(&rot());
        i0.view_mut((2, 2), (2, 2)).copy_from(&rot());
        let diag = RMat::from_diagonal(&RVec::from_vec(vec![0.4, 0.4, 1.7, 1.7]));
        let d = &i0 * &diag;
        let p = polar_skew(&SkewSymmetricReal::new(d.clone()).unwrap()).unwrap();
        check_polar(&d, &p);
        assert!(max_abs_r(&(&p.complex_structure - &i0)) < 1e-12);
    }

    #[test]
    fn polar_singular_rejected() {
        let mut d = RMat::zeros(3, 3);
        d.view_mut((0, 0), (2, 2)).copy_from(&rot());
        let s = SkewSymmetricReal::new(d).unwrap();
        assert!(matches!(polar_skew(&s), Err(Error::SingularD(_))));
        let k = polar_skew_with_kernel(&s, 1e-10);
        assert!((k.kernel_projection[(2, 2)] - 1.0).abs() < 1e-12);
        assert!(max_abs_r(&(k.complex_structure.view((0, 0), (2, 2)) - rot())) < 1e-12);
    }

    #[test]
    fn realify_is_homomorphism() {
        let a = random_hermitian(3, &[0.1, 0.5, -0.3, 0.8, 1.1]).into_inner();
        let b = CMat::from_fn(3, 3, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.1));
        let lhs = realify(&(&a * &b));
        let rhs = realify(&a) * realify(&b);
        assert!(max_abs_r(&(lhs - rhs)) < 1e-13);
    }

    fn arb_hermitian(n: usize) -> impl Strategy<Value = HermitianMatrix> {
        proptest::collection::vec(-2.0f64..2.0, 2 * n * n).prop_map(move |v| {
            let m = CMat::from_fn(n, n, |i, j| c(v[i * n + j], v[n * n + i * n + j]));
            HermitianMatrix::hermitian_part(&m)
        })
    }

    fn arb_skew(n: usize) -> impl Strategy<Value = SkewSymmetricReal> {
        proptest::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
            let m = RMat::from_row_slice(n, n, &v);
            SkewSymmetricReal::new((&m - m.transpose()).scale(0.5)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn composition_of_functions(a in arb_hermitian(4)) {
            let h = |x: f64| x.exp();
            let g = |x: f64| x.ln().sin();
            let lhs = herm_fun(&a, |x| c(g(h(x)), 0.0)).unwrap();
            let inner = herm_fun_real(&a, h).unwrap();
            let rhs = herm_fun(&inner, |x| c(g(x), 0.0)).unwrap();
            let scale = op_norm_c(a.matrix()).max(1.0);
            prop_assert!(max_abs_c(&(lhs - rhs)) <= 1e-9 * scale);
        }

        #[test]
        fn psd_monotone(a in arb_hermitian(3), b in arb_hermitian(3)) {
            let g1 = HermitianMatrix::hermitian_part(&(a.matrix().adjoint() * a.matrix()));
            let extra = b.matrix().adjoint() * b.matrix();
            let g2 = HermitianMatrix::hermitian_part(&(g1.matrix() + extra));
            let tol = 1e-10;
            prop_assert!(psd_check(&g1, tol).is_psd);
            prop_assert!(psd_check(&g2, tol).is_psd);
        }

        #[test]
        fn polar_properties(d in arb_skew(4)) {
            match polar_skew(&d) {
                Ok(p) => check_polar(d.matrix(), &p),
                Err(Error::SingularD(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }
}
