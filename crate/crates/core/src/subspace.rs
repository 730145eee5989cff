//! Standard real subspaces `V = (1+iC_E)E ⊂ ℂⁿ`, their modular objects
//! `(Δ, J)` and the skew contraction induced on `V`.
//!
//! Antilinear maps are stored as complex matrices acting after entrywise
//! conjugation: `x ↦ M·conj(x)`.

use crate::error::{Error, Result};
use crate::matfun::{
    c, complexify_columns, herm_fun, herm_fun_real, identity_c, max_abs_c, max_abs_r, null_space,
    numerical_rank, op_norm_c, psd_check, realify_columns, subspace_distance, sym_eig, to_complex,
    CMat, HermitianMatrix, RMat, SkewSymmetricReal, STRICT_MARGIN,
};
use crate::report::{Check, Report};

/// `E = ℝⁿ` together with a skew contraction `C_E`; it encodes
/// `V = (1+iC_E)E`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardSubspaceE {
    c_e: SkewSymmetricReal,
}

impl StandardSubspaceE {
    pub fn new(c_e: SkewSymmetricReal) -> Result<Self> {
        let norm = c_e.norm();
        if norm > 1.0 + 1e-12 {
            return Err(Error::NotContraction(norm));
        }
        Ok(StandardSubspaceE { c_e })
    }

    pub fn dim(&self) -> usize {
        self.c_e.dim()
    }

    pub fn contraction(&self) -> &SkewSymmetricReal {
        &self.c_e
    }

    /// Columns `(1+iC_E)e_k`, a real basis of `V`.
    pub fn basis(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| {
            c(if i == j { 1.0 } else { 0.0 }, self.c_e.matrix()[(i, j)])
        })
    }
}

/// Positive invertible `Δ` and antiunitary involution `J` (stored as
/// `x ↦ J·conj(x)`).
#[derive(Clone, Debug)]
pub struct ModularPair {
    delta: HermitianMatrix,
    delta_inv: CMat,
    j: CMat,
}

impl ModularPair {
    pub fn new(delta: HermitianMatrix, j: CMat) -> Result<Self> {
        let n = delta.dim();
        if j.shape() != (n, n) {
            return Err(Error::DimensionMismatch("J and Δ differ in size".into()));
        }
        let min = psd_check(&delta, 0.0).min_eig;
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "Δ has eigenvalue {min:.3e}"
            )));
        }
        let inv = max_abs_c(&(&j * j.conjugate() - identity_c(n)));
        let unit = max_abs_c(&(j.adjoint() * &j - identity_c(n)));
        if inv > 1e-9 || unit > 1e-9 {
            return Err(Error::BadParams(format!(
                "J is not an antiunitary involution (defects {inv:.3e}, {unit:.3e})"
            )));
        }
        let delta_inv = herm_fun(&delta, |x| c(1.0 / x, 0.0))?;
        Ok(ModularPair {
            delta,
            delta_inv,
            j,
        })
    }

    /// Replaces the inverse computed from `Δ` by one obtained from an
    /// independent, better conditioned route.
    fn with_inverse(mut self, delta_inv: CMat) -> Self {
        self.delta_inv = delta_inv;
        self
    }

    pub fn dim(&self) -> usize {
        self.delta.dim()
    }

    pub fn delta(&self) -> &HermitianMatrix {
        &self.delta
    }

    pub fn j(&self) -> &CMat {
        &self.j
    }

    pub fn delta_power(&self, p: f64) -> CMat {
        herm_fun(&self.delta, |x| c(x.powf(p), 0.0)).expect("Δ is positive")
    }

    /// Matrix `M` of the Tomita operator `S = JΔ^{1/2}`, `S x = M·conj(x)`.
    pub fn tomita(&self) -> CMat {
        &self.j * self.delta_power(0.5).conjugate()
    }

    /// `‖JΔJ − Δ⁻¹‖ / ‖Δ‖`.
    pub fn jdj_defect(&self) -> f64 {
        let jdj = &self.j * self.delta.matrix().conjugate() * self.j.conjugate();
        let diff = jdj - &self.delta_inv;
        op_norm_c(&diff) / op_norm_c(self.delta.matrix())
    }

    /// Real basis (columns in ℝ²ⁿ) of the fixed space of `S`.
    pub fn fixed_space(&self) -> RMat {
        let s = antilinear_realify(&self.tomita());
        let n2 = s.nrows();
        null_space(&(s - RMat::identity(n2, n2)), 1e-9)
    }
}

/// Real 2n×2n matrix of `x ↦ M·conj(x)` in coordinates (Re x, Im x).
pub fn antilinear_realify(m: &CMat) -> RMat {
    let n = m.nrows();
    let k = m.ncols();
    let mut out = RMat::zeros(2 * n, 2 * k);
    for i in 0..n {
        for j in 0..k {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + k)] = z.im;
            out[(i + n, j)] = z.im;
            out[(i + n, j + k)] = -z.re;
        }
    }
    out
}

/// A strict skew contraction on `V ≅ ℝᵐ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionOnV(SkewSymmetricReal);

impl ContractionOnV {
    pub fn new(c: SkewSymmetricReal) -> Result<Self> {
        if !c.is_strict() {
            return Err(Error::NotStrict(c.norm()));
        }
        Ok(ContractionOnV(c))
    }

    pub fn from_matrix(m: RMat) -> Result<Self> {
        Self::new(SkewSymmetricReal::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn skew(&self) -> &SkewSymmetricReal {
        &self.0
    }

    pub fn matrix(&self) -> &RMat {
        self.0.matrix()
    }

    pub fn times_i(&self) -> HermitianMatrix {
        self.0.times_i()
    }

    /// The real skew generator `D` with `e^{tD} = Δ^{−it}|_V`, computed as
    /// `i·log((1+iC)/(1−iC))`.
    pub fn generator(&self) -> RMat {
        let h = herm_fun(&self.times_i(), |x| c(((1.0 + x) / (1.0 - x)).ln(), 0.0))
            .expect("strict contraction");
        (h * c(0.0, 1.0)).map(|z| z.re)
    }

    /// `e^{tD}` through the spectrum of `iC`.
    pub fn flow(&self, t: f64) -> RMat {
        let m = herm_fun(&self.times_i(), |x| {
            let l = ((1.0 + x) / (1.0 - x)).ln();
            c(0.0, t * l).exp()
        })
        .expect("strict contraction");
        m.map(|z| z.re)
    }
}

/// Thresholds matching `‖C‖ ≤ 1 − δ` for the quantities appearing in the
/// standardness conditions.
fn margin_sq() -> f64 {
    1.0 - (1.0 - STRICT_MARGIN).powi(2)
}

pub fn modular_from_contraction(s: &StandardSubspaceE) -> Result<ModularPair> {
    if !s.contraction().is_strict() {
        return Err(Error::NotStrict(s.contraction().norm()));
    }
    let ic = s.contraction().times_i();
    let delta = herm_fun_real(&ic, |x| ((1.0 - x) / (1.0 + x)).powi(2))?;
    let delta_inv = herm_fun_real(&ic, |x| ((1.0 + x) / (1.0 - x)).powi(2))?;
    Ok(ModularPair::new(delta, identity_c(s.dim()))?.with_inverse(delta_inv.into_inner()))
}

/// Distance between `Fix(JΔ^{1/2})` and `(1+iC_E)E` as real subspaces of
/// ℝ²ⁿ.
pub fn fixed_space_distance(mp: &ModularPair, s: &StandardSubspaceE) -> f64 {
    subspace_distance(&mp.fixed_space(), &realify_columns(&s.basis()))
}

/// The seven equivalent strictness/standardness conditions together with
/// the quantities they were read from.
#[derive(Clone, Debug)]
pub struct StandardReport {
    pub min_eig_one_plus_c2: f64,
    pub norm: f64,
    pub bilinear_sup: f64,
    pub dim_v_cap_iv: usize,
    pub min_abs_eig_one_plus_ic: f64,
    pub min_abs_eig_one_minus_ic: f64,
    pub rank_v_plus_iv: usize,
    pub minus_i_eigenspace_dim: usize,
    pub conditions: [bool; 7],
}

impl StandardReport {
    pub fn all_agree(&self) -> bool {
        self.conditions.iter().all(|&b| b == self.conditions[0])
    }

    pub fn is_standard(&self) -> bool {
        self.conditions[6]
    }
}

pub fn check_standard(s: &StandardSubspaceE) -> StandardReport {
    let n = s.dim();
    let cm = s.contraction().matrix();
    let delta = STRICT_MARGIN;

    let one_c2 = RMat::identity(n, n) + cm * cm;
    let (vals, _) = sym_eig(&one_c2);
    let min_eig_one_plus_c2 = if n == 0 { 1.0 } else { vals[0] };

    let norm = s.contraction().norm();
    let (ctc, _) = sym_eig(&(cm.transpose() * cm));
    let bilinear_sup = if n == 0 {
        0.0
    } else {
        ctc[n - 1].max(0.0).sqrt()
    };

    let v = realify_columns(&s.basis());
    let iv = realify_columns(&(s.basis() * c(0.0, 1.0)));
    let mut pair = RMat::zeros(2 * n, 2 * n);
    pair.view_mut((0, 0), (2 * n, n)).copy_from(&v);
    pair.view_mut((0, n), (2 * n, n)).copy_from(&(-&iv));
    let dim_v_cap_iv = null_space_abs(&pair, delta);
    pair.view_mut((0, n), (2 * n, n)).copy_from(&iv);
    let rank_v_plus_iv = 2 * n - null_space_abs(&pair, delta);

    let icv = crate::matfun::herm_eig(&s.contraction().times_i()).values;
    let min_abs_eig_one_plus_ic = icv
        .iter()
        .map(|x| (1.0 + x).abs())
        .fold(f64::INFINITY, f64::min);
    let min_abs_eig_one_minus_ic = icv
        .iter()
        .map(|x| (1.0 - x).abs())
        .fold(f64::INFINITY, f64::min);
    let minus_i_eigenspace_dim = icv.iter().filter(|&&x| x >= 1.0 - delta).count();

    let strict = |x: f64| x <= 1.0 - delta;
    let conditions = [
        min_eig_one_plus_c2 >= margin_sq(),
        strict(norm),
        strict(bilinear_sup),
        dim_v_cap_iv == 0,
        min_abs_eig_one_plus_ic.min(min_abs_eig_one_minus_ic) >= delta,
        rank_v_plus_iv == 2 * n,
        dim_v_cap_iv == 0 && rank_v_plus_iv == 2 * n,
    ];
    StandardReport {
        min_eig_one_plus_c2,
        norm,
        bilinear_sup,
        dim_v_cap_iv,
        min_abs_eig_one_plus_ic,
        min_abs_eig_one_minus_ic,
        rank_v_plus_iv,
        minus_i_eigenspace_dim,
        conditions,
    }
}

/// Number of singular values of `a` below the absolute threshold `cut`.
fn null_space_abs(a: &RMat, cut: f64) -> usize {
    if a.ncols() == 0 {
        return 0;
    }
    a.clone()
        .singular_values()
        .iter()
        .filter(|&&s| s < cut)
        .count()
}

/// Orthonormal bases of `E₀ = ker(C²+1)` and its orthogonal complement.
pub fn split_kernel(s: &StandardSubspaceE) -> (RMat, RMat) {
    let n = s.dim();
    let cm = s.contraction().matrix();
    let (vals, vecs) = sym_eig(&(RMat::identity(n, n) + cm * cm));
    let zero: Vec<usize> = (0..n).filter(|&k| vals[k] < margin_sq()).collect();
    let rest: Vec<usize> = (0..n).filter(|&k| vals[k] >= margin_sq()).collect();
    let pick = |idx: &[usize]| {
        let mut m = RMat::zeros(n, idx.len());
        for (j, &k) in idx.iter().enumerate() {
            m.set_column(j, &vecs.column(k));
        }
        m
    };
    (pick(&zero), pick(&rest))
}

/// The contraction `Ĉ|_V` read off from modular objects, in a
/// γ-orthonormal basis of `V`.
#[derive(Clone, Debug)]
pub struct ModularContraction {
    pub c_v: ContractionOnV,
    /// Columns: a basis of `V` orthonormal for `γ = Re⟨·,·⟩`.
    pub basis: CMat,
    /// Largest distance of `Ĉ b_k` from `V`.
    pub invariance_defect: f64,
    /// `max |Im⟨b_k, b_l⟩ − C_V[k,l]|`.
    pub omega_defect: f64,
}

pub fn contraction_on_v_from_modular(mp: &ModularPair) -> Result<ModularContraction> {
    let n = mp.dim();
    let fixed = mp.fixed_space();
    if fixed.ncols() != n {
        return Err(Error::DegenerateBasis(format!(
            "fixed space of S has real dimension {}, expected {n}",
            fixed.ncols()
        )));
    }
    let basis = complexify_columns(&fixed);
    let chat = herm_fun(mp.delta(), |x| c(0.0, (x - 1.0) / (x + 1.0)))?;
    let image = &chat * &basis;
    let cv = (basis.adjoint() * &image).map(|z| z.re);

    let image_real = realify_columns(&image);
    let projected = &fixed * (fixed.transpose() * &image_real);
    let invariance_defect = max_abs_r(&(image_real - projected));
    let omega = (basis.adjoint() * &basis).map(|z| z.im);
    let omega_defect = max_abs_r(&(&omega - &cv));

    let skew = SkewSymmetricReal::new((&cv - cv.transpose()).scale(0.5))?;
    Ok(ModularContraction {
        c_v: ContractionOnV::new(skew)?,
        basis,
        invariance_defect,
        omega_defect,
    })
}

/// `max_l ‖Δ^{−it} b_l − Σ_k (e^{tD})_{kl} b_k‖` where `D` is the generator
/// of the contraction on `V`.
pub fn flow_defect(mp: &ModularPair, mc: &ModularContraction, t: f64) -> f64 {
    let dt = herm_fun(mp.delta(), |x| c(0.0, -t * x.ln()).exp()).expect("Δ is positive");
    let lhs = dt * &mc.basis;
    let rhs = &mc.basis * to_complex(&mc.c_v.flow(t));
    let diff = lhs - rhs;
    (0..diff.ncols())
        .map(|k| diff.column(k).norm())
        .fold(0.0, f64::max)
}

/// Modular objects of the real span of the given columns, via
/// `S(v+iw) = v−iw`, `Δ = S*S`, `J = SΔ^{−1/2}`.
pub fn modular_from_subspace(v_basis: &CMat) -> Result<ModularPair> {
    let (n, k) = v_basis.shape();
    let real_rank = numerical_rank(&realify_columns(v_basis), 1e-10);
    if real_rank < k {
        return Err(Error::DegenerateBasis(format!(
            "{k} vectors span a real subspace of dimension {real_rank}"
        )));
    }
    if k != n {
        return Err(Error::NotStandard(format!(
            "real dimension {k} differs from complex dimension {n}"
        )));
    }
    let sv = v_basis.clone().singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if smin <= 1e-10 * smax {
        return Err(Error::NotStandard(format!(
            "V ∩ iV is nontrivial (smallest singular value {smin:.3e})"
        )));
    }
    let inv = v_basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotStandard("basis matrix is singular".into()))?;
    let m = v_basis * inv.conjugate();
    let delta = HermitianMatrix::hermitian_part(&(m.transpose() * m.conjugate()));
    let dinv_half = herm_fun(&delta, |x| c(x.powf(-0.5), 0.0))?;
    let j = &m * dinv_half.conjugate();
    let delta_inv = &m * m.adjoint();
    Ok(ModularPair::new(delta, j)?.with_inverse(delta_inv))
}

/// Reflection positivity of `V` with respect to complex conjugation `σ`.
#[derive(Clone, Debug)]
pub struct RealRpReport {
    pub report: Report,
    pub nullity: usize,
    pub kernel_dim: usize,
}

pub fn real_reflection_positivity(s: &StandardSubspaceE) -> Result<RealRpReport> {
    let n = s.dim();
    let b = s.basis();
    let cm = s.contraction().matrix();
    let g = b.transpose() * &b;
    let mut report = Report::new();
    report.push(Check::at_most(
        "gamma_sigma_real",
        max_abs_r(&g.map(|z| z.im)),
        1e-12,
    ));
    let expected = RMat::identity(n, n) + cm * cm;
    let gr = g.map(|z| z.re);
    report.push(Check::at_most(
        "gamma_sigma_equals_one_plus_c2",
        max_abs_r(&(&gr - &expected)),
        1e-12,
    ));
    let gh = HermitianMatrix::hermitian_part(&to_complex(&gr));
    let psd = psd_check(&gh, 1e-12);
    report.push(Check::at_least(
        "gamma_sigma_psd",
        psd.min_eig,
        psd.threshold,
    ));

    let (vals, _) = sym_eig(&gr);
    let nullity = vals.iter().filter(|&&x| x < margin_sq()).count();
    let (e0, _) = split_kernel(s);
    let kernel_dim = e0.ncols();
    report.push(Check::flag("nullspace_is_v0", nullity == kernel_dim));

    if s.contraction().is_strict() {
        let ic = s.contraction().times_i();
        let f = herm_fun(&ic, |x| c(((1.0 - x) / (1.0 + x)).sqrt(), 0.0))?;
        let w = &f * &b;
        let norms = (w.adjoint() * &w).map(|z| z.re);
        report.push(Check::at_most(
            "f_norm_equals_sigma_form",
            max_abs_r(&(norms - &gr)),
            1e-10,
        ));
        let sfs = f.conjugate() * &f;
        report.push(Check::at_most(
            "sigma_f_sigma_is_inverse",
            max_abs_c(&(sfs - identity_c(n))),
            1e-10,
        ));
    }
    Ok(RealRpReport {
        report,
        nullity,
        kernel_dim,
    })
}

/// A skew contraction on the quotient `V/ker γ`, in γ-orthonormal
/// coordinates given by `quotient`.
#[derive(Clone, Debug)]
pub struct QuotientContraction {
    /// r×m matrix sending `v` to its γ-orthonormal coordinates.
    pub quotient: RMat,
    pub c: SkewSymmetricReal,
}

/// The skew operator `C` with `ω(v,w) = γ(v, Cw)`; fails unless
/// `h = γ + iω` is positive semidefinite.
pub fn form_to_contraction(gamma: &RMat, omega: &RMat) -> Result<QuotientContraction> {
    let m = gamma.nrows();
    if !gamma.is_square() || omega.shape() != (m, m) {
        return Err(Error::DimensionMismatch(
            "γ and ω must be square of equal size".into(),
        ));
    }
    let gh = HermitianMatrix::from_real(gamma)?;
    let om = SkewSymmetricReal::new(omega.clone())?;
    let h = HermitianMatrix::new(gh.matrix() + om.matrix().map(|x| c(0.0, x)))?;
    let psd = psd_check(&h, 1e-12);
    if !psd.is_psd {
        return Err(Error::NotPositiveDefinite(format!(
            "γ + iω has eigenvalue {:.3e}",
            psd.min_eig
        )));
    }
    let (vals, vecs) = sym_eig(gamma);
    let vmax = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..m)
        .filter(|&k| vals[k] > 1e-12 * vmax.max(1e-300))
        .collect();
    let r = keep.len();
    let mut quotient = RMat::zeros(r, m);
    let mut lift = RMat::zeros(m, r);
    for (j, &k) in keep.iter().enumerate() {
        let s = vals[k].sqrt();
        for i in 0..m {
            quotient[(j, i)] = s * vecs[(i, k)];
            lift[(i, j)] = vecs[(i, k)] / s;
        }
    }
    let cm = lift.transpose() * om.matrix() * &lift;
    let c_skew = SkewSymmetricReal::new((&cm - cm.transpose()).scale(0.5))?;
    let norm = c_skew.norm();
    if norm > 1.0 + 1e-9 {
        return Err(Error::NotPositiveDefinite(format!("‖C‖ = {norm}")));
    }
    Ok(QuotientContraction {
        quotient,
        c: c_skew,
    })
}
