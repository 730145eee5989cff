use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matfun::{
    c, herm_eig, herm_fun, max_abs_c, op_norm_c, psd_check, CMat, HermitianMatrix,
};

use super::extension::RTauFunction;
use super::RTauElement;

/// A finite sample of a reflection positive Hilbert space: the Gram matrix of
/// a generating family, the involution in that family, and the indices of the
/// generators spanning `E₊`.
#[derive(Clone, Debug)]
pub struct ReflectionPositiveSpace {
    gram: HermitianMatrix,
    theta: CMat,
    plus: Vec<usize>,
}

impl ReflectionPositiveSpace {
    pub fn new(gram: HermitianMatrix, theta: CMat, plus: Vec<usize>) -> Result<Self> {
        let n = gram.dim();
        if theta.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "theta is {}x{}, gram is {n}x{n}",
                theta.nrows(),
                theta.ncols()
            )));
        }
        if let Some(&k) = plus.iter().find(|&&k| k >= n) {
            return Err(Error::DimensionMismatch(format!(
                "generator index {k} out of range"
            )));
        }
        let scale = max_abs_c(gram.matrix()).max(1.0);
        let square = max_abs_c(&(&theta * &theta - CMat::identity(n, n)));
        let g = gram.matrix();
        let unitary = max_abs_c(&(theta.adjoint() * g * &theta - g));
        if square > 1e-9 || unitary > 1e-9 * scale {
            return Err(Error::BadParams(format!(
                "theta must be an involution preserving the Gram matrix \
                 (defects {square:.3e}, {unitary:.3e})"
            )));
        }
        Ok(ReflectionPositiveSpace { gram, theta, plus })
    }

    /// Generators `U_{(t,ε)} j(e_k)` for `t` in `times` and both `ε`, with
    /// `θ` exchanging `(t,0)` and `(t,1)`. `E₊` uses the `ε = 0` generators
    /// with `t ∈ [0, β/2]`.
    pub fn from_rtau<F: RTauFunction + ?Sized>(f: &F, times: &[f64]) -> Result<Self> {
        let m = f.dim();
        let elems: Vec<RTauElement> = times
            .iter()
            .flat_map(|&t| [RTauElement::new(t, false), RTauElement::new(t, true)])
            .collect();
        let gram = super::extension::rtau_gram(f, &elems)?;
        let n = elems.len() * m;
        let mut theta = CMat::zeros(n, n);
        for a in 0..elems.len() {
            let b = a ^ 1;
            for k in 0..m {
                theta[(b * m + k, a * m + k)] = c(1.0, 0.0);
            }
        }
        let half = f.beta() / 2.0;
        let plus = times
            .iter()
            .enumerate()
            .filter(|(_, &t)| (-1e-14..=half + 1e-14).contains(&t))
            .flat_map(|(i, _)| (0..m).map(move |k| 2 * i * m + k))
            .collect();
        ReflectionPositiveSpace::new(gram, theta, plus)
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn theta(&self) -> &CMat {
        &self.theta
    }

    pub fn plus(&self) -> &[usize] {
        &self.plus
    }

    /// `⟨θ g_a, g_b⟩` over the `E₊` generators.
    pub fn twisted_gram(&self) -> HermitianMatrix {
        let tg = self.theta.adjoint() * self.gram.matrix();
        let p = self.plus.len();
        let h = CMat::from_fn(p, p, |a, b| tg[(self.plus[a], self.plus[b])]);
        HermitianMatrix::hermitian_part(&h)
    }
}

/// The quotient `Ê = E₊/N`: `q_map` sends generator coefficients to
/// coordinates in an orthonormal basis of `Ê`, so `gram_hat = q*q`.
#[derive(Clone, Debug)]
pub struct OsQuotient {
    pub twisted_gram: HermitianMatrix,
    pub gram_hat: HermitianMatrix,
    pub q_map: CMat,
    pub nullity: usize,
}

impl OsQuotient {
    pub fn rank(&self) -> usize {
        self.q_map.nrows()
    }
}

pub fn os_quantize(space: &ReflectionPositiveSpace) -> Result<OsQuotient> {
    let h = space.twisted_gram();
    let report = psd_check(&h, 1e-8);
    if !report.is_psd {
        return Err(Error::NotThetaPositive(report.min_eig));
    }
    let eig = herm_eig(&h);
    let top = eig.values.iter().fold(0.0f64, |a, x| a.max(*x));
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&k| top > 0.0 && eig.values[k] > 1e-8 * top)
        .collect();
    let p = h.dim();
    let mut q_map = CMat::zeros(keep.len(), p);
    for (r, &k) in keep.iter().enumerate() {
        let s = eig.values[k].sqrt();
        for col in 0..p {
            q_map[(r, col)] = eig.vectors[(col, k)].conj() * s;
        }
    }
    let gram_hat = HermitianMatrix::hermitian_part(&(q_map.adjoint() * &q_map));
    Ok(OsQuotient {
        twisted_gram: h,
        gram_hat,
        nullity: p - keep.len(),
        q_map,
    })
}

/// A `θ`-positive subspace `K ⊆ E¹ ⊕ E⁻¹` written as the graph of `Z`.
#[derive(Clone, Debug)]
pub struct GraphReport {
    /// `Z` composed with an orthonormal basis of its domain.
    pub z: CMat,
    pub z_norm: f64,
    pub psi_one_defect: f64,
    pub psi_tau_defect: f64,
    pub phi_tau: CMat,
    pub phi_tau_defect: f64,
    pub ambient_defect: f64,
    pub z_strict: bool,
    pub q_injective: bool,
}

impl GraphReport {
    pub fn max_defect(&self) -> f64 {
        self.psi_one_defect
            .max(self.psi_tau_defect)
            .max(self.phi_tau_defect)
            .max(self.ambient_defect)
    }
}

/// `E = ℂ^{e1_dim} ⊕ ℂ^{n − e1_dim}` with the standard inner product and
/// `θ = diag(1, −1)`; `K` is the column span of `k_basis`.
pub fn graph_operator(e1_dim: usize, k_basis: &CMat) -> Result<GraphReport> {
    let n = k_basis.nrows();
    if e1_dim > n {
        return Err(Error::DimensionMismatch(format!(
            "E¹ has dimension {e1_dim} > {n}"
        )));
    }
    let k_basis = orthonormal_range(k_basis, 0.0);
    let dim_k = k_basis.ncols();
    let a = k_basis.rows(0, e1_dim).into_owned();
    let b = k_basis.rows(e1_dim, n - e1_dim).into_owned();
    let rank_a = orthonormal_range(&a, 1.0).ncols();
    if rank_a < dim_k {
        return Err(Error::NotGraph(format!(
            "K meets E⁻¹ in dimension {}",
            dim_k - rank_a
        )));
    }
    let u = orthonormal_range(&a, 1.0);
    let a_pinv = a
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::NotGraph(e.to_string()))?;
    let z = &b * a_pinv * &u;
    let k = u.ncols();
    let mut j = CMat::zeros(n, k);
    j.rows_mut(0, e1_dim).copy_from(&u);
    j.rows_mut(e1_dim, n - e1_dim).copy_from(&z);
    let mut theta = CMat::identity(n, n);
    for i in e1_dim..n {
        theta[(i, i)] = c(-1.0, 0.0);
    }
    let w = z.adjoint() * &z;
    let one = CMat::identity(k, k);
    let psi_one_defect = max_abs_c(&(j.adjoint() * &j - (&one + &w)));
    let psi_tau_defect = max_abs_c(&(j.adjoint() * &theta * &j - (&one - &w)));

    let w_h = HermitianMatrix::hermitian_part(&w);
    let cayley = herm_fun(&w_h, |x| c((1.0 - x) / (1.0 + x), 0.0))?;
    let inv_sqrt = herm_fun(&w_h, |x| c(1.0 / (1.0 + x).sqrt(), 0.0))?;
    let u_pol = &j * inv_sqrt;
    let phi_tau = u_pol.adjoint() * &theta * &u_pol;
    let phi_tau_defect = max_abs_c(&(&phi_tau - &cayley));
    let proj = &u_pol * u_pol.adjoint();
    let ambient_defect = max_abs_c(&(&proj * &theta * &proj - &u_pol * &cayley * u_pol.adjoint()));

    let z_norm = op_norm_c(&z);
    let space = pair_space(&j, &theta)?;
    let quotient = os_quantize(&space)?;
    Ok(GraphReport {
        z,
        z_norm,
        psi_one_defect,
        psi_tau_defect,
        phi_tau,
        phi_tau_defect,
        ambient_defect,
        z_strict: z_norm < 1.0 - 1e-8,
        q_injective: quotient.nullity == 0,
    })
}

/// Orthonormal basis of the range, dropping singular values below
/// `1e-10 · max(σ_max, floor)`.
fn orthonormal_range(a: &CMat, floor: f64) -> CMat {
    if a.ncols() == 0 || a.nrows() == 0 {
        return CMat::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.iter().fold(floor, |m, s| m.max(*s));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > 1e-10 * top)
        .collect();
    CMat::from_fn(a.nrows(), keep.len(), |i, r| u[(i, keep[r])])
}

/// Generators `j e_k` and `θ j e_k` in an ambient space with the standard
/// inner product.
fn pair_space(j: &CMat, theta: &CMat) -> Result<ReflectionPositiveSpace> {
    let k = j.ncols();
    let n = j.nrows();
    let mut gens = CMat::zeros(n, 2 * k);
    gens.columns_mut(0, k).copy_from(j);
    gens.columns_mut(k, k).copy_from(&(theta * j));
    let gram = HermitianMatrix::hermitian_part(&(gens.adjoint() * &gens));
    let mut swap = CMat::zeros(2 * k, 2 * k);
    for i in 0..k {
        swap[(i + k, i)] = c(1.0, 0.0);
        swap[(i, i + k)] = c(1.0, 0.0);
    }
    ReflectionPositiveSpace::new(gram, swap, (0..k).collect())
}

/// The single-vector model `v = (a, b, c, d)` in
/// `E^{1,1} ⊕ E^{−1,1} ⊕ E^{1,−1} ⊕ E^{−1,−1}` of the Klein four-group,
/// with `E₊ = ℂv`.
#[derive(Clone, Debug)]
pub struct Klein4Report {
    /// `f(1), f(τ), f(σ), f(στ)` from the closed forms.
    pub f: [f64; 4],
    /// The same values from `⟨v, U_g v⟩` with explicit matrices.
    pub f_direct: [f64; 4],
    pub line_theta_positive: bool,
    pub pair_theta_positive: bool,
    pub pair_criterion: bool,
    /// `f₁(1), f₁(τ)` and `f₋₁(1), f₋₁(τ)`.
    pub f_even: [f64; 2],
    pub f_odd: [f64; 2],
    pub even_rp: bool,
    pub odd_rp: bool,
}

impl Klein4Report {
    /// Pair `θ`-positivity, the norm criterion and reflection positivity of
    /// both parts all coincide, and both routes give the same `f`.
    pub fn consistent(&self) -> bool {
        self.f == self.f_direct
            && self.pair_theta_positive == self.pair_criterion
            && self.pair_criterion == (self.even_rp && self.odd_rp)
    }
}

pub fn klein4_analysis(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Klein4Report {
    let (a2, b2, c2, d2) = (a.norm_sqr(), b.norm_sqr(), cc.norm_sqr(), d.norm_sqr());
    let f = [
        a2 + b2 + c2 + d2,
        a2 + b2 - c2 - d2,
        a2 - b2 + c2 - d2,
        a2 - b2 - c2 + d2,
    ];
    let v = [a, b, cc, d];
    let u_sigma = [1.0, -1.0, 1.0, -1.0];
    let u_tau = [1.0, 1.0, -1.0, -1.0];
    let pairing = |x: &[Complex64; 4], w: &[f64; 4], y: &[Complex64; 4]| -> f64 {
        (0..4).map(|k| (x[k].conj() * y[k] * w[k]).re).sum()
    };
    let ones = [1.0; 4];
    let st = [1.0, -1.0, -1.0, 1.0];
    let f_direct = [
        pairing(&v, &ones, &v),
        pairing(&v, &u_tau, &v),
        pairing(&v, &u_sigma, &v),
        pairing(&v, &st, &v),
    ];
    let sv: [Complex64; 4] = std::array::from_fn(|k| v[k] * u_sigma[k]);
    let p = pairing(&v, &u_tau, &v);
    let q = pairing(&v, &u_tau, &sv);
    let r = pairing(&sv, &u_tau, &sv);
    let pair_theta_positive = p >= 0.0 && r >= 0.0 && p * r - q * q >= 0.0;
    Klein4Report {
        f,
        f_direct,
        line_theta_positive: f[1] >= 0.0,
        pair_theta_positive,
        pair_criterion: d2 <= b2 && c2 <= a2,
        f_even: [a2 + c2, a2 - c2],
        f_odd: [b2 + d2, b2 - d2],
        even_rp: a2 - c2 >= 0.0,
        odd_rp: b2 - d2 >= 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        c(x, 0.0)
    }

    #[test]
    fn identity_theta_is_isometric() {
        let g = HermitianMatrix::new(CMat::from_row_slice(
            2,
            2,
            &[r(2.0), r(1.0), r(1.0), r(3.0)],
        ))
        .unwrap();
        let space =
            ReflectionPositiveSpace::new(g.clone(), CMat::identity(2, 2), vec![0, 1]).unwrap();
        let q = os_quantize(&space).unwrap();
        assert!(max_abs_c(&(q.gram_hat.matrix() - g.matrix())) < 1e-12);
        assert_eq!(q.nullity, 0);
    }

    #[test]
    fn orthogonal_reflection_gives_zero_quotient() {
        let g = HermitianMatrix::new(CMat::identity(2, 2)).unwrap();
        let theta = CMat::from_row_slice(2, 2, &[r(0.0), r(1.0), r(1.0), r(0.0)]);
        let q = os_quantize(&ReflectionPositiveSpace::new(g, theta, vec![0]).unwrap()).unwrap();
        assert_eq!(q.rank(), 0);
        assert_eq!(q.nullity, 1);
    }

    #[test]
    fn negative_twisted_gram_rejected() {
        let g = HermitianMatrix::new(CMat::identity(2, 2)).unwrap();
        let theta = CMat::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(-1.0)]);
        let space = ReflectionPositiveSpace::new(g, theta, vec![1]).unwrap();
        assert!(matches!(
            os_quantize(&space),
            Err(Error::NotThetaPositive(_))
        ));
    }

    #[test]
    fn graph_zero_and_half() {
        let k = CMat::from_row_slice(2, 1, &[r(1.0), r(0.0)]);
        let rep = graph_operator(1, &k).unwrap();
        assert!(rep.z_norm < 1e-14);
        assert!((rep.phi_tau[(0, 0)] - r(1.0)).norm() < 1e-12);

        let k = CMat::from_row_slice(
            4,
            2,
            &[
                r(1.0),
                r(0.0),
                r(0.0),
                r(1.0),
                r(0.5),
                r(0.0),
                r(0.0),
                r(0.5),
            ],
        );
        let rep = graph_operator(2, &k).unwrap();
        assert!((rep.z_norm - 0.5).abs() < 1e-12);
        assert!(max_abs_c(&(&rep.phi_tau - CMat::identity(2, 2) * r(0.6))) < 1e-12);
        assert!(rep.max_defect() < 1e-10);
        assert!(rep.z_strict && rep.q_injective);
    }

    #[test]
    fn graph_isometric_direction_kills_q() {
        let k = CMat::from_row_slice(
            4,
            2,
            &[
                r(1.0),
                r(0.0),
                r(0.0),
                r(1.0),
                r(1.0),
                r(0.0),
                r(0.0),
                r(0.3),
            ],
        );
        let rep = graph_operator(2, &k).unwrap();
        assert!(!rep.z_strict && !rep.q_injective);
    }

    #[test]
    fn graph_rejects_negative_eigenspace() {
        let k = CMat::from_row_slice(2, 1, &[r(0.0), r(1.0)]);
        assert!(matches!(graph_operator(1, &k), Err(Error::NotGraph(_))));
    }

    #[test]
    fn klein4_examples() {
        let rep = klein4_analysis(r(2.0), r(1.0), r(1.0), r(0.0));
        assert_eq!(rep.f, [6.0, 4.0, 4.0, 2.0]);
        assert!(rep.consistent() && rep.even_rp && rep.pair_theta_positive);

        let rep = klein4_analysis(r(1.0), r(1.0), r(0.0), r(0.0));
        assert!(rep.line_theta_positive && rep.pair_theta_positive && rep.consistent());

        let rep = klein4_analysis(r(1.0), r(1.0), r(2.0), r(0.0));
        assert_eq!(rep.f[1], -2.0);
        assert!(!rep.line_theta_positive && rep.consistent());

        let rep = klein4_analysis(r(2.0), r(1.0), r(1.0), r(2.0));
        assert_eq!(rep.f[1], 0.0);
        assert!(rep.line_theta_positive);
        assert!(!rep.pair_theta_positive && !rep.odd_rp && rep.consistent());
    }

    #[test]
    fn klein4_complex_entries() {
        let rep = klein4_analysis(c(1.0, 1.0), c(0.0, 2.0), c(1.0, -1.0), c(1.0, 0.0));
        assert_eq!(rep.f, [9.0, 3.0, -1.0, -3.0]);
        assert!(rep.consistent());
    }
}
