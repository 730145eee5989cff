//! Fourier sections on the `2β`-circle with the inner product of
//! `(λ² − Δ)⁻¹`, realizing the GNS space of `f♯` for `|D| = λ·1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matfun::{c, max_abs_r, numerical_rank_c, to_complex, CMat, CVec, RMat};
use crate::rpext::{u_minus_scalar, u_plus_scalar, RPFunction, RTauElement};

/// `H_λ` over `V = ℝ^m` with complex structure `I`.
#[derive(Clone, Debug)]
pub struct ResolventSpace {
    beta: f64,
    lambda: f64,
    i_mat: RMat,
}

impl ResolventSpace {
    pub fn new(beta: f64, lambda: f64, i_mat: RMat) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && lambda.is_finite() && lambda > 0.0) {
            return Err(Error::BadParams(format!(
                "need β > 0 and λ > 0, got β = {beta}, λ = {lambda}"
            )));
        }
        let m = i_mat.nrows();
        if !i_mat.is_square() || m == 0 {
            return Err(Error::DimensionMismatch(
                "I must be a nonempty square matrix".into(),
            ));
        }
        let sq = max_abs_r(&(&i_mat * &i_mat + RMat::identity(m, m)));
        let orth = max_abs_r(&(i_mat.transpose() * &i_mat - RMat::identity(m, m)));
        if sq > 1e-12 || orth > 1e-12 {
            return Err(Error::BadParams(
                "I must be an orthogonal complex structure".into(),
            ));
        }
        Ok(ResolventSpace {
            beta,
            lambda,
            i_mat,
        })
    }

    /// The standard complex structure on `ℝ^{2k}`.
    pub fn standard(beta: f64, lambda: f64, k: usize) -> Result<Self> {
        let mut i_mat = RMat::zeros(2 * k, 2 * k);
        for b in 0..k {
            i_mat[(2 * b, 2 * b + 1)] = -1.0;
            i_mat[(2 * b + 1, 2 * b)] = 1.0;
        }
        Self::new(beta, lambda, i_mat)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.i_mat.nrows()
    }

    pub fn complex_structure(&self) -> &RMat {
        &self.i_mat
    }

    /// `1/(λ² + (nπ/β)²)`.
    pub fn weight(&self, n: i64) -> f64 {
        let k = n as f64 * PI / self.beta;
        1.0 / (self.lambda * self.lambda + k * k)
    }

    /// `c₊ = tanh(βλ/2)·2λ/β` and `c₋ = 2λ/β`.
    pub fn c_plus(&self) -> f64 {
        (self.beta * self.lambda / 2.0).tanh() * 2.0 * self.lambda / self.beta
    }

    pub fn c_minus(&self) -> f64 {
        2.0 * self.lambda / self.beta
    }

    /// `f♯` for `|D| = λ·1`, built independently in the extension module.
    pub fn f_sharp(&self, g: RTauElement) -> Result<CMat> {
        let m = self.dim();
        let f = RPFunction::new(
            self.beta,
            self.i_mat.clone(),
            RMat::identity(m, m) * self.lambda,
            None,
        )?;
        Ok(f.f_sharp(g))
    }
}

/// `s = Σ_{|n| ≤ N} χ_n s_n` with `s_n ∈ ℂ^{2m}`; even modes live in the
/// first block and odd modes in the second.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSection {
    n_max: usize,
    m: usize,
    coeffs: Vec<CVec>,
}

impl FourierSection {
    pub fn zeros(m: usize, n_max: usize) -> Self {
        FourierSection {
            n_max,
            m,
            coeffs: vec![CVec::zeros(2 * m); 2 * n_max + 1],
        }
    }

    /// Validates the parity split of the coefficients.
    pub fn new(m: usize, n_max: usize, coeffs: Vec<CVec>) -> Result<Self> {
        if coeffs.len() != 2 * n_max + 1 || coeffs.iter().any(|v| v.len() != 2 * m) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients in ℂ^{}",
                2 * n_max + 1,
                2 * m
            )));
        }
        let s = FourierSection { n_max, m, coeffs };
        for n in s.modes() {
            let v = s.coeff(n);
            let wrong = if n.rem_euclid(2) == 0 {
                v.rows(m, m).norm()
            } else {
                v.rows(0, m).norm()
            };
            if wrong != 0.0 {
                return Err(Error::BadParams(format!(
                    "mode {n} has a component in the wrong parity block"
                )));
            }
        }
        Ok(s)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.n_max as i64;
        -n..=n
    }

    pub fn coeff(&self, n: i64) -> &CVec {
        &self.coeffs[(n + self.n_max as i64) as usize]
    }

    fn coeff_mut(&mut self, n: i64) -> &mut CVec {
        &mut self.coeffs[(n + self.n_max as i64) as usize]
    }

    /// Point value `s(t) = Σ χ_n(t) s_n`.
    pub fn eval(&self, beta: f64, t: f64) -> CVec {
        self.modes().fold(CVec::zeros(2 * self.m), |acc, n| {
            acc + self.coeff(n) * chi(beta, n, t)
        })
    }

    /// Coefficients stacked into one vector, mode by mode.
    pub fn flatten(&self) -> CVec {
        let len = 2 * self.m;
        CVec::from_fn(self.coeffs.len() * len, |i, _| {
            self.coeffs[i / len][i % len]
        })
    }
}

fn chi(beta: f64, n: i64, t: f64) -> num_complex::Complex64 {
    let a = PI * n as f64 * t / beta;
    c(a.cos(), a.sin())
}

fn check_compatible(space: &ResolventSpace, s: &FourierSection) -> Result<()> {
    if s.m != space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "section over ℂ^{} in a space over ℂ^{}",
            2 * s.m,
            2 * space.dim()
        )));
    }
    Ok(())
}

/// `Σ_n ⟨s₁ₙ, s₂ₙ⟩ / (λ² + (nπ/β)²)`.
pub fn inner_product(
    space: &ResolventSpace,
    s1: &FourierSection,
    s2: &FourierSection,
) -> Result<num_complex::Complex64> {
    check_compatible(space, s1)?;
    check_compatible(space, s2)?;
    if s1.n_max != s2.n_max {
        return Err(Error::DimensionMismatch(
            "sections truncated at different orders".into(),
        ));
    }
    Ok(s1
        .modes()
        .map(|n| s1.coeff(n).dotc(s2.coeff(n)) * space.weight(n))
        .sum())
}

/// The defining integral `(1/2β)∫₀^{2β} ⟨s₁(t), ((λ²−Δ)⁻¹s₂)(t)⟩ dt` by the
/// trapezoid rule on `points` nodes.
pub fn inner_product_quadrature(
    space: &ResolventSpace,
    s1: &FourierSection,
    s2: &FourierSection,
    points: usize,
) -> Result<num_complex::Complex64> {
    check_compatible(space, s1)?;
    check_compatible(space, s2)?;
    let mut resolved = s2.clone();
    for n in s2.modes() {
        *resolved.coeff_mut(n) = s2.coeff(n) * c(space.weight(n), 0.0);
    }
    let beta = space.beta;
    let h = 2.0 * beta / points as f64;
    let sum: num_complex::Complex64 = (0..points)
        .map(|k| {
            let t = k as f64 * h;
            s1.eval(beta, t).dotc(&resolved.eval(beta, t))
        })
        .sum();
    Ok(sum / points as f64)
}

/// `j(v₁, v₂) = √c₊ Σ χ_{2n}(v₁, 0) + √c₋ Σ χ_{2n+1}(0, v₂)`, truncated.
pub fn j_map(space: &ResolventSpace, v: &CVec, n_max: usize) -> Result<FourierSection> {
    let m = space.dim();
    if v.len() != 2 * m {
        return Err(Error::DimensionMismatch(format!(
            "v must lie in ℂ^{}",
            2 * m
        )));
    }
    let (sp, sm) = (space.c_plus().sqrt(), space.c_minus().sqrt());
    let mut s = FourierSection::zeros(m, n_max);
    for n in s.modes() {
        let target = s.coeff_mut(n);
        if n.rem_euclid(2) == 0 {
            target
                .rows_mut(0, m)
                .copy_from(&(v.rows(0, m) * c(sp, 0.0)));
        } else {
            target
                .rows_mut(m, m)
                .copy_from(&(v.rows(m, m) * c(sm, 0.0)));
        }
    }
    Ok(s)
}

/// `U_{(t,ε)} = U_t U_τ^ε` with `(U_t s)(x) = s(x + t)` and
/// `(U_τ s)(x) = (s₊(−x), iI s₋(−x))`.
pub fn group_action(
    space: &ResolventSpace,
    g: RTauElement,
    s: &FourierSection,
) -> Result<FourierSection> {
    check_compatible(space, s)?;
    let m = s.m;
    let ii = to_complex(&space.i_mat) * c(0.0, 1.0);
    let mut out = FourierSection::zeros(m, s.n_max);
    for n in s.modes() {
        let src = if g.eps { -n } else { n };
        let mut v = s.coeff(src).clone();
        if g.eps {
            let odd = &ii * v.rows(m, m);
            v.rows_mut(m, m).copy_from(&odd);
        }
        *out.coeff_mut(n) = v * chi(space.beta, n, g.t);
    }
    Ok(out)
}

/// `⟨j(v), U_g j(w)⟩_{H_λ}` at truncation `n_max`, its target
/// `⟨v, f♯(g) w⟩` and the a priori bound `8βλ/(π² N)·‖v‖‖w‖`.
#[derive(Clone, Debug)]
pub struct CoefficientCheck {
    pub truncated: num_complex::Complex64,
    pub exact: num_complex::Complex64,
    pub defect: f64,
    pub bound: f64,
}

impl CoefficientCheck {
    pub fn pass(&self) -> bool {
        self.defect <= self.bound
    }
}

pub fn tail_constant(space: &ResolventSpace) -> f64 {
    8.0 * space.beta * space.lambda / (PI * PI)
}

pub fn matrix_coefficient_check(
    space: &ResolventSpace,
    v: &CVec,
    w: &CVec,
    g: RTauElement,
    n_max: usize,
) -> Result<CoefficientCheck> {
    let jv = j_map(space, v, n_max)?;
    let jw = group_action(space, g, &j_map(space, w, n_max)?)?;
    let truncated = inner_product(space, &jv, &jw)?;
    let exact = v.dotc(&(space.f_sharp(g)? * w));
    let defect = (truncated - exact).norm();
    let bound = tail_constant(space) / n_max as f64 * v.norm() * w.norm();
    Ok(CoefficientCheck {
        truncated,
        exact,
        defect,
        bound,
    })
}

/// Least-squares slope of `log defect` against `log N` for the matrix
/// coefficient at the unit and `v = w = e₁`.
#[derive(Clone, Debug)]
pub struct ConvergenceFit {
    pub orders: Vec<usize>,
    pub defects: Vec<f64>,
    pub slope: f64,
}

pub fn convergence_slope(space: &ResolventSpace, orders: &[usize]) -> Result<ConvergenceFit> {
    let mut e1 = CVec::zeros(2 * space.dim());
    e1[0] = c(1.0, 0.0);
    let defects = orders
        .iter()
        .map(|&n| Ok(matrix_coefficient_check(space, &e1, &e1, RTauElement::unit(), n)?.defect))
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = orders.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(ConvergenceFit {
        orders: orders.to_vec(),
        defects,
        slope: sxy / sxx,
    })
}

/// Rank of the coefficient vectors of `U_g j(e_k)` over `|n| ≤ n_max`
/// against the dimension `(2n_max + 1)·m` allowed by the parity split.
pub fn cyclicity_rank(space: &ResolventSpace, n_max: usize) -> Result<(usize, usize)> {
    let m = space.dim();
    let count = 4 * n_max + 4;
    let sample: Vec<RTauElement> = (0..count)
        .flat_map(|k| {
            let t = 2.0 * space.beta * k as f64 / count as f64;
            [RTauElement::new(t, false), RTauElement::new(t, true)]
        })
        .collect();
    let mut cols = Vec::new();
    for k in 0..2 * m {
        let mut e = CVec::zeros(2 * m);
        e[k] = c(1.0, 0.0);
        let je = j_map(space, &e, n_max)?;
        for g in &sample {
            cols.push(group_action(space, *g, &je)?.flatten());
        }
    }
    let mat = CMat::from_columns(&cols);
    Ok((numerical_rank_c(&mat, 1e-10), (2 * n_max + 1) * m))
}

/// Green's identities for `u±_λ`: the coefficient form
/// `c_n(λ² + (nπ/β)²) = c_{parity(n)}` and the weak form
/// `⟨u±, (λ² − Δ)s⟩ = c± s(0)` on smooth test sections.
#[derive(Clone, Debug)]
pub struct GreensReport {
    pub coefficient_defect: f64,
    pub pairing_defect: f64,
    pub single_mode_defect: f64,
}

/// Test sections with closed-form second derivatives: a `β`-periodic and a
/// `β`-antiperiodic one.
fn test_section(beta: f64, odd: bool, t: f64) -> (f64, f64) {
    let a = 2.0 * PI / beta;
    let s = (a * t).cos().exp();
    let s1 = -a * (a * t).sin() * s;
    let s2 = a * a * ((a * t).sin().powi(2) - (a * t).cos()) * s;
    if !odd {
        return (s, s2);
    }
    let b = PI / beta;
    let (p, p1, p2) = ((b * t).cos(), -b * (b * t).sin(), -b * b * (b * t).cos());
    (p * s, p2 * s + 2.0 * p1 * s1 + p * s2)
}

/// `(1/2β)∫₀^{2β} u(t) h(t) dt` by composite Simpson on each interval
/// between kinks of `u` at multiples of `β`.
fn pair_with<F: Fn(f64) -> f64, H: Fn(f64) -> f64>(beta: f64, u: F, h: H, panels: usize) -> f64 {
    let mut total = 0.0;
    for piece in 0..2 {
        let (a, b) = (piece as f64 * beta, (piece + 1) as f64 * beta);
        let step = (b - a) / (2 * panels) as f64;
        // Evaluate just inside the interval so each side of a kink uses its
        // own branch.
        let at = |k: usize| {
            let t = a + k as f64 * step;
            let t_in = t.clamp(a + 1e-15 * beta, b - 1e-15 * beta);
            u(t_in) * h(t)
        };
        let mut acc = at(0) + at(2 * panels);
        for k in 1..2 * panels {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * at(k);
        }
        total += acc * step / 3.0;
    }
    total / (2.0 * beta)
}

pub fn greens_identity_check(space: &ResolventSpace, n_max: usize) -> GreensReport {
    let (beta, lambda) = (space.beta, space.lambda);
    let l2 = lambda * lambda;
    let mut coefficient_defect: f64 = 0.0;
    for n in -(n_max as i64)..=(n_max as i64) {
        let cn = crate::rpext::matsubara_scalar(lambda, beta, n);
        let target = if n.rem_euclid(2) == 0 {
            space.c_plus()
        } else {
            space.c_minus()
        };
        let lhs = cn / space.weight(n);
        coefficient_defect = coefficient_defect.max((lhs - target).abs() / target);
    }

    let panels = 2000;
    let mut pairing_defect: f64 = 0.0;
    for odd in [false, true] {
        let cpm = if odd { space.c_minus() } else { space.c_plus() };
        let u = |t: f64| {
            if odd {
                u_minus_scalar(lambda, beta, t)
            } else {
                u_plus_scalar(lambda, beta, t)
            }
        };
        let lhs = pair_with(
            beta,
            u,
            |t| {
                let (s, s2) = test_section(beta, odd, t);
                l2 * s - s2
            },
            panels,
        );
        let rhs = cpm * test_section(beta, odd, 0.0).0;
        pairing_defect = pairing_defect.max((lhs - rhs).abs());
    }

    let mut single_mode_defect: f64 = 0.0;
    for (k, odd) in [(2i64, false), (3, true)] {
        let cpm = if odd { space.c_minus() } else { space.c_plus() };
        let w = k as f64 * PI / beta;
        let u = |t: f64| {
            if odd {
                u_minus_scalar(lambda, beta, t)
            } else {
                u_plus_scalar(lambda, beta, t)
            }
        };
        let lhs = pair_with(beta, u, |t| (l2 + w * w) * (w * t).cos(), panels);
        single_mode_defect = single_mode_defect.max((lhs - cpm).abs());
    }
    GreensReport {
        coefficient_defect,
        pairing_defect,
        single_mode_defect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::max_abs_c;
    use crate::sampling::{rng, rtau_sample};
    use rand::Rng;

    fn space() -> ResolventSpace {
        ResolventSpace::standard(1.0, 1.0, 1).unwrap()
    }

    fn unit(m: usize, k: usize) -> CVec {
        let mut e = CVec::zeros(2 * m);
        e[k] = c(1.0, 0.0);
        e
    }

    fn random_section<R: Rng>(r: &mut R, m: usize, n_max: usize) -> FourierSection {
        let mut s = FourierSection::zeros(m, n_max);
        for n in -(n_max as i64)..=(n_max as i64) {
            let off = if n.rem_euclid(2) == 0 { 0 } else { m };
            for k in 0..m {
                s.coeff_mut(n)[off + k] = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            }
        }
        s
    }

    #[test]
    fn single_mode_norms() {
        let sp = space();
        let mut s = FourierSection::zeros(2, 3);
        s.coeff_mut(0)[0] = c(1.0, 0.0);
        assert!((inner_product(&sp, &s, &s).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let mut s = FourierSection::zeros(2, 3);
        s.coeff_mut(1)[2] = c(1.0, 0.0);
        let expect = 1.0 / (1.0 + PI * PI);
        assert!((inner_product(&sp, &s, &s).unwrap().re - expect).abs() < 1e-15);
        let mut bad = vec![CVec::zeros(4); 7];
        bad[3][2] = c(1.0, 0.0);
        assert!(FourierSection::new(2, 3, bad).is_err());
    }

    #[test]
    fn quadrature_matches_coefficients() {
        let sp = ResolventSpace::standard(0.7, 1.3, 1).unwrap();
        let mut r = rng(11);
        let s1 = random_section(&mut r, 2, 64);
        let s2 = random_section(&mut r, 2, 64);
        let a = inner_product(&sp, &s1, &s2).unwrap();
        let b = inner_product_quadrature(&sp, &s1, &s2, 4 * 64).unwrap();
        assert!((a - b).norm() < 1e-6);
    }

    #[test]
    fn j_map_constants() {
        let sp = space();
        assert!((sp.c_plus() - 0.924234).abs() < 1e-6);
        assert_eq!(sp.c_minus(), 2.0);
        let s = j_map(&sp, &unit(2, 0), 5).unwrap();
        for n in s.modes() {
            assert_eq!(s.coeff(n).rows(2, 2).norm(), 0.0);
        }
        let norm = inner_product(&sp, &s, &s).unwrap().re;
        let partial = crate::rpext::fourier_partial_sum(
            &RMat::identity(1, 1),
            1.0,
            5,
            0.0,
            crate::rpext::Parity::Even,
        );
        assert!((norm - partial[(0, 0)]).abs() < 1e-14);
    }

    #[test]
    fn group_action_examples() {
        let sp = space();
        let mut r = rng(3);
        let s = random_section(&mut r, 2, 6);
        assert_eq!(group_action(&sp, RTauElement::unit(), &s).unwrap(), s);

        let mut odd = FourierSection::zeros(2, 3);
        odd.coeff_mut(1)[2] = c(1.0, 0.0);
        let moved = group_action(&sp, RTauElement::new(1.0, false), &odd).unwrap();
        assert!((moved.coeff(1)[2] + c(1.0, 0.0)).norm() < 1e-15);

        let mut even = FourierSection::zeros(2, 3);
        even.coeff_mut(2)[0] = c(0.5, 0.25);
        let refl = group_action(&sp, RTauElement::tau(), &even).unwrap();
        assert_eq!(refl.coeff(-2)[0], c(0.5, 0.25));
        assert_eq!(refl.coeff(2).norm(), 0.0);
    }

    #[test]
    fn representation_is_unitary_homomorphism() {
        let sp = ResolventSpace::standard(1.0, 0.8, 2).unwrap();
        let mut r = rng(21);
        let s = random_section(&mut r, 4, 8);
        let norm = inner_product(&sp, &s, &s).unwrap();
        let sample = rtau_sample(&mut r, 1.0, 6);
        for g in &sample {
            let gs = group_action(&sp, *g, &s).unwrap();
            assert!((inner_product(&sp, &gs, &gs).unwrap() - norm).norm() < 1e-10);
            for h in &sample {
                let lhs = group_action(&sp, *g, &group_action(&sp, *h, &s).unwrap()).unwrap();
                let rhs = group_action(&sp, g.mul(h), &s).unwrap();
                assert!((lhs.flatten() - rhs.flatten()).norm() < 1e-10);
            }
        }
        let t = RTauElement::new(0.3, false);
        let tau = RTauElement::tau();
        let lhs = group_action(
            &sp,
            tau,
            &group_action(&sp, t, &group_action(&sp, tau, &s).unwrap()).unwrap(),
        )
        .unwrap();
        let rhs = group_action(&sp, RTauElement::new(-0.3, false), &s).unwrap();
        assert!((lhs.flatten() - rhs.flatten()).norm() < 1e-10);
    }

    #[test]
    fn matrix_coefficients_match_f_sharp() {
        let sp = space();
        let e = |k| unit(2, k);
        let c0 = matrix_coefficient_check(&sp, &e(0), &e(0), RTauElement::unit(), 2000).unwrap();
        assert!(c0.defect <= 1e-3 && c0.pass());
        let half =
            matrix_coefficient_check(&sp, &e(2), &e(2), RTauElement::new(0.5, true), 2000).unwrap();
        assert!(half.exact.norm() < 1e-15 && half.pass());
        let cross =
            matrix_coefficient_check(&sp, &e(0), &e(3), RTauElement::new(0.2, true), 50).unwrap();
        assert_eq!(cross.truncated.norm(), 0.0);
        assert_eq!(cross.exact.norm(), 0.0);
        let fs = sp.f_sharp(RTauElement::new(0.2, true)).unwrap();
        assert!(max_abs_c(&(fs.view((0, 2), (2, 2)).into_owned())) == 0.0);
    }

    #[test]
    fn slope_is_minus_one() {
        let fit = convergence_slope(&space(), &[250, 500, 1000, 2000]).unwrap();
        assert!(fit.slope < -0.5 && fit.slope > -2.0, "{fit:?}");
    }

    #[test]
    fn cyclic_at_truncation() {
        let (rank, full) = cyclicity_rank(&space(), 3).unwrap();
        assert_eq!(rank, full);
    }

    #[test]
    fn greens_identities() {
        for (beta, lambda) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)] {
            let sp = ResolventSpace::standard(beta, lambda, 1).unwrap();
            let r = greens_identity_check(&sp, 200);
            assert!(r.coefficient_defect < 1e-12, "{r:?}");
            assert!(r.pairing_defect < 1e-6, "{r:?}");
            assert!(r.single_mode_defect < 1e-6, "{r:?}");
        }
    }
}
