//! β-KMS positive definite functions `ψ: ℝ → Bil(V)` built from a strict
//! skew contraction on a standard subspace, evaluated on the closed strip
//! `0 ≤ Im z ≤ β`.
//!
//! The Hilbert space is realized as `ℂᵐ` with inner product
//! `⟨x, y⟩ = x*(1+iC)y`, in which `V = ℝᵐ` is standard with
//! `Δ = (1−iC)/(1+iC)`. With `L = −(1/β) log Δ` one has
//! `ψ(z) = Σ_k e^{izλ_k} M_k`, where `λ_k` runs over the spectrum of `L`.

use crate::error::{Error, Result};
use crate::matfun::{
    c, herm_eig, herm_fun, identity_c, max_abs_c, psd_check, to_complex, CMat, CVec,
    HermitianMatrix, PsdReport, RMat,
};
use crate::report::{Check, Report};
use crate::rpext::{u_minus_matrix, u_plus_matrix, RTauElement};
use crate::subspace::ContractionOnV;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub lambda: f64,
    pub weight: CMat,
}

/// A finitely supported `Bil(V)`-valued measure on ℝ.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFormMeasure {
    atoms: Vec<Atom>,
    dim: usize,
}

impl DiscreteFormMeasure {
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self> {
        let dim = atoms.first().map_or(0, |a| a.weight.nrows());
        for a in &atoms {
            if a.weight.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(
                    "atom weights differ in size".into(),
                ));
            }
            if !a.lambda.is_finite() {
                return Err(Error::BadParams("atom location must be finite".into()));
            }
        }
        atoms.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        Ok(DiscreteFormMeasure { atoms, dim })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_k e^{izλ_k} W_k`.
    pub fn eval(&self, z: Complex64) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for a in &self.atoms {
            let phase = (c(0.0, 1.0) * z * a.lambda).exp();
            out += &a.weight * phase;
        }
        out
    }

    /// Copy with the weight of atom `index` multiplied by `factor`.
    pub fn scaled_atom(&self, index: usize, factor: f64) -> Self {
        let mut atoms = self.atoms.clone();
        if let Some(a) = atoms.get_mut(index) {
            a.weight *= c(factor, 0.0);
        }
        DiscreteFormMeasure {
            atoms,
            dim: self.dim,
        }
    }

    fn partner(&self, lambda: f64) -> Option<&Atom> {
        let tol = 1e-9 * lambda.abs().max(1.0);
        self.atoms.iter().find(|a| (a.lambda + lambda).abs() <= tol)
    }

    /// `max_λ ‖W(−λ) − e^{−βλ} conj W(λ)‖`, an absent partner counting as
    /// zero weight.
    pub fn reflection_defect(&self, beta: f64) -> f64 {
        let zero = CMat::zeros(self.dim, self.dim);
        self.atoms
            .iter()
            .map(|a| {
                let p = self.partner(a.lambda).map_or(&zero, |p| &p.weight);
                let expected = a.weight.conjugate() * c((-beta * a.lambda).exp(), 0.0);
                max_abs_c(&(p - expected))
            })
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all atom weights.
    pub fn min_weight_eig(&self) -> (f64, f64) {
        self.atoms
            .iter()
            .map(|a| {
                let h = HermitianMatrix::hermitian_part(&a.weight);
                (a.lambda, psd_check(&h, 0.0).min_eig)
            })
            .fold(
                (0.0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            )
    }
}

/// A β-KMS function given by a strict contraction on the standard subspace
/// `V₁ = ℝ^{m₁}` and a real map `j: ℝᵐ → V₁`.
#[derive(Clone, Debug)]
pub struct KmsFunction {
    beta: f64,
    c_v: ContractionOnV,
    jmap: RMat,
    measure: DiscreteFormMeasure,
}

impl KmsFunction {
    pub fn new(beta: f64, c_v: ContractionOnV, jmap: Option<RMat>) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::BadParams(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let m1 = c_v.dim();
        let jmap = jmap.unwrap_or_else(|| RMat::identity(m1, m1));
        if jmap.nrows() != m1 {
            return Err(Error::DimensionMismatch(format!(
                "j maps into a space of dimension {}, contraction acts on {m1}",
                jmap.nrows()
            )));
        }
        let measure = build_measure(beta, &c_v, &jmap)?;
        Ok(KmsFunction {
            beta,
            c_v,
            jmap,
            measure,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Dimension of the domain `V` of the forms.
    pub fn dim(&self) -> usize {
        self.jmap.ncols()
    }

    pub fn contraction(&self) -> &ContractionOnV {
        &self.c_v
    }

    pub fn jmap(&self) -> &RMat {
        &self.jmap
    }

    /// `jᵀ X j`, the form on `V` induced by an operator on `V₁`.
    pub fn pull_back(&self, op: &CMat) -> CMat {
        let j = to_complex(&self.jmap);
        j.transpose() * op * j
    }

    /// `Δ = (1−iC)/(1+iC)` on the model space.
    pub fn delta(&self) -> HermitianMatrix {
        crate::matfun::herm_fun_real(&self.c_v.times_i(), |x| (1.0 - x) / (1.0 + x))
            .expect("strict contraction")
    }

    /// Gram matrix `1+iC` of the model inner product.
    pub fn model_metric(&self) -> CMat {
        identity_c(self.c_v.dim()) + self.c_v.times_i().matrix()
    }
}

fn build_measure(beta: f64, c_v: &ContractionOnV, jmap: &RMat) -> Result<DiscreteFormMeasure> {
    let eig = herm_eig(&c_v.times_i());
    let j = to_complex(jmap);
    let m = jmap.ncols();
    let mut atoms: Vec<Atom> = Vec::new();
    for k in 0..eig.values.len() {
        let x = eig.values[k];
        let lambda = 2.0 * x.atanh() / beta;
        let u = eig.vectors.column(k);
        let w: CVec = j.transpose() * u;
        let weight = &w * w.adjoint() * c(1.0 + x, 0.0);
        match atoms
            .iter_mut()
            .find(|a| (a.lambda - lambda).abs() <= 1e-9 * lambda.abs().max(1.0))
        {
            Some(a) => a.weight += weight,
            None => atoms.push(Atom { lambda, weight }),
        }
    }
    if atoms.is_empty() {
        atoms.push(Atom {
            lambda: 0.0,
            weight: CMat::zeros(m, m),
        });
    }
    DiscreteFormMeasure::new(atoms)
}

fn in_strip(z: Complex64, lo: f64, hi: f64) -> bool {
    let eps = 1e-12 * hi.abs().max(1.0);
    z.im >= lo - eps && z.im <= hi + eps
}

pub fn psi_eval(k: &KmsFunction, z: Complex64) -> Result<CMat> {
    if !in_strip(z, 0.0, k.beta) {
        return Err(Error::OutOfStrip {
            re: z.re,
            im: z.im,
            beta: k.beta,
        });
    }
    Ok(k.measure.eval(z))
}

/// `ψ(t) = jᵀ(1+iC)Δ^{−it/β}j` for real `t`, computed from `Δ` directly
/// rather than from the spectral measure.
pub fn psi_model(k: &KmsFunction, t: f64) -> CMat {
    let delta = k.delta();
    let u = herm_fun(&delta, |x| c(0.0, -t * x.ln() / k.beta).exp()).expect("Δ is positive");
    k.pull_back(&(k.model_metric() * u))
}

pub fn spectral_measure(k: &KmsFunction) -> &DiscreteFormMeasure {
    &k.measure
}

/// `max_t ‖μ-sum at iβ+t − conj(μ-sum at t)‖`.
pub fn boundary_defect(measure: &DiscreteFormMeasure, beta: f64, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&t| {
            let top = measure.eval(c(t, beta));
            let bottom = measure.eval(c(t, 0.0)).conjugate();
            max_abs_c(&(top - bottom))
        })
        .fold(0.0, f64::max)
}

pub fn kms_boundary_check(k: &KmsFunction, grid: &[f64]) -> f64 {
    boundary_defect(&k.measure, k.beta, grid)
}

fn check_time(k: &KmsFunction, t: f64) -> Result<()> {
    let eps = 1e-12 * k.beta;
    if !(t >= -eps && t <= k.beta + eps) {
        return Err(Error::BadParams(format!("t = {t} outside [0, {}]", k.beta)));
    }
    Ok(())
}

/// `(1+iC)^{1−t/β}(1−iC)^{t/β}` on `V₁`, through the spectra of `1±iC`.
pub fn phi_operator_form(k: &KmsFunction, t: f64) -> Result<CMat> {
    check_time(k, t)?;
    let s = (t / k.beta).clamp(0.0, 1.0);
    let n = k.c_v.dim();
    let ic = k.c_v.times_i().into_inner();
    let plus = HermitianMatrix::hermitian_part(&(identity_c(n) + &ic));
    let minus = HermitianMatrix::hermitian_part(&(identity_c(n) - &ic));
    let a = herm_fun(&plus, |x| c(x.powf(1.0 - s), 0.0))?;
    let b = herm_fun(&minus, |x| c(x.powf(s), 0.0))?;
    Ok(a * b)
}

/// The same operator as [`phi_operator_form`], assembled as
/// `u⁺_{|D|}(t) + iI u⁻_{|D|}(t)` from the polar decomposition `C = I|C|`
/// and `|D| = (1/β) log((1+|C|)/(1−|C|))`. On `ker C` both `I` and `|D|`
/// vanish.
pub fn phi_polar_form(k: &KmsFunction, t: f64) -> Result<CMat> {
    check_time(k, t)?;
    let p = crate::matfun::polar_skew_with_kernel(k.c_v.skew(), 1e-10);
    let beta = k.beta;
    let abs_d = crate::matfun::sym_fun(&p.abs, |x| ((1.0 + x) / (1.0 - x)).ln() / beta)?;
    let up = u_plus_matrix(&abs_d, beta, t);
    let um = u_minus_matrix(&abs_d, beta, t);
    let ii = to_complex(&p.complex_structure) * c(0.0, 1.0);
    Ok(to_complex(&up) + ii * to_complex(&um))
}

/// `φ(t) = ψ(it)` on `[0, β]`, extended by `φ(t+β) = conj φ(t)`.
pub fn phi_periodic_extend(k: &KmsFunction, t: f64) -> CMat {
    let beta = k.beta;
    let s = t.rem_euclid(2.0 * beta);
    if s < beta {
        k.pull_back(&phi_operator_form(k, s).expect("reduced time"))
    } else {
        k.pull_back(&phi_operator_form(k, s - beta).expect("reduced time"))
            .conjugate()
    }
}

/// Gram of `K(z,w) = ψ(z − w̄)` over points of the half strip
/// `0 ≤ Im z ≤ β/2`, blocks indexed by the basis of `V`.
pub fn strip_kernel_gram(k: &KmsFunction, points: &[Complex64]) -> Result<HermitianMatrix> {
    for &z in points {
        if !in_strip(z, 0.0, k.beta / 2.0) {
            return Err(Error::OutOfStrip {
                re: z.re,
                im: z.im,
                beta: k.beta / 2.0,
            });
        }
    }
    let m = k.dim();
    let n = points.len();
    let mut g = CMat::zeros(n * m, n * m);
    for (a, &za) in points.iter().enumerate() {
        for (b, &zb) in points.iter().enumerate() {
            let block = k.measure.eval(za - zb.conj());
            g.view_mut((a * m, b * m), (m, m)).copy_from(&block);
        }
    }
    HermitianMatrix::new(g)
}

pub fn strip_kernel_check(k: &KmsFunction, points: &[Complex64], tol: f64) -> Result<PsdReport> {
    Ok(psd_check(&strip_kernel_gram(k, points)?, tol))
}

/// `(J₁f)(z) = conj f(z̄ + iβ/2)`.
pub fn j1<F>(f: F, beta: f64) -> impl Fn(Complex64) -> CVec
where
    F: Fn(Complex64) -> CVec,
{
    move |z: Complex64| f(z.conj() + c(0.0, beta / 2.0)).conjugate()
}

/// The kernel section `K_{(w,η)}: z ↦ ψ(z − w̄)(·, e_η)`.
pub fn section(k: &KmsFunction, w: Complex64, eta: usize) -> impl Fn(Complex64) -> CVec + '_ {
    move |z: Complex64| k.measure.eval(z - w.conj()).column(eta).into_owned()
}

#[derive(Clone, Debug)]
pub struct J1Report {
    /// `max ‖J₁K_{(w,η)}(z) − K_{(w̄+iβ/2,η)}(z)‖`.
    pub section_defect: f64,
    /// `max ‖K_{(iβ/2,η)}(z) − ⟨κ(z,·), Δ^{1/2} jη⟩‖` against the model space.
    pub model_defect: f64,
    /// `max ‖Δ^{1/2}jη − J jη‖` with `J = conj ∘ Δ^{−1/2}` in the model.
    pub modular_defect: f64,
    /// `max ‖J₁J₁f(z) − f(z)‖`.
    pub involution_defect: f64,
}

impl J1Report {
    pub fn max_defect(&self) -> f64 {
        self.section_defect
            .max(self.model_defect)
            .max(self.modular_defect)
            .max(self.involution_defect)
    }
}

/// Checks the strip realization of the conjugation `J₁` on sections
/// `K_{(w,η)}` for `w` in `ws` and `η` over a basis of `V`, evaluated at the
/// points `zs` (all in the closed half strip).
pub fn strip_realization_j1(
    k: &KmsFunction,
    ws: &[Complex64],
    zs: &[Complex64],
) -> Result<J1Report> {
    let beta = k.beta;
    let half = beta / 2.0;
    for &p in ws.iter().chain(zs) {
        if !in_strip(p, 0.0, half) {
            return Err(Error::OutOfStrip {
                re: p.re,
                im: p.im,
                beta: half,
            });
        }
    }
    let m = k.dim();
    let mut section_defect: f64 = 0.0;
    let mut involution_defect: f64 = 0.0;
    for &w in ws {
        for eta in 0..m {
            let f = section(k, w, eta);
            let jf = j1(&f, beta);
            let jjf = j1(&jf, beta);
            let target = section(k, w.conj() + c(0.0, half), eta);
            for &z in zs {
                section_defect = section_defect.max((jf(z) - target(z)).norm());
                involution_defect = involution_defect.max((jjf(z) - f(z)).norm());
            }
        }
    }

    let delta = k.delta();
    let metric = k.model_metric();
    let j = to_complex(k.jmap());
    let half_power = herm_fun(&delta, |x| c(x.sqrt(), 0.0))?;
    let inv_half = herm_fun(&delta, |x| c(1.0 / x.sqrt(), 0.0))?;
    let mut model_defect: f64 = 0.0;
    let mut modular_defect: f64 = 0.0;
    for eta in 0..m {
        let jeta: CVec = j.column(eta).into_owned();
        let target = &half_power * &jeta;
        let via_j = (&inv_half * &jeta).conjugate();
        modular_defect = modular_defect.max((&target - via_j).norm());
        let f = section(k, c(0.0, half), eta);
        for &z in zs {
            let kappa = herm_fun(&delta, |x| (c(0.0, 1.0) * z.conj() * x.ln() / beta).exp())?;
            let feats = &kappa * &j;
            let model: CVec = feats.adjoint() * &metric * &target;
            model_defect = model_defect.max((f(z) - model).norm());
        }
    }
    Ok(J1Report {
        section_defect,
        model_defect,
        modular_defect,
        involution_defect,
    })
}

/// Invariant checks of a measure-defined function on the strip: Hermitian
/// symmetry, boundedness by the boundary values, reality on the middle
/// line, PSD translation Gram.
pub fn invariant_report(measure: &DiscreteFormMeasure, beta: f64, grid: &[f64]) -> Report {
    let mut r = Report::new();
    let m = measure.dim();
    let mut herm: f64 = 0.0;
    let mut bound: f64 = f64::NEG_INFINITY;
    let mut middle: f64 = 0.0;
    let p0 = measure.eval(c(0.0, 0.0));
    let pb = measure.eval(c(0.0, beta));
    for (idx, &t) in grid.iter().enumerate() {
        let y = beta * ((idx % 7) as f64) / 6.0;
        let z = c(t, y);
        let val = measure.eval(z);
        herm = herm.max(max_abs_c(&(measure.eval(-z.conj()) - val.adjoint())));
        for v in 0..m {
            let lhs = val[(v, v)].norm();
            let rhs = p0[(v, v)].re.max(pb[(v, v)].re);
            bound = bound.max(lhs - rhs);
        }
        let mid = measure.eval(c(t, beta / 2.0));
        middle = middle.max(mid.iter().fold(0.0f64, |a, z| a.max(z.im.abs())));
    }
    let scale = max_abs_c(&p0).max(1.0);
    r.push(Check::at_most("hermitian_symmetry", herm, 1e-10 * scale));
    r.push(Check::at_most("strip_bound", bound.max(0.0), 1e-10 * scale));
    r.push(Check::at_most("middle_line_real", middle, 1e-10 * scale));
    let pts: Vec<f64> = grid
        .iter()
        .step_by((grid.len() / 12).max(1))
        .copied()
        .collect();
    let n = pts.len();
    let mut g = CMat::zeros(n * m, n * m);
    for (a, &ta) in pts.iter().enumerate() {
        for (b, &tb) in pts.iter().enumerate() {
            g.view_mut((a * m, b * m), (m, m))
                .copy_from(&measure.eval(c(ta - tb, 0.0)));
        }
    }
    let psd = psd_check(&HermitianMatrix::hermitian_part(&g), 1e-10);
    r.push(Check::at_least(
        "translation_gram_psd",
        psd.min_eig,
        psd.threshold,
    ));
    r
}

/// Checks for a measure on `[0, ∞)`, i.e. the β = ∞ case: boundedness on
/// the upper half plane and positivity of `f(t,τ^ε) = ψ(i|t|)` on ℝ_τ.
pub fn kms_infinity(
    measure: &DiscreteFormMeasure,
    times: &[f64],
    upper: &[Complex64],
    group_sample: &[RTauElement],
) -> Result<Report> {
    for a in measure.atoms() {
        if a.lambda < 0.0 {
            return Err(Error::BadParams(format!(
                "atom at {} lies outside [0, ∞)",
                a.lambda
            )));
        }
        let h = HermitianMatrix::new(a.weight.clone())?;
        let min = psd_check(&h, 0.0).min_eig;
        if min < -1e-12 * h.matrix().norm().max(1.0) {
            return Err(Error::NegativeAtom {
                lambda: a.lambda,
                min_eig: min,
            });
        }
    }
    let m = measure.dim();
    let p0 = measure.eval(c(0.0, 0.0));
    let mut r = Report::new();
    let probes: Vec<CVec> = (0..m)
        .map(|k| CVec::from_fn(m, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) }))
        .chain(std::iter::once(CVec::from_fn(m, |i, _| {
            c(1.0 / (1.0 + i as f64), 0.3 * i as f64)
        })))
        .collect();
    let mut excess: f64 = f64::NEG_INFINITY;
    for &z in upper {
        if z.im < 0.0 {
            return Err(Error::OutOfStrip {
                re: z.re,
                im: z.im,
                beta: f64::INFINITY,
            });
        }
        let val = measure.eval(z);
        for v in &probes {
            let lhs = (v.adjoint() * &val * v)[(0, 0)].norm();
            let rhs = (v.adjoint() * &p0 * v)[(0, 0)].re;
            excess = excess.max(lhs - rhs);
        }
    }
    let scale = max_abs_c(&p0).max(1.0);
    r.push(Check::at_most(
        "upper_half_plane_bound",
        excess.max(0.0),
        1e-12 * scale,
    ));

    let f = |t: f64| measure.eval(c(0.0, t.abs()));
    let n = times.len();
    let mut g = CMat::zeros(n * m, n * m);
    for (a, &ta) in times.iter().enumerate() {
        for (b, &tb) in times.iter().enumerate() {
            g.view_mut((a * m, b * m), (m, m)).copy_from(&f(ta + tb));
        }
    }
    let psd = psd_check(&HermitianMatrix::new(g)?, 1e-10);
    r.push(Check::at_least(
        "reflection_gram_psd",
        psd.min_eig,
        psd.threshold,
    ));

    let n = group_sample.len();
    let mut g = CMat::zeros(n * m, n * m);
    for (a, ga) in group_sample.iter().enumerate() {
        for (b, gb) in group_sample.iter().enumerate() {
            let h = ga.mul(&gb.inverse());
            g.view_mut((a * m, b * m), (m, m)).copy_from(&f(h.t));
        }
    }
    let psd = psd_check(&HermitianMatrix::new(g)?, 1e-10);
    r.push(Check::at_least(
        "group_gram_psd",
        psd.min_eig,
        psd.threshold,
    ));
    Ok(r)
}

/// The FX1 fixture: `m = 2`, `C_V = tanh(1/2)·rot`, `β = 1`, `j = 1`.
pub fn fx1() -> KmsFunction {
    let s = 0.5f64.tanh();
    let cv = ContractionOnV::from_matrix(RMat::from_row_slice(2, 2, &[0.0, -s, s, 0.0]))
        .expect("strict");
    KmsFunction::new(1.0, cv, None).expect("valid fixture")
}
