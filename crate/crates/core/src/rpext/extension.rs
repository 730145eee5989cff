use crate::error::{Error, Result};
use crate::kms::{Atom, DiscreteFormMeasure, KmsFunction};
use crate::matfun::{
    c, max_abs_c, max_abs_r, polar_skew_with_kernel, psd_check, sym_eig, sym_fun, to_complex, CMat,
    HermitianMatrix, PsdReport, RMat, SkewSymmetricReal,
};
use crate::report::{Check, Report};
use crate::subspace::ContractionOnV;

use super::thermal::{u_minus_matrix, u_minus_scalar, u_plus_matrix, u_plus_scalar};
use super::RTauElement;

/// A `Bil(V)`-valued function on `ℝ_τ`, returned as the matrix of its
/// sesquilinear extension.
pub trait RTauFunction {
    fn dim(&self) -> usize;
    fn beta(&self) -> f64;
    fn eval(&self, g: RTauElement) -> CMat;
}

/// `f(t, τ^ε) = u⁺_{|D|}(t) + (iI)^ε u⁻_{|D|}(t)` pulled back along `j`.
///
/// On `ker |D|` the function is the constant identity, since `u⁺_0 ≡ 1`
/// and `u⁻_0 ≡ 0`.
#[derive(Clone, Debug)]
pub struct RPFunction {
    beta: f64,
    i_mat: RMat,
    abs_d: RMat,
    jmap: RMat,
}

impl RPFunction {
    pub fn new(beta: f64, i_mat: RMat, abs_d: RMat, jmap: Option<RMat>) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::BadParams(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let n = abs_d.nrows();
        if !abs_d.is_square() || i_mat.shape() != (n, n) {
            return Err(Error::DimensionMismatch(
                "I and |D| must be square of equal size".into(),
            ));
        }
        let jmap = jmap.unwrap_or_else(|| RMat::identity(n, n));
        if jmap.nrows() != n {
            return Err(Error::DimensionMismatch(
                "j has the wrong number of rows".into(),
            ));
        }
        let scale = max_abs_r(&abs_d).max(1.0);
        if max_abs_r(&(&abs_d - abs_d.transpose())) > 1e-12 * scale {
            return Err(Error::BadParams("|D| must be symmetric".into()));
        }
        let (vals, _) = sym_eig(&abs_d);
        if vals.iter().any(|&x| x < -1e-12 * scale) {
            return Err(Error::BadParams("|D| must be positive semidefinite".into()));
        }
        SkewSymmetricReal::new(i_mat.clone())?;
        let commute = max_abs_r(&(&i_mat * &abs_d - &abs_d * &i_mat));
        let square = max_abs_r(&(&i_mat * &i_mat * &abs_d + &abs_d));
        if commute > 1e-9 * scale || square > 1e-9 * scale {
            return Err(Error::BadParams(format!(
                "I must be a complex structure commuting with |D| on its range \
                 (defects {commute:.3e}, {square:.3e})"
            )));
        }
        Ok(RPFunction {
            beta,
            i_mat,
            abs_d,
            jmap,
        })
    }

    pub fn model_dim(&self) -> usize {
        self.abs_d.nrows()
    }

    pub fn complex_structure(&self) -> &RMat {
        &self.i_mat
    }

    pub fn abs_d(&self) -> &RMat {
        &self.abs_d
    }

    pub fn jmap(&self) -> &RMat {
        &self.jmap
    }

    fn i_times_i(&self) -> CMat {
        to_complex(&self.i_mat) * c(0.0, 1.0)
    }

    fn pull_back(&self, op: &CMat) -> CMat {
        let j = to_complex(&self.jmap);
        j.transpose() * op * j
    }

    /// The operator value on the model space, before pulling back along `j`.
    pub fn eval_operator(&self, g: RTauElement) -> CMat {
        let up = to_complex(&u_plus_matrix(&self.abs_d, self.beta, g.t));
        let um = to_complex(&u_minus_matrix(&self.abs_d, self.beta, g.t));
        if g.eps {
            up + self.i_times_i() * um
        } else {
            up + um
        }
    }

    /// `f♯(t, τ^ε) = diag(u⁺(t), u⁻(t)(iI)^ε)` on the model space squared.
    pub fn f_sharp(&self, g: RTauElement) -> CMat {
        let n = self.model_dim();
        let up = to_complex(&u_plus_matrix(&self.abs_d, self.beta, g.t));
        let mut um = to_complex(&u_minus_matrix(&self.abs_d, self.beta, g.t));
        if g.eps {
            um *= self.i_times_i();
        }
        let mut out = CMat::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&up);
        out.view_mut((n, n), (n, n)).copy_from(&um);
        out
    }

    /// `ρ(kβ, ε) = diag(1, (−1)^k) · diag(1, iI)^ε`; only defined on the
    /// subgroup generated by `(β, 0)` and `τ`.
    pub fn rho(&self, h: RTauElement) -> Result<CMat> {
        let n = self.model_dim();
        let k = h.t / self.beta;
        if (k - k.round()).abs() > 1e-12 {
            return Err(Error::BadParams(format!(
                "ρ is defined on multiples of β, got t = {}",
                h.t
            )));
        }
        let sign = if (k.round() as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        let lower = if h.eps {
            self.i_times_i() * c(sign, 0.0)
        } else {
            CMat::identity(n, n) * c(sign, 0.0)
        };
        let mut out = CMat::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n))
            .copy_from(&CMat::identity(n, n));
        out.view_mut((n, n), (n, n)).copy_from(&lower);
        Ok(out)
    }

    /// `C = I · tanh(β|D|/2)`.
    pub fn contraction(&self) -> Result<SkewSymmetricReal> {
        let beta = self.beta;
        let abs_c = sym_fun(&self.abs_d, |x| (beta * x / 2.0).tanh())?;
        let cm = &self.i_mat * abs_c;
        SkewSymmetricReal::new((&cm - cm.transpose()).scale(0.5))
    }

    pub fn odd_part(&self) -> OddPart<'_> {
        OddPart(self)
    }
}

impl RTauFunction for RPFunction {
    fn dim(&self) -> usize {
        self.jmap.ncols()
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn eval(&self, g: RTauElement) -> CMat {
        self.pull_back(&self.eval_operator(g))
    }
}

/// `f̃₂(t, τ^ε) = (iI)^ε u⁻(t)`, the odd component on its own.
pub struct OddPart<'a>(&'a RPFunction);

impl RTauFunction for OddPart<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn eval(&self, g: RTauElement) -> CMat {
        let f = self.0;
        let um = to_complex(&u_minus_matrix(&f.abs_d, f.beta, g.t));
        let op = if g.eps { f.i_times_i() * um } else { um };
        f.pull_back(&op)
    }
}

/// The extension of a KMS function: `|D| = (1/β) log((1+|C|)/(1−|C|))`
/// with `C_V = I|C|`.
pub fn build_extension(k: &KmsFunction) -> Result<RPFunction> {
    let beta = k.beta();
    let p = polar_skew_with_kernel(k.contraction().skew(), 1e-10);
    let abs_d = sym_fun(&p.abs, |x| ((1.0 + x) / (1.0 - x)).ln() / beta)?;
    RPFunction::new(beta, p.complex_structure, abs_d, Some(k.jmap().clone()))
}

/// Gram matrix with blocks `f(g_a g_b⁻¹)`.
pub fn rtau_gram<F: RTauFunction + ?Sized>(
    f: &F,
    sample: &[RTauElement],
) -> Result<HermitianMatrix> {
    let m = f.dim();
    let n = sample.len();
    let mut g = CMat::zeros(n * m, n * m);
    for (a, ga) in sample.iter().enumerate() {
        for (b, gb) in sample.iter().enumerate() {
            let v = f.eval(ga.mul(&gb.inverse()));
            g.view_mut((a * m, b * m), (m, m)).copy_from(&v);
        }
    }
    HermitianMatrix::new(g)
}

/// The 2×2 block kernel `[[f(s−t,1), f(s+t,τ)], [f(s+t,τ), f(s−t,1)]]` over
/// translation parts `s, t`.
pub fn lemma_block_gram<F: RTauFunction + ?Sized>(f: &F, times: &[f64]) -> Result<HermitianMatrix> {
    let m = f.dim();
    let n = times.len();
    let mut g = CMat::zeros(2 * n * m, 2 * n * m);
    for (a, &s) in times.iter().enumerate() {
        for (b, &t) in times.iter().enumerate() {
            let diag = f.eval(RTauElement::new(s - t, false));
            let off = f.eval(RTauElement::new(s + t, true));
            let (ra, rb) = (2 * a * m, 2 * b * m);
            g.view_mut((ra, rb), (m, m)).copy_from(&diag);
            g.view_mut((ra + m, rb + m), (m, m)).copy_from(&diag);
            g.view_mut((ra, rb + m), (m, m)).copy_from(&off);
            g.view_mut((ra + m, rb), (m, m)).copy_from(&off);
        }
    }
    HermitianMatrix::new(g)
}

#[derive(Clone, Debug)]
pub struct PdGroupReport {
    pub gram: PsdReport,
    pub block: PsdReport,
}

impl PdGroupReport {
    pub fn agree(&self) -> bool {
        self.gram.is_psd == self.block.is_psd
    }
}

pub fn check_positive_definite_group<F: RTauFunction + ?Sized>(
    f: &F,
    sample: &[RTauElement],
    tol: f64,
) -> Result<PdGroupReport> {
    let gram = psd_check(&rtau_gram(f, sample)?, tol);
    let mut times: Vec<f64> = sample.iter().map(|g| g.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let block = psd_check(&lemma_block_gram(f, &times)?, tol);
    Ok(PdGroupReport { gram, block })
}

/// PSD test of the kernel `f(s + t, τ)` over `s, t` in a grid inside
/// `[0, β/2]`.
pub fn check_reflection_positive<F: RTauFunction + ?Sized>(
    f: &F,
    grid: &[f64],
    tol: f64,
) -> Result<PsdReport> {
    let half = f.beta() / 2.0;
    if grid.is_empty() {
        return Err(Error::BadGrid("empty grid".into()));
    }
    if let Some(&t) = grid
        .iter()
        .find(|&&t| !(-1e-14..=half + 1e-14).contains(&t))
    {
        return Err(Error::BadGrid(format!("{t} lies outside [0, {half}]")));
    }
    let m = f.dim();
    let n = grid.len();
    let mut g = CMat::zeros(n * m, n * m);
    for (a, &s) in grid.iter().enumerate() {
        for (b, &t) in grid.iter().enumerate() {
            g.view_mut((a * m, b * m), (m, m))
                .copy_from(&f.eval(RTauElement::new(s + t, true)));
        }
    }
    Ok(psd_check(&HermitianMatrix::new(g)?, tol))
}

/// Covariance `f♯(hg) = ρ(h)f♯(g)` for `h ∈ {(β,1), (0,τ)}`, exact block
/// structure and positive definiteness of `f♯` on the sample.
pub fn f_sharp_report(f: &RPFunction, sample: &[RTauElement]) -> Result<Report> {
    let n = f.model_dim();
    let mut cov: f64 = 0.0;
    let mut off: f64 = 0.0;
    for h in [RTauElement::new(f.beta, false), RTauElement::tau()] {
        let rho = f.rho(h)?;
        for g in sample {
            let lhs = f.f_sharp(h.mul(g));
            let rhs = &rho * f.f_sharp(*g);
            cov = cov.max(max_abs_c(&(lhs - rhs)));
        }
    }
    for g in sample {
        let fs = f.f_sharp(*g);
        off = off
            .max(max_abs_c(&fs.view((0, n), (n, n)).into_owned()))
            .max(max_abs_c(&fs.view((n, 0), (n, n)).into_owned()));
    }
    let m = 2 * n;
    let k = sample.len();
    let mut gram = CMat::zeros(k * m, k * m);
    for (a, ga) in sample.iter().enumerate() {
        for (b, gb) in sample.iter().enumerate() {
            gram.view_mut((a * m, b * m), (m, m))
                .copy_from(&f.f_sharp(ga.mul(&gb.inverse())));
        }
    }
    let psd = psd_check(&HermitianMatrix::new(gram)?, 1e-8);
    let mut r = Report::new();
    r.push(Check::at_most("fsharp_covariance", cov, 1e-10));
    r.push(Check::at_most("fsharp_block_diagonal", off, 0.0));
    r.push(Check::at_least(
        "fsharp_gram_psd",
        psd.min_eig,
        psd.threshold,
    ));
    Ok(r)
}

/// Atoms `(λ_j, P_j)` of `|D|` and the defect of
/// `Σ_j (u⁺_{λ_j}(t) + (iI)^ε u⁻_{λ_j}(t)) P_j` against `f`.
#[derive(Clone, Debug)]
pub struct IntegralRepresentation {
    pub atoms: Vec<(f64, RMat)>,
    pub reconstruction_defect: f64,
    pub commutation_defect: f64,
}

fn spectral_atoms(abs_d: &RMat) -> Vec<(f64, RMat)> {
    let (vals, vecs) = sym_eig(abs_d);
    let scale = vals.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let mut atoms: Vec<(f64, RMat)> = Vec::new();
    for k in 0..vals.len() {
        let v = vecs.column(k);
        let p = v * v.transpose();
        let lambda = vals[k].max(0.0);
        match atoms.last_mut() {
            Some((l, acc)) if (lambda - *l).abs() <= 1e-9 * scale => *acc += p,
            _ => atoms.push((lambda, p)),
        }
    }
    atoms
}

pub fn integral_representation(f: &RPFunction, sample: &[RTauElement]) -> IntegralRepresentation {
    let atoms = spectral_atoms(&f.abs_d);
    let ii = f.i_times_i();
    let mut defect: f64 = 0.0;
    for g in sample {
        let mut acc = CMat::zeros(f.model_dim(), f.model_dim());
        for (lambda, p) in &atoms {
            let pc = to_complex(p);
            let up = u_plus_scalar(*lambda, f.beta, g.t);
            let um = u_minus_scalar(*lambda, f.beta, g.t);
            let odd = if g.eps { &ii * &pc } else { pc.clone() };
            acc += pc * c(up, 0.0) + odd * c(um, 0.0);
        }
        defect = defect.max(max_abs_c(&(acc - f.eval_operator(*g))));
    }
    let commutation_defect = atoms
        .iter()
        .map(|(_, p)| max_abs_r(&(&f.i_mat * p - p * &f.i_mat)))
        .fold(0.0, f64::max);
    IntegralRepresentation {
        atoms,
        reconstruction_defect: defect,
        commutation_defect,
    }
}

/// A KMS function recovered from an extension together with the fitted
/// spectral measure (on `V`) and the least-squares residual of the fit.
#[derive(Clone, Debug)]
pub struct Recovered {
    pub kms: KmsFunction,
    pub measure: DiscreteFormMeasure,
    pub residual: f64,
}

fn fit_weights(times: &[f64], values: &[CMat], lambdas: &[f64]) -> Result<(Vec<CMat>, f64)> {
    let s = times.len();
    let e = lambdas.len();
    let m = values[0].nrows();
    let a = RMat::from_fn(s, e, |i, k| (-lambdas[k] * times[i]).exp());
    let re = RMat::from_fn(s, m * m, |i, q| values[i][(q / m, q % m)].re);
    let im = RMat::from_fn(s, m * m, |i, q| values[i][(q / m, q % m)].im);
    let svd = a.clone().svd(true, true);
    let xr = svd
        .solve(&re, 1e-14)
        .map_err(|e| Error::IllPosed(e.to_string()))?;
    let xi = svd
        .solve(&im, 1e-14)
        .map_err(|e| Error::IllPosed(e.to_string()))?;
    let residual = max_abs_r(&(&a * &xr - &re)).max(max_abs_r(&(&a * &xi - &im)));
    let weights = (0..e)
        .map(|k| CMat::from_fn(m, m, |i, j| c(xr[(k, i * m + j)], xi[(k, i * m + j)])))
        .collect();
    Ok((weights, residual))
}

fn measure_from_fit(lambdas: &[f64], weights: Vec<CMat>) -> Result<DiscreteFormMeasure> {
    DiscreteFormMeasure::new(
        lambdas
            .iter()
            .zip(weights)
            .map(|(&lambda, weight)| Atom { lambda, weight })
            .collect(),
    )
}

fn phi_samples(f: &RPFunction, count: usize) -> (Vec<f64>, Vec<CMat>) {
    let times: Vec<f64> = (0..count)
        .map(|k| f.beta * k as f64 / (count - 1) as f64)
        .collect();
    let values = times
        .iter()
        .map(|&t| f.eval(RTauElement::new(t, true)))
        .collect();
    (times, values)
}

/// Recovers `ψ` from samples of `φ(t) = f(t, τ)` on `[0, β]`, fitting
/// exponentials at the atoms `±λ_j` of `|D|`.
pub fn recover_psi(f: &RPFunction) -> Result<Recovered> {
    let mut lambdas: Vec<f64> = Vec::new();
    for (l, _) in spectral_atoms(&f.abs_d) {
        lambdas.push(l);
        if l > 0.0 {
            lambdas.push(-l);
        }
    }
    lambdas.sort_by(f64::total_cmp);
    let (times, values) = phi_samples(f, 4 * lambdas.len() + 16);
    let (weights, residual) = fit_weights(&times, &values, &lambdas)?;
    if residual > 1e-6 {
        return Err(Error::IllPosed(format!("fit residual {residual:.3e}")));
    }
    let measure = measure_from_fit(&lambdas, weights)?;
    let cv = ContractionOnV::new(f.contraction()?)?;
    let kms = KmsFunction::new(f.beta, cv, Some(f.jmap.clone()))?;
    Ok(Recovered {
        kms,
        measure,
        residual,
    })
}

/// Recovers a finite measure from equally spaced samples `φ(t_k)` without
/// prior knowledge of its support, by Prony's method on the trace. At most
/// `max_atoms` exponentials are admitted.
pub fn recover_psi_blind(
    times: &[f64],
    values: &[CMat],
    max_atoms: usize,
) -> Result<DiscreteFormMeasure> {
    let k = times.len();
    if k < 4 || values.len() != k {
        return Err(Error::IllPosed("need at least four samples".into()));
    }
    let h = times[1] - times[0];
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-12 * h.abs().max(1.0))
    {
        return Err(Error::IllPosed("samples must be equally spaced".into()));
    }
    let s: Vec<f64> = values.iter().map(|v| v.trace().re).collect();
    let l = k / 2;
    let hankel = RMat::from_fn(k - l, l, |i, j| s[i + j]);
    let p = crate::matfun::numerical_rank(&hankel, 1e-10);
    if p == 0 || p > max_atoms {
        return Err(Error::IllPosed(format!(
            "model order {p} exceeds {max_atoms}"
        )));
    }
    let rows = k - p;
    let m = RMat::from_fn(rows, p, |i, j| s[i + j]);
    let rhs = RMat::from_fn(rows, 1, |i, _| -s[i + p]);
    let coef = m
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::IllPosed(e.to_string()))?;
    let mut companion = RMat::zeros(p, p);
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..p {
        companion[(i, p - 1)] = -coef[(i, 0)];
    }
    let roots = companion.complex_eigenvalues();
    let mut lambdas = Vec::with_capacity(p);
    for r in roots.iter() {
        if r.re <= 0.0 || r.im.abs() > 1e-6 * r.norm() {
            return Err(Error::IllPosed(format!(
                "root {r} is not a decaying real exponential"
            )));
        }
        lambdas.push(-r.re.ln() / h);
    }
    lambdas.sort_by(f64::total_cmp);
    let (weights, residual) = fit_weights(times, values, &lambdas)?;
    if residual > 1e-6 {
        return Err(Error::IllPosed(format!("fit residual {residual:.3e}")));
    }
    measure_from_fit(&lambdas, weights)
}
