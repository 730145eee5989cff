//! Form-valued positive definite functions on finite groups: the GNS
//! construction, reflection positivity on `G ⋊ {1, τ}`, kernel calculus and
//! complex extensions of real functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{
    c, herm_eig, max_abs_c, max_abs_r, null_space, numerical_rank_c, op_norm_c, op_norm_r,
    psd_check, real_part, sym_eig, to_complex, CMat, HermitianMatrix, PsdReport, RMat,
    SkewSymmetricReal, STRICT_MARGIN,
};
use crate::rpext::{os_quantize, OsQuotient, ReflectionPositiveSpace};
use crate::subspace::{check_standard, form_to_contraction, StandardSubspaceE};

/// A finite group given by its multiplication table, `table[a][b] = ab`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupTable", into = "GroupTable")]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    unit: usize,
}

#[derive(Serialize, Deserialize)]
struct GroupTable {
    table: Vec<Vec<usize>>,
}

impl TryFrom<GroupTable> for FiniteGroup {
    type Error = Error;

    fn try_from(t: GroupTable) -> Result<Self> {
        FiniteGroup::new(t.table)
    }
}

impl From<FiniteGroup> for GroupTable {
    fn from(g: FiniteGroup) -> Self {
        GroupTable { table: g.table }
    }
}

impl FiniteGroup {
    /// Validates closure, associativity, unit and inverses exhaustively.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if table
            .iter()
            .any(|row| row.len() != n || row.iter().any(|&x| x >= n))
        {
            return Err(Error::InvalidGroup(
                "table is not a closed n×n table".into(),
            ));
        }
        let unit = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidGroup("no unit element".into()))?;
        let mut inverse = vec![0; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == unit && table[b][a] == unit)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for x in 0..n {
                    if table[table[a][b]][x] != table[a][table[b][x]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a}, {b}, {x})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            table,
            inverse,
            unit,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        Self::new(table).expect("cyclic table is a group")
    }

    /// `{1, σ, τ, στ}` with elements indexed by the bit pattern `(σ, τ)`.
    pub fn klein4() -> Self {
        let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self::new(table).expect("Klein table is a group")
    }

    pub fn direct(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order(), h.order());
        let table = (0..n * m)
            .map(|a| {
                (0..n * m)
                    .map(|b| g.mul(a / m, b / m) * m + h.mul(a % m, b % m))
                    .collect()
            })
            .collect();
        Self::new(table).expect("direct product is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// Checks that `aut` is an involutive automorphism.
    pub fn check_involution(&self, aut: &[usize]) -> Result<()> {
        let n = self.order();
        if aut.len() != n || aut.iter().any(|&x| x >= n) {
            return Err(Error::InvalidGroup(
                "automorphism has the wrong size".into(),
            ));
        }
        for a in 0..n {
            if aut[aut[a]] != a {
                return Err(Error::InvalidGroup(format!("τ² moves element {a}")));
            }
            for b in 0..n {
                if aut[self.mul(a, b)] != self.mul(aut[a], aut[b]) {
                    return Err(Error::InvalidGroup(format!(
                        "τ is not multiplicative at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `G_τ = G ⋊ {1, τ}` with `(g, ε)` stored at index `g + ε·|G|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauGroup {
    base: FiniteGroup,
    aut: Vec<usize>,
    group: FiniteGroup,
}

impl TauGroup {
    pub fn new(base: FiniteGroup, aut: Vec<usize>) -> Result<Self> {
        base.check_involution(&aut)?;
        let n = base.order();
        let table = (0..2 * n)
            .map(|a| {
                (0..2 * n)
                    .map(|b| {
                        let (g, e) = (a % n, a / n);
                        let (h, d) = (b % n, b / n);
                        let th = if e == 1 { aut[h] } else { h };
                        base.mul(g, th) + ((e + d) % 2) * n
                    })
                    .collect()
            })
            .collect();
        let group = FiniteGroup::new(table)?;
        Ok(TauGroup { base, aut, group })
    }

    /// `G × {1, τ}` for the identity automorphism.
    pub fn trivial_action(base: FiniteGroup) -> Self {
        let aut = (0..base.order()).collect();
        Self::new(base, aut).expect("identity is an automorphism")
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn base(&self) -> &FiniteGroup {
        &self.base
    }

    pub fn aut(&self) -> &[usize] {
        &self.aut
    }

    pub fn tau(&self) -> usize {
        self.base.unit() + self.base.order()
    }

    pub fn element(&self, g: usize, eps: bool) -> usize {
        g + if eps { self.base.order() } else { 0 }
    }
}

/// A `Bil(V)`-valued function on a finite group; `values[g][(k, l)]` is
/// `φ(g)(e_k, e_l)` extended sesquilinearly.
#[derive(Clone, Debug)]
pub struct FormPDFunction {
    group: FiniteGroup,
    values: Vec<CMat>,
}

impl FormPDFunction {
    pub fn new(group: FiniteGroup, values: Vec<CMat>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        let m = values[0].nrows();
        if values.iter().any(|v| v.shape() != (m, m)) {
            return Err(Error::DimensionMismatch("values must be m×m".into()));
        }
        Ok(FormPDFunction { group, values })
    }

    pub fn from_real(group: FiniteGroup, values: &[RMat]) -> Result<Self> {
        Self::new(group, values.iter().map(to_complex).collect())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn value(&self, g: usize) -> &CMat {
        &self.values[g]
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|z| z.im == 0.0))
    }

    /// `K((x,k),(y,l)) = φ(xy⁻¹)(e_k, e_l)`, indexed by `x·m + k`.
    pub fn gram_matrix(&self) -> CMat {
        let n = self.group.order();
        let m = self.dim();
        let mut g = CMat::zeros(n * m, n * m);
        for x in 0..n {
            for y in 0..n {
                let v = &self.values[self.group.mul(x, self.group.inv(y))];
                g.view_mut((x * m, y * m), (m, m)).copy_from(v);
            }
        }
        g
    }

    pub fn gram(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.gram_matrix())
    }

    pub fn positivity(&self, tol: f64) -> Result<PsdReport> {
        Ok(psd_check(&self.gram()?, tol))
    }
}

/// Rank-revealing factor `F` (r×N) with `FᴴF = G`, and the right inverse
/// `F⁺` (N×r).
fn factor(g: &HermitianMatrix) -> (CMat, CMat) {
    let eig = herm_eig(g);
    let top = eig.values.iter().fold(0.0f64, |a, x| a.max(*x));
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&k| top > 0.0 && eig.values[k] > 1e-10 * top)
        .collect();
    let n = g.dim();
    let r = keep.len();
    let mut f = CMat::zeros(r, n);
    let mut f_pinv = CMat::zeros(n, r);
    for (i, &k) in keep.iter().enumerate() {
        let s = eig.values[k].sqrt();
        for col in 0..n {
            let w = eig.vectors[(col, k)];
            f[(i, col)] = w.conj() * s;
            f_pinv[(col, i)] = w / s;
        }
    }
    (f, f_pinv)
}

/// Columns `F[:, (x g⁻¹, k)]`, i.e. the generators moved by `U_g`.
fn permuted(group: &FiniteGroup, m: usize, f: &CMat, g: usize) -> CMat {
    let n = group.order();
    let mut out = CMat::zeros(f.nrows(), n * m);
    for x in 0..n {
        let y = group.mul(x, group.inv(g));
        for k in 0..m {
            out.set_column(x * m + k, &f.column(y * m + k));
        }
    }
    out
}

/// GNS data: `φ(g)(v, w) = ⟨j(v), U_g j(w)⟩` on `ℂ^dim`.
#[derive(Clone, Debug)]
pub struct Gns {
    pub dim: usize,
    pub rep: Vec<CMat>,
    pub j: CMat,
    /// Generators `U_{x⁻¹} j(e_k)` as columns, indexed by `x·m + k`.
    pub features: CMat,
    pub reconstruction_defect: f64,
    pub unitarity_defect: f64,
    pub homomorphism_defect: f64,
    pub cyclic_rank: usize,
}

impl Gns {
    pub fn max_defect(&self) -> f64 {
        self.reconstruction_defect
            .max(self.unitarity_defect)
            .max(self.homomorphism_defect)
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic_rank == self.dim
    }
}

pub fn gns_build(phi: &FormPDFunction) -> Result<Gns> {
    let gram = phi.gram()?;
    let psd = psd_check(&gram, 1e-10);
    if !psd.is_psd {
        return Err(Error::NotPositiveDefinite(format!(
            "Gram has eigenvalue {:.3e}",
            psd.min_eig
        )));
    }
    let group = phi.group();
    let (n, m) = (group.order(), phi.dim());
    let (f, f_pinv) = factor(&gram);
    let r = f.nrows();
    let rep: Vec<CMat> = (0..n)
        .map(|g| permuted(group, m, &f, g) * &f_pinv)
        .collect();
    let e = group.unit();
    let j = f.columns(e * m, m).into_owned();
    let scale = max_abs_c(gram.matrix()).max(1.0);

    let mut reconstruction: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    let mut homomorphism: f64 = 0.0;
    for g in 0..n {
        let u = &rep[g];
        reconstruction = reconstruction.max(max_abs_c(&(j.adjoint() * u * &j - phi.value(g))));
        unitarity = unitarity.max(max_abs_c(&(u.adjoint() * u - CMat::identity(r, r))));
        for h in 0..n {
            homomorphism = homomorphism.max(max_abs_c(&(u * &rep[h] - &rep[group.mul(g, h)])));
        }
    }
    let mut orbit = CMat::zeros(r, n * m);
    for (g, u) in rep.iter().enumerate() {
        orbit.columns_mut(g * m, m).copy_from(&(u * &j));
    }
    let cyclic_rank = numerical_rank_c(&orbit, 1e-10);
    Ok(Gns {
        dim: r,
        rep,
        j,
        features: f,
        reconstruction_defect: reconstruction / scale,
        unitarity_defect: unitarity,
        homomorphism_defect: homomorphism,
        cyclic_rank,
    })
}

/// Positivity (RP1), the `θ`-twisted kernel `φ(sτt⁻¹)` on `G₊` (RP2), and
/// the OS quotient of `(E, E₊, U_τ)` when RP2 holds.
#[derive(Clone, Debug)]
pub struct RpGroupReport {
    pub rp1: PsdReport,
    pub rp2: PsdReport,
    pub quotient: Option<OsQuotient>,
}

impl RpGroupReport {
    pub fn is_reflection_positive(&self) -> bool {
        self.rp1.is_psd && self.rp2.is_psd
    }

    /// The direct RP2 kernel and the OS route reach the same verdict.
    pub fn routes_agree(&self) -> bool {
        !self.rp1.is_psd || self.rp2.is_psd == self.quotient.is_some()
    }
}

pub fn reflection_positive_check(
    tg: &TauGroup,
    phi: &FormPDFunction,
    g_plus: &[usize],
    tol: f64,
) -> Result<RpGroupReport> {
    let group = tg.group();
    if phi.group() != group {
        return Err(Error::InvalidGroup("φ is not defined on G_τ".into()));
    }
    if let Some(&s) = g_plus.iter().find(|&&s| s >= tg.base().order()) {
        return Err(Error::InvalidGroup(format!("{s} is not an element of G")));
    }
    let m = phi.dim();
    let tau = tg.tau();
    let gram = phi.gram()?;
    let rp1 = psd_check(&gram, tol);

    let p = g_plus.len();
    let mut twisted = CMat::zeros(p * m, p * m);
    for (a, &s) in g_plus.iter().enumerate() {
        for (b, &t) in g_plus.iter().enumerate() {
            let g = group.mul(group.mul(s, tau), group.inv(t));
            twisted
                .view_mut((a * m, b * m), (m, m))
                .copy_from(phi.value(g));
        }
    }
    let rp2 = psd_check(&HermitianMatrix::new(twisted)?, tol);

    let quotient = if rp1.is_psd {
        let n = group.order();
        let mut theta = CMat::zeros(n * m, n * m);
        for x in 0..n {
            let y = group.mul(x, tau);
            for k in 0..m {
                theta[(y * m + k, x * m + k)] = c(1.0, 0.0);
            }
        }
        let plus = g_plus
            .iter()
            .flat_map(|&s| (0..m).map(move |k| s * m + k))
            .collect();
        let space = ReflectionPositiveSpace::new(gram, theta, plus)?;
        match os_quantize(&space) {
            Ok(q) => Some(q),
            Err(Error::NotThetaPositive(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(RpGroupReport { rp1, rp2, quotient })
}

/// `φ̂(g, τ^ε) = φ(g)` on `G_τ` for `φ∘τ = φ`.
pub fn tau_invariant_extend(
    phi: &FormPDFunction,
    aut: &[usize],
) -> Result<(TauGroup, FormPDFunction)> {
    let base = phi.group().clone();
    base.check_involution(aut)?;
    let defect = (0..base.order())
        .map(|g| max_abs_c(&(phi.value(aut[g]) - phi.value(g))))
        .fold(0.0, f64::max);
    let scale = phi.values().iter().map(max_abs_c).fold(1.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(Error::NotTauInvariant(defect));
    }
    let tg = TauGroup::new(base, aut.to_vec())?;
    let values = phi.values().iter().chain(phi.values()).cloned().collect();
    let ext = FormPDFunction::new(tg.group().clone(), values)?;
    Ok((tg, ext))
}

/// `max_g ‖φ(τg) − φ(g)‖` for the left action of `τ`.
pub fn left_tau_invariance_defect(tg: &TauGroup, phi: &FormPDFunction) -> f64 {
    let group = tg.group();
    (0..group.order())
        .map(|g| max_abs_c(&(phi.value(group.mul(tg.tau(), g)) - phi.value(g))))
        .fold(0.0, f64::max)
}

/// `‖U_τ j − j‖` in the GNS model.
pub fn theta_fixes_j_defect(tg: &TauGroup, gns: &Gns) -> f64 {
    max_abs_c(&(&gns.rep[tg.tau()] * &gns.j - &gns.j))
}

/// Pointwise product of two `m×m`-block kernels on a finite set, given as
/// `nm×nm` matrices, after checking that all blocks commute.
pub fn kernel_product(k1: &CMat, k2: &CMat, m: usize) -> Result<HermitianMatrix> {
    if k1.shape() != k2.shape() || !k1.is_square() || m == 0 || !k1.nrows().is_multiple_of(m) {
        return Err(Error::DimensionMismatch(
            "kernels must share an nm×nm shape".into(),
        ));
    }
    let n = k1.nrows() / m;
    let block = |k: &CMat, x: usize, y: usize| k.view((x * m, y * m), (m, m)).into_owned();
    let scale = max_abs_c(k1).max(1.0) * max_abs_c(k2).max(1.0);
    let mut defect: f64 = 0.0;
    if m > 1 {
        let b1: Vec<CMat> = (0..n * n).map(|i| block(k1, i / n, i % n)).collect();
        let b2: Vec<CMat> = (0..n * n).map(|i| block(k2, i / n, i % n)).collect();
        for a in &b1 {
            for b in &b2 {
                defect = defect.max(max_abs_c(&(a * b - b * a)));
            }
        }
    }
    if defect > 1e-10 * scale {
        return Err(Error::NonCommuting(defect));
    }
    let mut out = CMat::zeros(n * m, n * m);
    for x in 0..n {
        for y in 0..n {
            out.view_mut((x * m, y * m), (m, m))
                .copy_from(&(block(k1, x, y) * block(k2, x, y)));
        }
    }
    HermitianMatrix::new(out)
}

/// `K = A + iB` with real RKHS features `A = FᵀF` and the skew operator `C`
/// on `ℝ^r` with `B = FᵀCF`.
#[derive(Clone, Debug)]
pub struct SplitKernel {
    pub a: RMat,
    pub b: RMat,
    pub features: RMat,
    pub c: SkewSymmetricReal,
    pub reconstruction_defect: f64,
}

fn real_factor(a: &RMat) -> (RMat, RMat) {
    let (vals, vecs) = sym_eig(a);
    let top = vals.iter().fold(0.0f64, |m, x| m.max(*x));
    let keep: Vec<usize> = (0..vals.len())
        .filter(|&k| top > 0.0 && vals[k] > 1e-10 * top)
        .collect();
    let n = a.nrows();
    let r = keep.len();
    let mut f = RMat::zeros(r, n);
    let mut f_pinv = RMat::zeros(n, r);
    for (i, &k) in keep.iter().enumerate() {
        let s = vals[k].sqrt();
        for col in 0..n {
            f[(i, col)] = vecs[(col, k)] * s;
            f_pinv[(col, i)] = vecs[(col, k)] / s;
        }
    }
    (f, f_pinv)
}

pub fn split_complex_kernel(k: &HermitianMatrix) -> Result<SplitKernel> {
    let psd = psd_check(k, 1e-10);
    if !psd.is_psd {
        return Err(Error::NotPositiveDefinite(format!(
            "kernel has eigenvalue {:.3e}",
            psd.min_eig
        )));
    }
    let a = real_part(k.matrix());
    let b = k.matrix().map(|z| z.im);
    let (f, f_pinv) = real_factor(&a);
    let cm = f_pinv.transpose() * &b * &f_pinv;
    let c_skew = SkewSymmetricReal::new((&cm - cm.transpose()).scale(0.5))?;
    let reconstruction_defect = max_abs_r(&(f.transpose() * c_skew.matrix() * &f - &b));
    if reconstruction_defect > 1e-8 * max_abs_r(&a).max(1.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "imaginary part leaves the range of the real part (defect {reconstruction_defect:.3e})"
        )));
    }
    Ok(SplitKernel {
        a,
        b,
        features: f,
        c: c_skew,
        reconstruction_defect,
    })
}

/// Real GNS data of a real-valued positive definite function.
#[derive(Clone, Debug)]
pub struct RealGns {
    pub dim: usize,
    pub rep: Vec<RMat>,
    pub j: RMat,
    pub features: RMat,
}

pub fn real_gns(phi: &FormPDFunction) -> Result<RealGns> {
    if !phi.is_real() {
        return Err(Error::BadParams("φ must be real-valued".into()));
    }
    let gram = phi.gram()?;
    let psd = psd_check(&gram, 1e-10);
    if !psd.is_psd {
        return Err(Error::NotPositiveDefinite(format!(
            "Gram has eigenvalue {:.3e}",
            psd.min_eig
        )));
    }
    let a = real_part(gram.matrix());
    let (f, f_pinv) = real_factor(&a);
    let group = phi.group();
    let m = phi.dim();
    let fc = to_complex(&f);
    let rep = (0..group.order())
        .map(|g| real_part(&permuted(group, m, &fc, g)) * &f_pinv)
        .collect();
    let j = f.columns(group.unit() * m, m).into_owned();
    Ok(RealGns {
        dim: f.nrows(),
        rep,
        j,
        features: f,
    })
}

/// Basis of the skew-symmetric matrices commuting with every `U_g`.
pub fn skew_commutant(rep: &[RMat]) -> Vec<RMat> {
    let r = rep.first().map_or(0, |u| u.nrows());
    let basis: Vec<RMat> = (0..r)
        .flat_map(|i| (i + 1..r).map(move |k| (i, k)))
        .map(|(i, k)| {
            let mut e = RMat::zeros(r, r);
            e[(i, k)] = 1.0;
            e[(k, i)] = -1.0;
            e
        })
        .collect();
    if basis.is_empty() {
        return Vec::new();
    }
    let rows = rep.len() * r * r;
    let mut sys = RMat::zeros(rows, basis.len());
    for (col, e) in basis.iter().enumerate() {
        for (gi, u) in rep.iter().enumerate() {
            let comm = e * u - u * e;
            for (q, v) in comm.iter().enumerate() {
                sys[(gi * r * r + q, col)] = *v;
            }
        }
    }
    let kernel = null_space(&sys, 1e-10);
    (0..kernel.ncols())
        .map(|k| {
            basis
                .iter()
                .enumerate()
                .fold(RMat::zeros(r, r), |acc, (i, e)| acc + e * kernel[(i, k)])
        })
        .collect()
}

/// `φ_C(g)(v, w) = φ(g)(v, w) + i⟨j v, C U_g j w⟩` for a skew contraction
/// `C` in the commutant of the real GNS representation.
pub fn complex_extension(
    phi: &FormPDFunction,
    gns: &RealGns,
    cm: &SkewSymmetricReal,
) -> Result<FormPDFunction> {
    if cm.dim() != gns.dim {
        return Err(Error::DimensionMismatch(format!(
            "C acts on dimension {}, GNS space has {}",
            cm.dim(),
            gns.dim
        )));
    }
    if !cm.is_contraction() {
        return Err(Error::NotContraction(cm.norm()));
    }
    let cmat = cm.matrix();
    let scale = op_norm_r(cmat).max(1.0);
    let defect = gns
        .rep
        .iter()
        .map(|u| max_abs_r(&(cmat * u - u * cmat)))
        .fold(0.0, f64::max);
    if defect > 1e-10 * scale {
        return Err(Error::NotCommuting(defect));
    }
    let values = (0..phi.group().order())
        .map(|g| {
            let im = gns.j.transpose() * cmat * &gns.rep[g] * &gns.j;
            phi.value(g) + im.map(|x| c(0.0, x))
        })
        .collect();
    FormPDFunction::new(phi.group().clone(), values)
}

/// `split_complex_kernel` of `φ_C` against `C`, after moving `C` into the
/// feature coordinates used by the split.
pub fn split_roundtrip_defect(gns: &RealGns, cm: &SkewSymmetricReal, split: &SplitKernel) -> f64 {
    if split.features.nrows() != gns.dim {
        return f64::INFINITY;
    }
    let pinv = gns
        .features
        .clone()
        .pseudo_inverse(1e-12)
        .expect("pseudo-inverse with nonnegative epsilon");
    let o = &split.features * pinv;
    max_abs_r(&(split.c.matrix() - &o * cm.matrix() * o.transpose()))
}

/// Strictness of the contraction of `h = γ + iω`, cross-checked against the
/// strict positivity of `h` and the standardness of the associated subspace.
#[derive(Clone, Debug)]
pub struct JcReport {
    pub c_norm: f64,
    pub injective: bool,
    pub h_min_eig: f64,
    pub h_positive: bool,
    pub standard: bool,
}

impl JcReport {
    pub fn agree(&self) -> bool {
        self.injective == self.h_positive && self.injective == self.standard
    }
}

pub fn jc_injectivity(gamma: &RMat, omega: &RMat) -> Result<JcReport> {
    let q = form_to_contraction(gamma, omega)?;
    let c_norm = q.c.norm();
    let injective = c_norm <= 1.0 - STRICT_MARGIN;
    let h = HermitianMatrix::new(to_complex(gamma) + omega.map(|x| c(0.0, x)))?;
    let h_min_eig = psd_check(&h, 0.0).min_eig;
    let gamma_min = sym_eig(gamma)
        .0
        .iter()
        .fold(f64::INFINITY, |a, &x| a.min(x));
    let h_positive = h_min_eig > 1e-10 * op_norm_c(h.matrix()).max(1.0) && gamma_min > 0.0;
    let standard = gamma.nrows() == q.c.dim()
        && check_standard(&StandardSubspaceE::new(q.c.clone())?).is_standard();
    Ok(JcReport {
        c_norm,
        injective,
        h_min_eig,
        h_positive,
        standard,
    })
}

/// The two-element group `{1, τ}` with `φ(1) = A`, `φ(τ) = B`.
#[derive(Clone, Debug)]
pub struct TwoPointReport {
    pub gram_psd: bool,
    /// `|⟨Bv,w⟩|² ≤ ⟨Av,v⟩⟨Aw,w⟩`, tested as `‖A^{−1/2}BA^{−1/2}‖ ≤ 1` on
    /// `range A` with `B` vanishing off it.
    pub ab_estimate: bool,
    pub b_positive: bool,
    pub sandwich: bool,
}

pub fn two_point_criterion(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: f64,
) -> Result<TwoPointReport> {
    let m = a.dim();
    if b.dim() != m {
        return Err(Error::DimensionMismatch("A and B differ in size".into()));
    }
    let mut big = CMat::zeros(2 * m, 2 * m);
    big.view_mut((0, 0), (m, m)).copy_from(a.matrix());
    big.view_mut((m, m), (m, m)).copy_from(a.matrix());
    big.view_mut((0, m), (m, m)).copy_from(b.matrix());
    big.view_mut((m, 0), (m, m)).copy_from(b.matrix());
    let scale = op_norm_c(a.matrix()).max(op_norm_c(b.matrix())).max(1.0);
    let gram_psd = psd_check(&HermitianMatrix::new(big)?, tol).is_psd;

    let eig = herm_eig(a);
    let top = eig.values.iter().fold(0.0f64, |x, y| x.max(*y));
    let a_psd = eig.values.iter().all(|&x| x >= -tol * scale);
    let keep: Vec<usize> = (0..m)
        .filter(|&k| top > 0.0 && eig.values[k] > 1e-10 * top)
        .collect();
    let w = CMat::from_fn(m, keep.len(), |i, r| eig.vectors[(i, keep[r])]);
    let inv_sqrt = CMat::from_fn(keep.len(), keep.len(), |i, k| {
        if i == k {
            c(1.0 / eig.values[keep[i]].sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let compressed = &inv_sqrt * w.adjoint() * b.matrix() * &w * &inv_sqrt;
    let proj = &w * w.adjoint();
    let off_range = max_abs_c(&(b.matrix() - &proj * b.matrix() * &proj));
    let ab_estimate = a_psd
        && off_range <= tol * scale
        && (keep.is_empty() || op_norm_c(&compressed) <= 1.0 + tol);

    let b_positive = psd_check(b, tol).is_psd;
    let a_minus_b = HermitianMatrix::hermitian_part(&(a.matrix() - b.matrix()));
    let sandwich = b_positive && psd_check(&a_minus_b, tol).is_psd;
    Ok(TwoPointReport {
        gram_psd,
        ab_estimate,
        b_positive,
        sandwich,
    })
}

/// The single-vector model of the Klein four-group as a scalar function on
/// `G_τ` for `G = {1, σ}`, indexed `1, σ, τ, στ`.
pub fn klein4_function(a: f64, b: f64, cc: f64, d: f64) -> (TauGroup, FormPDFunction) {
    let tg = TauGroup::trivial_action(FiniteGroup::cyclic(2));
    let rep = crate::rpext::klein4_analysis(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0));
    let [f1, ft, fs, fst] = rep.f;
    let values = [f1, fs, ft, fst]
        .iter()
        .map(|&x| CMat::from_element(1, 1, c(x, 0.0)))
        .collect();
    let phi = FormPDFunction::new(tg.group().clone(), values).expect("four values");
    (tg, phi)
}
