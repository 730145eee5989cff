//! Seeded instance generation.

use std::f64::consts::PI;

use rand::Rng;

use kmsrp_core::gns::{klein4_function, FiniteGroup};
use kmsrp_core::json::MatrixJson;
use kmsrp_core::kms::KmsFunction;
use kmsrp_core::matfun::{RMat, SkewSymmetricReal};
use kmsrp_core::resolvent::ResolventSpace;
use kmsrp_core::rpext::build_extension;
use kmsrp_core::sampling::{random_contraction, rng};
use kmsrp_core::subspace::ContractionOnV;

use crate::error::{CliError, CliResult};
use crate::instance::{
    ContractionPayload, GroupPayload, Instance, KmsPayload, ResolventPayload, RpPayload,
};

pub const MAX_DIM: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Contraction,
    Kms,
    Rpfunction,
    FiniteGroup,
    Resolvent,
}

#[derive(Clone, Debug)]
pub struct GenParams {
    pub kind: Kind,
    pub dim: Option<usize>,
    pub seed: u64,
    /// Range for the operator norm of random contractions.
    pub strictness: (f64, f64),
    pub c: Option<f64>,
    pub beta: f64,
    pub lambda: f64,
    pub order: usize,
    pub klein4: Option<[f64; 4]>,
    pub n_max: usize,
}

impl GenParams {
    pub fn new(kind: Kind) -> Self {
        GenParams {
            kind,
            dim: None,
            seed: 0,
            strictness: (0.5, 0.95),
            c: None,
            beta: 1.0,
            lambda: 1.0,
            order: 4,
            klein4: None,
            n_max: 2000,
        }
    }
}

/// Parses a number or `tanh(<number>)`.
pub fn parse_scalar(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.strip_prefix("tanh(").and_then(|r| r.strip_suffix(')')) {
        Some(inner) => inner.trim().parse::<f64>().map(f64::tanh),
        None => s.parse::<f64>(),
    }
    .map_err(|e| format!("cannot parse {s:?}: {e}"))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Parses `lo:hi` with `0 ≤ lo ≤ hi < 1`.
pub fn parse_strictness(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if !(0.0 <= lo && lo <= hi && hi < 1.0) {
        return Err(format!("need 0 <= lo <= hi < 1, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

pub fn parse_klein4(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| "expected four comma-separated numbers".to_string())
}

fn bad(msg: impl Into<String>) -> CliError {
    kmsrp_core::Error::BadParams(msg.into()).into()
}

fn dim_in_range(p: &GenParams, default: Option<usize>) -> CliResult<usize> {
    let dim = p
        .dim
        .or(default)
        .ok_or_else(|| bad("--dim is required for this kind"))?;
    if dim == 0 || dim > MAX_DIM {
        return Err(bad(format!("dim must lie in 1..={MAX_DIM}, got {dim}")));
    }
    Ok(dim)
}

fn check_beta(beta: f64) -> CliResult<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("β must be positive, got {beta}")))
    }
}

/// `c` times the standard complex structure on `ℝ^dim`.
fn block_rotation(dim: usize, c: f64) -> CliResult<SkewSymmetricReal> {
    if !dim.is_multiple_of(2) {
        return Err(bad("--c needs an even dimension"));
    }
    let mut m = RMat::zeros(dim, dim);
    for b in 0..dim / 2 {
        m[(2 * b, 2 * b + 1)] = -c;
        m[(2 * b + 1, 2 * b)] = c;
    }
    Ok(SkewSymmetricReal::new(m)?)
}

fn contraction(p: &GenParams, dim: usize) -> CliResult<SkewSymmetricReal> {
    match p.c {
        Some(c) => block_rotation(dim, c),
        None => {
            let mut r = rng(p.seed);
            Ok(random_contraction(
                &mut r,
                dim,
                p.strictness.0,
                p.strictness.1,
            ))
        }
    }
}

fn kms_function(p: &GenParams) -> CliResult<KmsFunction> {
    check_beta(p.beta)?;
    let dim = dim_in_range(p, None)?;
    let cv = ContractionOnV::new(contraction(p, dim)?)?;
    Ok(KmsFunction::new(p.beta, cv, None)?)
}

/// `φ(k) = Σ_j e^{2πijk/n} W_j` on `ℤ_n` with real PSD `W_j = W_{n−j}`,
/// which is positive definite and invariant under inversion.
fn random_cyclic_function(p: &GenParams) -> CliResult<GroupPayload> {
    let n = p.order;
    if n == 0 || n > MAX_DIM {
        return Err(bad(format!("order must lie in 1..={MAX_DIM}, got {n}")));
    }
    let m = dim_in_range(p, Some(1))?;
    let mut r = rng(p.seed);
    let mut weights: Vec<RMat> = Vec::with_capacity(n);
    for j in 0..n {
        if j > n - j && j < n {
            weights.push(weights[n - j].clone());
            continue;
        }
        let a = RMat::from_fn(m, m, |_, _| r.gen_range(-1.0..1.0));
        weights.push(&a * a.transpose());
    }
    let values = (0..n)
        .map(|k| {
            let v = (0..n).fold(RMat::zeros(m, m), |acc, j| {
                acc + &weights[j] * (2.0 * PI * (j * k) as f64 / n as f64).cos()
            });
            MatrixJson::from_real(&v)
        })
        .collect();
    let g = FiniteGroup::cyclic(n);
    Ok(GroupPayload {
        table: g.table().to_vec(),
        aut: Some((0..n).map(|k| g.inv(k)).collect()),
        values,
        plus: None,
        expect_reflection_positive: None,
        klein4: None,
    })
}

pub fn generate(p: &GenParams) -> CliResult<Instance> {
    match p.kind {
        Kind::Contraction => {
            let dim = dim_in_range(p, None)?;
            let c = contraction(p, dim)?;
            if !c.is_strict() {
                return Err(bad(format!(
                    "contraction of norm {} is not strict",
                    c.norm()
                )));
            }
            Ok(Instance::Contraction(ContractionPayload {
                c: MatrixJson::from_real(c.matrix()),
            }))
        }
        Kind::Kms => {
            let k = kms_function(p)?;
            Ok(Instance::Kms(KmsPayload {
                beta: k.beta(),
                c_v: MatrixJson::from_real(k.contraction().matrix()),
                j: None,
                atoms: None,
            }))
        }
        Kind::Rpfunction => {
            let f = build_extension(&kms_function(p)?)?;
            let j = f.jmap();
            let identity = j.is_square() && *j == RMat::identity(j.nrows(), j.nrows());
            Ok(Instance::Rpfunction(RpPayload {
                beta: p.beta,
                i: MatrixJson::from_real(f.complex_structure()),
                abs_d: MatrixJson::from_real(f.abs_d()),
                j: (!identity).then(|| MatrixJson::from_real(j)),
            }))
        }
        Kind::FiniteGroup => match p.klein4 {
            Some([a, b, c, d]) => {
                let (tg, phi) = klein4_function(a, b, c, d);
                Ok(Instance::FiniteGroup(GroupPayload {
                    table: tg.base().table().to_vec(),
                    aut: Some(tg.aut().to_vec()),
                    values: phi.values().iter().map(MatrixJson::from_complex).collect(),
                    plus: Some(vec![tg.base().unit()]),
                    expect_reflection_positive: None,
                    klein4: Some([a, b, c, d]),
                }))
            }
            None => Ok(Instance::FiniteGroup(random_cyclic_function(p)?)),
        },
        Kind::Resolvent => {
            check_beta(p.beta)?;
            let m = dim_in_range(p, Some(2))?;
            if m % 2 != 0 {
                return Err(bad("the resolvent space needs an even dimension"));
            }
            if p.n_max == 0 {
                return Err(bad("n_max must be positive"));
            }
            let space = ResolventSpace::standard(p.beta, p.lambda, m / 2)?;
            Ok(Instance::Resolvent(ResolventPayload {
                beta: p.beta,
                lambda: p.lambda,
                i: MatrixJson::from_real(space.complex_structure()),
                n_max: p.n_max,
            }))
        }
    }
}
