//! Instance files: `{"kind": ..., "payload": {...}}`.

use serde::{Deserialize, Serialize};

use kmsrp_core::gns::{tau_invariant_extend, FiniteGroup, FormPDFunction, TauGroup};
use kmsrp_core::json::MatrixJson;
use kmsrp_core::kms::{Atom, DiscreteFormMeasure, KmsFunction};
use kmsrp_core::matfun::{RMat, SkewSymmetricReal};
use kmsrp_core::resolvent::ResolventSpace;
use kmsrp_core::rpext::RPFunction;
use kmsrp_core::subspace::{ContractionOnV, StandardSubspaceE};
use kmsrp_core::Error;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Instance {
    Contraction(ContractionPayload),
    Kms(KmsPayload),
    Rpfunction(RpPayload),
    FiniteGroup(GroupPayload),
    Resolvent(ResolventPayload),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ContractionPayload {
    pub c: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub lambda: f64,
    pub weight: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KmsPayload {
    pub beta: f64,
    pub c_v: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<MatrixJson>,
    /// Explicit spectral measure; when present it is checked in place of
    /// the one derived from `c_v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RpPayload {
    pub beta: f64,
    pub i: MatrixJson,
    pub abs_d: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<MatrixJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupPayload {
    /// Multiplication table of the base group `G`.
    pub table: Vec<Vec<usize>>,
    /// Involutive automorphism `τ` of `G`. Values then live either on `G`
    /// (extended τ-invariantly) or on `G ⋊ {1, τ}` indexed `g + ε·|G|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aut: Option<Vec<usize>>,
    pub values: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_reflection_positive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub klein4: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResolventPayload {
    pub beta: f64,
    pub lambda: f64,
    pub i: MatrixJson,
    pub n_max: usize,
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Contraction(_) => "contraction",
            Instance::Kms(_) => "kms",
            Instance::Rpfunction(_) => "rpfunction",
            Instance::FiniteGroup(_) => "finite-group",
            Instance::Resolvent(_) => "resolvent",
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instances serialize");
        s.push('\n');
        s
    }
}

fn skew(m: &MatrixJson) -> CliResult<SkewSymmetricReal> {
    Ok(SkewSymmetricReal::new(m.to_real()?)?)
}

fn optional_real(m: &Option<MatrixJson>) -> CliResult<Option<RMat>> {
    m.as_ref()
        .map(|m| m.to_real().map_err(CliError::from))
        .transpose()
}

impl ContractionPayload {
    pub fn subspace(&self) -> CliResult<StandardSubspaceE> {
        Ok(StandardSubspaceE::new(skew(&self.c)?)?)
    }
}

impl KmsPayload {
    pub fn function(&self) -> CliResult<KmsFunction> {
        let cv = ContractionOnV::new(skew(&self.c_v)?)?;
        Ok(KmsFunction::new(self.beta, cv, optional_real(&self.j)?)?)
    }

    pub fn explicit_measure(&self) -> CliResult<Option<DiscreteFormMeasure>> {
        let Some(atoms) = &self.atoms else {
            return Ok(None);
        };
        if atoms.is_empty() {
            return Err(CliError::Usage("atom list is empty".into()));
        }
        let atoms = atoms
            .iter()
            .map(|a| {
                Ok(Atom {
                    lambda: a.lambda,
                    weight: a.weight.to_complex()?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Some(DiscreteFormMeasure::new(atoms)?))
    }
}

impl RpPayload {
    pub fn function(&self) -> CliResult<RPFunction> {
        Ok(RPFunction::new(
            self.beta,
            self.i.to_real()?,
            self.abs_d.to_real()?,
            optional_real(&self.j)?,
        )?)
    }
}

/// A group function ready for checking; `tau` is set when an automorphism
/// was given.
pub struct GroupInstance {
    pub phi: FormPDFunction,
    pub tau: Option<TauGroup>,
    pub plus: Vec<usize>,
}

impl GroupPayload {
    pub fn build(&self) -> CliResult<GroupInstance> {
        let base = FiniteGroup::new(self.table.clone())?;
        let values = self
            .values
            .iter()
            .map(|v| v.to_complex().map_err(CliError::from))
            .collect::<CliResult<Vec<_>>>()?;
        let n = base.order();
        let plus = self.plus.clone().unwrap_or_else(|| (0..n).collect());
        match &self.aut {
            None => Ok(GroupInstance {
                phi: FormPDFunction::new(base, values)?,
                tau: None,
                plus,
            }),
            Some(aut) if values.len() == n => {
                let base_phi = FormPDFunction::new(base, values)?;
                let (tg, phi) = tau_invariant_extend(&base_phi, aut)?;
                Ok(GroupInstance {
                    phi,
                    tau: Some(tg),
                    plus,
                })
            }
            Some(aut) if values.len() == 2 * n => {
                let tg = TauGroup::new(base, aut.clone())?;
                let phi = FormPDFunction::new(tg.group().clone(), values)?;
                Ok(GroupInstance {
                    phi,
                    tau: Some(tg),
                    plus,
                })
            }
            Some(_) => Err(Error::DimensionMismatch(format!(
                "expected {n} or {} values, got {}",
                2 * n,
                values.len()
            ))
            .into()),
        }
    }
}

impl ResolventPayload {
    pub fn space(&self) -> CliResult<ResolventSpace> {
        if self.n_max == 0 {
            return Err(CliError::Usage("n_max must be positive".into()));
        }
        Ok(ResolventSpace::new(
            self.beta,
            self.lambda,
            self.i.to_real()?,
        )?)
    }
}
