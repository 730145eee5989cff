//! Reflection positive extensions of KMS functions to the group
//! `ℝ_τ = ℝ ⋊ {1, τ}`, with the thermal functions `u±`, their Matsubara
//! expansions and Osterwalder–Schrader quantization.

mod extension;
mod os;
mod thermal;

pub use extension::{
    build_extension, check_positive_definite_group, check_reflection_positive, f_sharp_report,
    integral_representation, lemma_block_gram, recover_psi, recover_psi_blind, rtau_gram,
    IntegralRepresentation, OddPart, PdGroupReport, RPFunction, RTauFunction, Recovered,
};
pub use os::{
    graph_operator, klein4_analysis, os_quantize, GraphReport, Klein4Report, OsQuotient,
    ReflectionPositiveSpace,
};
pub use thermal::{
    fourier_partial_sum, fourier_tail, matsubara_coeff, matsubara_scalar, u_minus_matrix,
    u_minus_scalar, u_plus_matrix, u_plus_scalar, Parity,
};

use serde::{Deserialize, Serialize};

/// An element `(t, ε)` of `ℝ_τ`; `eps = true` stands for `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RTauElement {
    pub t: f64,
    pub eps: bool,
}

impl RTauElement {
    pub const fn new(t: f64, eps: bool) -> Self {
        RTauElement { t, eps }
    }

    pub const fn unit() -> Self {
        Self::new(0.0, false)
    }

    pub const fn tau() -> Self {
        Self::new(0.0, true)
    }

    /// `(t,ε)(s,δ) = (t + (−1)^ε s, ε ⊕ δ)`.
    pub fn mul(&self, other: &Self) -> Self {
        let s = if self.eps { -other.t } else { other.t };
        Self::new(self.t + s, self.eps ^ other.eps)
    }

    pub fn inverse(&self) -> Self {
        if self.eps {
            *self
        } else {
            Self::new(-self.t, false)
        }
    }
}
