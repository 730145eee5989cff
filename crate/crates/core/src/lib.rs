//! Finite-dimensional modular theory, KMS positive definite functions and
//! their reflection positive extensions.
//!
//! The crate is organised bottom-up:
//!
//! - [`matfun`]: Hermitian functional calculus and PSD checks;
//! - [`subspace`]: standard subspaces, modular objects and skew contractions;
//! - [`kms`]: β-KMS functions, their spectral measures and strip kernels;
//! - [`rpext`]: extensions to the group ℝ⋊{1,τ}, Matsubara expansions and
//!   Osterwalder–Schrader quantization;
//! - [`gns`]: finite groups, GNS representations and complex extensions;
//! - [`resolvent`]: the Fourier realization of the extension by the
//!   resolvent of the Laplacian on the circle.

pub mod error;
pub mod gns;
pub mod json;
pub mod kms;
pub mod matfun;
pub mod report;
pub mod resolvent;
pub mod rpext;
pub mod sampling;
pub mod subspace;

pub use error::{Error, Result};
pub use matfun::{CMat, CVec, HermitianMatrix, RMat, RVec, SkewSymmetricReal};
pub use num_complex::Complex64;
