//! Worst-case uniform deviations of de la Vallée Poussin sums on classes of
//! `(ψ,β)`-differentiable periodic functions with coefficients `ψ(k)` whose
//! ratios tend to `q ∈ (0, 1)`.
//!
//! The crate evaluates the kernels involved, computes exact worst cases (dual
//! norms for `L_s` balls, a linear program for `H_ω`), and compares them with
//! the asymptotic main terms and remainder envelopes.

// NaN-rejecting `!(x > 0.0)` guards and full-precision quadrature tables are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotic;
pub mod elliptic;
pub mod error;
pub mod exponent;
pub mod fourier;
pub mod kernel;
pub mod quad;
pub mod report;
pub mod sequence;
pub mod worstcase;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use fourier::{TrigPoly, VpConfig};
pub use kernel::{KernelSpec, TailKernel, TailKernelSpec};
pub use quad::QuadratureResult;
pub use sequence::{EpsilonTail, Family, PsiSequence};
pub use worstcase::{ClassSpec, Method, ModulusOfContinuity, WorstCaseOptions, WorstCaseResult};
