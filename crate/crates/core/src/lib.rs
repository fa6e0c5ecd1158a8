//! Exact transition law of `S = a₁X⁽¹⁾ + a₂X⁽²⁾` for two independent CIR
//! diffusions observed over one step `Δt`.
//!
//! Each factor is a scaled noncentral chi-square, i.e. a Poisson mixture of
//! gamma laws. Conditioning on both Poisson counts leaves a sum of two gammas
//! with unequal scales whose density is a Kummer `1F1` kernel; averaging the
//! kernel over the two counts gives the density, and integrating it termwise
//! gives the CDF as an incomplete-gamma series. Every infinite sum is cut with
//! a certified bound on the dropped mass.
//!
//! Modules, bottom up:
//!
//! * [`specfun`]: log-gamma, incomplete gamma, `1F1`, Poisson tables, normal quantile.
//! * [`quad`]: adaptive Gauss–Kronrod quadrature used by the oracles.
//! * [`cir`]: one CIR factor, its transition parameters, exact sampling.
//! * [`kernel`]: the unequal-scale gamma convolution and its CDF series.
//! * [`mixture`]: density, CDF, moments and Laplace transform of the sum.
//! * [`validate`]: Monte Carlo and quadrature cross-checks.
//! * [`estimate`]: exact likelihood and bounded simplex fitting.
//! * [`cli`]: configuration and command implementations behind the binary.

pub mod cir;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod kernel;
pub mod mixture;
pub mod quad;
pub mod specfun;
pub mod truncation;
pub mod validate;

pub use cir::{CirFactor, TransitionParams};
pub use error::{Error, Result};
pub use kernel::KernelParams;
pub use mixture::SumModel;
pub use truncation::{EvalResult, TruncationMethod, TruncationPolicy};
