//! Scalar special functions used throughout the crate.
//!
//! Everything here works for plain `f64` arguments and knows nothing about CIR
//! processes. Products of gamma functions and long series are formed in log
//! space ([`LogValue`]) and exponentiated once by the caller.

mod gamma;
mod kummer;
mod logvalue;
mod normal;
mod poisson;

pub use gamma::{log_gamma, log_pochhammer, reg_gamma_pq, reg_lower_gamma, reg_upper_gamma};
pub use kummer::{kummer_1f1, MAX_SERIES_TERMS, SERIES_TOL};
pub use logvalue::LogValue;
pub use normal::{normal_cdf, normal_quantile};
pub use poisson::{ln_poisson_pmf, poisson_tail_quantile, poisson_weights, PoissonTable, NORMAL_FALLBACK_MEAN};

pub(crate) use gamma::{ln_gamma_prefactor, log_gamma_unchecked};
