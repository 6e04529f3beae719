//! Numerical verification toolkit for the explicit formulas that arise in
//! spectral summation: Kloosterman and Ramanujan sums, GL(3) Hecke
//! combinatorics, Bessel-kernel integral transforms of Kuznetsov/Petersson
//! type and their Mellin closed forms, multiple Dirichlet series with their
//! functional equations, and local Euler-factor identities.
//!
//! Every closed-form expression implemented here is paired with an
//! independent oracle (direct summation, numerical quadrature, power-series
//! expansion, or exact integer arithmetic) and the two are compared at
//! stated tolerances. The `verify` binary runs the named check suites and
//! emits a machine-readable report; `cargo test` runs the same checks plus
//! property tests.
//!
//! Conventions used throughout:
//! * `e(x)` means `exp(2 pi i x)`.
//! * Spectral parameters come in zero-sum triples `mu = (mu_1, mu_2, mu_3)`.
//! * All floating-point work is `f64`; functions that cannot certify their
//!   accuracy in a requested range return an error instead of a number.

pub mod arith;
pub mod error;
pub mod euler_local;
pub mod quad;
pub mod report;
pub mod series;
pub mod special;
pub mod spectral_check;
pub mod suites;
pub mod transforms;

pub use error::{Error, Result};

/// Complex double, the scalar type used by all analytic routines.
pub type C64 = num_complex::Complex<f64>;

/// Shorthand for `C64::new`.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
