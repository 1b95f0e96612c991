//! Numerics for murmurations of weight-k newforms of square-free level.
//!
//! The crate computes both sides of the murmuration identity: the arithmetic
//! side (traces of `T_P ∘ W_N` through Hurwitz class numbers, averaged over
//! levels) and the analytic side (the density `M_k(y)` in its Chebyshev,
//! Bessel and asymptotic forms, dyadic and smoothed averages), together with
//! the multiplicative functions and Euler products that connect them and a
//! certified sign-change scan for the limiting density.

pub mod arith;
pub mod classnumbers;
pub mod constants;
pub mod density;
pub mod error;
pub mod multfns;
pub mod quad;
pub mod signcheck;
pub mod special;
pub mod traceformula;

pub use error::{Error, Result};

/// Exact rational carrier. Always in lowest terms with a positive denominator.
pub type Rational = num_rational::Ratio<i128>;
