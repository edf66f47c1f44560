//! Numerical laboratory for Nikishin systems of measures: multiple
//! (Hermite–Padé) orthogonal polynomials, their second-type functions, and
//! the boundary-value system for the ratio-asymptotic limit functions.
//!
//! Everything runs at configurable extended precision (212 bits by default)
//! on top of MPFR. See the README for the CLI and the experiment configs.

pub mod cheb;
pub mod harness;
pub mod limits;
pub mod measures;
pub mod mop;
pub mod num;
pub mod quad;
pub mod second_type;

pub use num::{Ctx, Cx, Real, DEFAULT_PREC};
