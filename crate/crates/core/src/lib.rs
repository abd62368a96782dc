//! Spontaneous emission of a two-level atom (or a Dicke ensemble in its
//! single-excitation superradiant state) into a band-gap reservoir with
//! spectral density `J(ω) = 2A (ω−ω₀)^α / (a² + (ω−ω₀)²)`.
//!
//! The amplitude `C(t)` of the excited state obeys `Ċ = −(f ∗ C)` with
//! `C(0) = 1`, where `f` is the reservoir correlation function. Several
//! independent routes to `C(t)` are provided:
//!
//! - [`closed_half`]: exact solution for `α = 1/2` in terms of
//!   incomplete gamma functions of order one half,
//! - [`series`]: the double series of Wright-type kernels for any `α`,
//! - [`rational`]: pole and branch-cut decomposition for `α = p/q`,
//! - [`oracles`]: a product-integration Volterra solver and a
//!   discrete-mode simulation of the full amplitude system,
//! - [`asymptotics`]: time scales, inverse power laws, the critical
//!   ensemble size and a stitched evaluator.
//!
//! Frequencies are in units of `a` and times in units of `1/a`
//! throughout the documentation.

pub mod asymptotics;
pub mod closed_half;
pub mod curve;
pub mod error;
pub mod oracles;
pub mod poly;
pub mod quad;
pub mod rational;
pub mod reservoir;
pub mod series;
pub mod specfun;
pub mod validation;

pub use curve::{DecayCurve, Method, Sample};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use reservoir::{DerivedConstants, ReservoirParams};
