use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("gamma function pole at z = {0}")]
    Pole(Complex64),
    #[error("result overflows double precision: {0}")]
    Overflow(String),
    #[error("{what} did not converge after {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadrature failed to reach tolerance (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("root residual {residual:e} exceeds bound {bound:e}")]
    RootQuality { residual: f64, bound: f64 },
    #[error("roots {0} and {1} coincide")]
    CoincidentRoots(Complex64, Complex64),
    #[error("root cluster at {zeta} has multiplicity {multiplicity}; at most 2 is supported")]
    Multiplicity { zeta: Complex64, multiplicity: usize },
    #[error("series horizon exceeded at t = {t} (term/sum ratio {ratio:e}); last reliable partial sum {partial}")]
    Horizon { t: f64, ratio: f64, partial: Complex64 },
    #[error("integral diverges: {0}")]
    Divergence(String),
    #[error("instability at t = {t}: |C| = {modulus}")]
    Instability { t: f64, modulus: f64 },
    #[error("time step too coarse: {0}")]
    Resolution(String),
    #[error("no method covers t = {0}")]
    Gap(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
