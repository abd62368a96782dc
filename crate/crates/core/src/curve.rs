//! Sampled amplitude curves shared by every solver.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::reservoir::ReservoirParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedHalf,
    Series,
    SeriesZ1zero,
    Volterra,
    Modes,
    Rational,
    Asymptotic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedHalf => "closed-half",
            Method::Series => "series",
            Method::SeriesZ1zero => "series-z1zero",
            Method::Volterra => "volterra",
            Method::Modes => "modes",
            Method::Rational => "rational",
            Method::Asymptotic => "asymptotic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub c: Complex64,
    pub p: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub samples: Vec<Sample>,
    pub params: ReservoirParams,
    /// Largest relative population mismatch seen where two methods overlap.
    pub overlap_mismatch: Option<f64>,
}

impl DecayCurve {
    pub fn new(params: ReservoirParams) -> Self {
        Self { samples: Vec::new(), params, overlap_mismatch: None }
    }

    /// Appends a sample; times must increase strictly.
    pub fn push(&mut self, t: f64, c: Complex64, method: Method) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(t > last.t) {
                return Err(Error::Domain(format!("sample time {t} does not follow {}", last.t)));
            }
        }
        self.samples.push(Sample { t, c, p: c.norm_sqr(), method });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.p).collect()
    }

    /// Largest `|C|` over the curve.
    pub fn max_modulus(&self) -> f64 {
        self.samples.iter().map(|s| s.c.norm()).fold(0.0, f64::max)
    }
}

/// Checks a time grid is sorted, finite and nonnegative.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    for (i, &t) in grid.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("grid point {t} is not a finite nonnegative time")));
        }
        if i > 0 && !(t > grid[i - 1]) {
            return Err(Error::Domain(format!("grid is not strictly increasing at {t}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_enforces_order_and_population() {
        let p = ReservoirParams::new(0.5, 1.0, 1.0).unwrap();
        let mut curve = DecayCurve::new(p);
        curve.push(0.0, Complex64::new(1.0, 0.0), Method::ClosedHalf).unwrap();
        curve.push(0.5, Complex64::new(0.3, -0.4), Method::Series).unwrap();
        assert!((curve.samples[1].p - 0.25).abs() < 1e-16);
        assert!(curve.push(0.5, Complex64::new(0.0, 0.0), Method::Series).is_err());
        assert_eq!(Method::SeriesZ1zero.to_string(), "series-z1zero");
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[0.0, 1.0, 2.0]).is_ok());
        assert!(validate_grid(&[0.0, 0.0]).is_err());
        assert!(validate_grid(&[-1.0]).is_err());
        assert!(validate_grid(&[f64::NAN]).is_err());
    }
}
