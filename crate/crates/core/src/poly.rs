//! Complex polynomials in ascending-coefficient form and their roots.
//!
//! Roots come from the Aberth-Ehrlich simultaneous iteration followed by
//! Newton polishing against the original coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `c[0] + c[1] z + … + c[n] z^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * j as f64)
            .collect::<Vec<_>>();
        if coeffs.is_empty() {
            Poly::new(vec![Complex64::new(0.0, 0.0)])
        } else {
            Poly::new(coeffs)
        }
    }

    /// `Σ |c_j| |z|^j`, the natural scale for judging a residual at `z`.
    pub fn magnitude_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Poly {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (j, &c) in coeffs.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= c * r;
            }
            coeffs = next;
        }
        Poly::new(coeffs)
    }

    /// All complex roots, polished, sorted lexicographically by (Re, Im).
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        let monic: Vec<Complex64> = self.coeffs.iter().map(|c| c / lead).collect();
        let monic = Poly { coeffs: monic };
        let deriv = monic.derivative();

        // starting radius: geometric mean of root moduli bound
        let radius = (1..=n)
            .map(|j| monic.coeffs[n - j].norm().powf(1.0 / j as f64))
            .fold(0.0f64, f64::max)
            .max(1e-3);
        let mut z: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / n as f64 + 0.4))
            .collect();

        let mut converged = false;
        for _ in 0..2000 {
            let mut biggest = 0.0f64;
            for i in 0..n {
                let p = monic.eval(z[i]);
                let dp = deriv.eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let mut repulsion = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        repulsion += (z[i] - z[j]).inv();
                    }
                }
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] -= step;
                    biggest = biggest.max(step.norm() / z[i].norm().max(1e-300));
                }
            }
            if biggest < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            log::debug!("aberth iteration hit its cap; relying on polishing");
        }
        for zi in z.iter_mut() {
            for _ in 0..3 {
                let (p, dp) = monic.eval_with_derivative(*zi);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                let cand = *zi - step;
                if monic.eval(cand).norm() <= p.norm() {
                    *zi = cand;
                } else {
                    break;
                }
            }
        }
        let worst = z
            .iter()
            .map(|&zi| monic.eval(zi).norm() / monic.magnitude_scale(zi))
            .fold(0.0f64, f64::max);
        if !(worst <= 1e-10) {
            return Err(Error::RootQuality { residual: worst, bound: 1e-10 });
        }
        z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(z)
    }
}
