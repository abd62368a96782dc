//! Exact amplitude for `α = 1/2`.
//!
//! With `s = z²` the Laplace transform of `C` is a rational function of
//! `z = √s` whose denominator is the quartic
//! `Q(z) = π√(2/a) N A + i a z² + (1+i) √a z³ + z⁴`. Partial fractions give
//!
//! ```text
//! C(t) = Σ_l χ_l R(χ_l) · h(−χ_l √t),    h(w) = e^{w²} erfc(w),
//! ```
//!
//! where the sum runs over the four roots `χ_l`. Roots with `Re χ > 0`
//! lie on the physical sheet of `√s` and contribute pole terms
//! `2χR(χ)e^{χ²t}`; those with purely imaginary `χ²` are bound states that
//! never decay. The rest of the amplitude is the
//! branch-cut (radiative) part, `(1/√π) Σ_l ± χ_l R(χ_l) G(χ_l² t)`, which
//! decays as `t^{−3}` because `Σ_l R(χ_l) = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::curve::{validate_grid, DecayCurve, Method};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::reservoir::ReservoirParams;
use crate::specfun::{scaled_erfc, scaled_upper_gamma_half};

const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, PartialEq)]
pub struct QuarticSolution {
    /// Sorted lexicographically by (Re, Im).
    pub roots: [Complex64; 4],
    pub gamma_i: Complex64,
    pub phi_i: Complex64,
    pub delta_i: Complex64,
    /// `max_l |Q(χ_l)| / Σ_j |q_j| |χ_l|^j`.
    pub max_residual: f64,
    /// Whether the radical formulas passed the residual check; otherwise the
    /// roots come from the numeric solver.
    pub closed_form_accepted: bool,
}

const RESIDUAL_BOUND: f64 = 1e-10;

fn require_half(params: &ReservoirParams) -> Result<()> {
    if params.alpha != 0.5 {
        return Err(Error::Precondition(format!("closed form needs alpha = 1/2, got {}", params.alpha)));
    }
    Ok(())
}

/// The quartic whose roots define the exact solution.
pub fn quartic(params: &ReservoirParams) -> Poly {
    let a = params.a;
    let sa = a.sqrt();
    Poly::new(vec![
        Complex64::new(PI * (2.0 / a).sqrt() * params.effective_amplitude(), 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, a),
        Complex64::new(sa, sa),
        Complex64::new(1.0, 0.0),
    ])
}

/// Radical formulas with principal branches throughout.
fn radical_roots(a: f64, na: f64) -> ([Complex64; 4], Complex64, Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    let delta = c(26.0 * PI * PI * a * na * na - 2f64.powf(1.5) * PI * a.powf(3.5) * na
        - 128.0 * PI.powi(3) * (2.0 / a.powi(3)).sqrt() * na.powi(3))
    .sqrt();
    let phi = (delta * 3f64.powf(1.5) - i * a.powi(3) - i * 9.0 * PI * (2.0 * a).sqrt() * na).powf(1.0 / 3.0);
    let k = 12.0 * PI * (2.0 / a).sqrt() * na;
    let gamma = (phi / 3.0 - i * (a / 6.0) + c(k) / (phi * 3.0)).sqrt();
    let common = (c(a * a) - k) / (phi * 3.0) - i * (a / 3.0) - phi / 3.0;
    let s12 = ((i - 1.0) * a.powf(1.5) / (gamma * 2.0) + common).sqrt();
    let s34 = ((1.0 - i) * a.powf(1.5) / (gamma * 2.0) + common).sqrt();
    let base = -(1.0 + i) * a.sqrt() / 4.0;
    let roots = [
        base + gamma / 2.0 + s12 / 2.0,
        base + gamma / 2.0 - s12 / 2.0,
        base - gamma / 2.0 + s34 / 2.0,
        base - gamma / 2.0 - s34 / 2.0,
    ];
    (roots, gamma, phi, delta)
}

fn worst_residual(q: &Poly, roots: &[Complex64]) -> f64 {
    roots
        .iter()
        .map(|&z| q.eval(z).norm() / q.magnitude_scale(z))
        .fold(0.0, f64::max)
}

pub fn quartic_roots(params: &ReservoirParams) -> Result<QuarticSolution> {
    require_half(params)?;
    let q = quartic(params);
    let (radical, gamma_i, phi_i, delta_i) = radical_roots(params.a, params.effective_amplitude());
    let radical_ok = radical.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    let radical_residual = if radical_ok { worst_residual(&q, &radical) } else { f64::INFINITY };
    let (mut roots, accepted) = if radical_residual <= RESIDUAL_BOUND {
        (radical, true)
    } else {
        log::debug!("radical quartic roots rejected (residual {radical_residual:e}); using numeric roots");
        let numeric = q.roots()?;
        ([numeric[0], numeric[1], numeric[2], numeric[3]], false)
    };
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let max_residual = worst_residual(&q, &roots);
    if max_residual > RESIDUAL_BOUND {
        return Err(Error::RootQuality { residual: max_residual, bound: RESIDUAL_BOUND });
    }
    let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..4 {
        for j in i + 1..4 {
            if (roots[i] - roots[j]).norm() <= 1e-9 * scale {
                return Err(Error::CoincidentRoots(roots[i], roots[j]));
            }
        }
    }
    Ok(QuarticSolution { roots, gamma_i, phi_i, delta_i, max_residual, closed_form_accepted: accepted })
}

/// `R(z) = (1−i)(√a+z)(i√a+z) / (2z((1+i)a + 3√a z + 2(1−i)z²))`.
pub fn rational_r(z: Complex64, a: f64) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let sa = a.sqrt();
    let num = (1.0 - i) * (z + sa) * (z + i * sa);
    let den = z * 2.0 * ((1.0 + i) * a + z * (3.0 * sa) + (2.0 - 2.0 * i) * z * z);
    if den.norm() <= 1e-300 || den.norm() <= 1e-14 * num.norm() {
        return Err(Error::Pole(z));
    }
    Ok(num / den)
}

/// Exact solution at `α = 1/2`, built once per parameter set.
#[derive(Debug, Clone)]
pub struct HalfSolution {
    pub params: ReservoirParams,
    pub quartic: QuarticSolution,
    /// `χ_l R(χ_l)` per root.
    pub weights: [Complex64; 4],
}

impl HalfSolution {
    pub fn new(params: &ReservoirParams) -> Result<Self> {
        let quartic = quartic_roots(params)?;
        let mut weights = [Complex64::new(0.0, 0.0); 4];
        for (w, &chi) in weights.iter_mut().zip(&quartic.roots) {
            *w = chi * rational_r(chi, params.a)?;
        }
        Ok(Self { params: *params, quartic, weights })
    }

    pub fn amplitude(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time {t} is negative")));
        }
        if t == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let st = t.sqrt();
        let mut sum = Complex64::new(0.0, 0.0);
        for (&chi, &w) in self.quartic.roots.iter().zip(&self.weights) {
            sum += w * scaled_erfc(-chi * st)?;
        }
        Ok(sum)
    }

    /// Roots on the physical sheet of `√s` (`Re χ > 0`): genuine poles of
    /// the transform.
    pub fn sheet_roots(&self) -> Vec<usize> {
        (0..4).filter(|&l| self.quartic.roots[l].re > 0.0).collect()
    }

    /// Physical-sheet roots with `Re χ² = 0`: bound states that never decay.
    pub fn bound_roots(&self) -> Vec<usize> {
        self.sheet_roots()
            .into_iter()
            .filter(|&l| {
                let s = self.quartic.roots[l] * self.quartic.roots[l];
                s.re.abs() <= 1e-9 * s.norm()
            })
            .collect()
    }

    /// Pole part `Σ_sheet 2χR(χ) e^{χ² t}`.
    pub fn pole_part(&self, t: f64) -> Complex64 {
        self.sheet_roots()
            .into_iter()
            .map(|l| {
                let chi = self.quartic.roots[l];
                self.weights[l] * 2.0 * (chi * chi * t).exp()
            })
            .sum()
    }

    /// Branch-cut part `(1/√π) Σ_l s_l χ_l R(χ_l) G(χ_l² t)`, with
    /// `s_l = −1` on physical-sheet roots and `+1` otherwise.
    pub fn radiative_part(&self, t: f64) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for (&chi, &w) in self.quartic.roots.iter().zip(&self.weights) {
            let sign = if chi.re > 0.0 { -1.0 } else { 1.0 };
            sum += w * sign * scaled_upper_gamma_half(chi * chi * t)?;
        }
        Ok(sum / SQRT_PI)
    }

    /// Long-time population left in the bound states (time average of the
    /// squared non-decaying pole terms; exact with a single bound root).
    pub fn trapped_population(&self) -> f64 {
        self.bound_roots().into_iter().map(|l| (self.weights[l] * 2.0).norm_sqr()).sum()
    }

    /// `Σ_l R(χ_l)`, the coefficient of the `t^{−1/2}` term of the radiative
    /// part. Vanishes identically.
    pub fn leading_cancellation(&self) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for &chi in &self.quartic.roots {
            s += rational_r(chi, self.params.a)?;
        }
        Ok(s)
    }

    /// Coefficient `ζ` of the radiative population `ζ t^{−3}`:
    /// `(1/4π) |Σ_l R(χ_l) χ_l^{−2}|²`.
    pub fn radiative_coefficient(&self) -> Result<f64> {
        let mut s = Complex64::new(0.0, 0.0);
        for &chi in &self.quartic.roots {
            s += rational_r(chi, self.params.a)? / (chi * chi);
        }
        Ok(s.norm_sqr() / (4.0 * PI))
    }

    /// `max_l |χ_l|^{−2}`.
    pub fn onset_time(&self) -> f64 {
        self.quartic.roots.iter().map(|z| 1.0 / z.norm_sqr()).fold(0.0, f64::max)
    }
}

pub fn amplitude_half(params: &ReservoirParams, t: f64) -> Result<Complex64> {
    HalfSolution::new(params)?.amplitude(t)
}

pub fn population_half(params: &ReservoirParams, grid: &[f64]) -> Result<DecayCurve> {
    validate_grid(grid)?;
    let sol = HalfSolution::new(params)?;
    let mut curve = DecayCurve::new(*params);
    for &t in grid {
        let c = sol.amplitude(t)?;
        if c.norm_sqr() > 1.0 + 1e-9 {
            return Err(Error::Instability { t, modulus: c.norm() });
        }
        curve.push(t, c, Method::ClosedHalf)?;
    }
    Ok(curve)
}
