//! The band-gap spectral density family, its correlation function, the
//! complex constants of the Laplace-domain denominator, and Dicke rescaling.
//!
//! With `x = ω − ω₀`, `J(ω) = 2A x^α / (a² + x²)` above the edge and zero
//! below it. An ensemble of `N` atoms in the superradiant single-excitation
//! state sees the correlation function scaled by `N`, so every rotating-frame
//! quantity depends on `(α, N·A, a)` only.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReservoirParams {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub a: f64,
    pub omega0: f64,
    pub n_atoms: u64,
}

impl ReservoirParams {
    pub fn new(alpha: f64, big_a: f64, a: f64) -> Result<Self> {
        Self::with_ensemble(alpha, big_a, a, 0.0, 1)
    }

    pub fn with_ensemble(alpha: f64, big_a: f64, a: f64, omega0: f64, n_atoms: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(big_a > 0.0 && big_a.is_finite()) {
            return Err(Error::Domain(format!("A = {big_a} must be positive")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("a = {a} must be positive")));
        }
        if !(omega0 >= 0.0 && omega0.is_finite()) {
            return Err(Error::Domain(format!("omega0 = {omega0} must be nonnegative")));
        }
        if n_atoms == 0 {
            return Err(Error::Domain("n_atoms must be at least 1".into()));
        }
        Ok(Self { alpha, big_a, a, omega0, n_atoms })
    }

    /// `N·A`, the amplitude every rotating-frame solver consumes.
    pub fn effective_amplitude(&self) -> f64 {
        self.big_a * self.n_atoms as f64
    }

    /// Amplitude at which `z1` vanishes: `A* = a^{3−α} cos(πα/2) / (π N)`.
    pub fn special_amplitude(alpha: f64, a: f64, n_atoms: u64) -> f64 {
        a.powf(3.0 - alpha) * (FRAC_PI_2 * alpha).cos() / (PI * n_atoms as f64)
    }
}

/// Ensemble of `n` atoms: the same reservoir with `n_atoms = n`.
pub fn dicke_scale(params: ReservoirParams, n: u64) -> Result<ReservoirParams> {
    ReservoirParams::with_ensemble(params.alpha, params.big_a, params.a, params.omega0, n)
}

/// Single-atom spectral density at absolute frequency `omega`.
pub fn spectral_density(params: &ReservoirParams, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("frequency {omega} is negative")));
    }
    let x = omega - params.omega0;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(density_at_detuning(params, x))
}

fn density_at_detuning(params: &ReservoirParams, x: f64) -> f64 {
    2.0 * params.big_a * x.powf(params.alpha) / (params.a * params.a + x * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPeak {
    pub m_alpha: f64,
    pub omega_alpha: f64,
}

/// Location and height of the single maximum of `J`.
///
/// `dJ/dx = 0` gives `x² = α a² / (2 − α)`.
pub fn spectral_peak(params: &ReservoirParams) -> SpectralPeak {
    let al = params.alpha;
    let x = params.a * (al / (2.0 - al)).sqrt();
    let m = params.big_a * al.powf(al / 2.0) * params.a.powf(al - 2.0) * (2.0 - al).powf(1.0 - al / 2.0);
    SpectralPeak { m_alpha: m, omega_alpha: params.omega0 + x }
}

/// Coefficients of `s³ + z1·s + zα·s^α + z0`, the numerator of
/// `s + f̂(s)` over `s² − a²`, together with `f(0) = z1 + a²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub z0: Complex64,
    pub z1: Complex64,
    pub z_alpha: Complex64,
    pub f0: f64,
}

pub fn derived_constants(params: &ReservoirParams) -> DerivedConstants {
    let al = params.alpha;
    let a = params.a;
    let na = params.effective_amplitude();
    let half = FRAC_PI_2 * al;
    let f0 = PI * na * a.powf(al - 1.0) / half.cos();
    let z1 = f0 - a * a;
    if z1.abs() < 1e-12 * a * a {
        log::debug!("z1 = {z1:e} is below 1e-12·a²; relative accuracy of z1 is lost");
    }
    let z0 = Complex64::new(0.0, PI * na * a.powf(al) / half.sin());
    let z_alpha = Complex64::new(0.0, -2.0 * PI * na / (PI * al).sin()) * Complex64::from_polar(1.0, -half);
    DerivedConstants { z0, z1: Complex64::new(z1, 0.0), z_alpha, f0 }
}

/// `N · 2A · ∫₀^∞ x^α k(x) / (a² + x²) dx` for a kernel `k` that is
/// analytic and decaying in the lower half-plane, supplied through its
/// values `K(y) = k(−iy)` on the negative imaginary axis.
///
/// The contour is rotated onto `x = −iy`; the pole at `x = −ia` sits on the
/// rotated path and contributes a half residue beside a principal value.
pub fn spectral_transform<K>(params: &ReservoirParams, kernel: K, rel_tol: f64) -> Result<Complex64>
where
    K: Fn(f64) -> f64,
{
    let al = params.alpha;
    let a = params.a;
    let g = |y: f64| y.powf(al) * kernel(y) / (a + y);
    // absolute floor from the half-residue term, for kernels whose transform is tiny
    let floor = 1e-2 * rel_tol * a.powf(al - 1.0) * kernel(a).abs();
    // PV ∫₀^∞ g(y)/(a − y) dy, folded about y = a on (0, 2a)
    let near = quad::tanh_sinh(
        |u: f64| Complex64::new((g(a - u) - g(a + u)) / u, 0.0),
        0.0,
        a,
        floor,
        rel_tol,
    )?;
    let far = quad::tanh_sinh(
        |s: f64| {
            let y = 2.0 * a / s;
            if !y.is_finite() {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(g(y) * 2.0 / (s * (s - 2.0)), 0.0)
        },
        0.0,
        1.0,
        floor,
        rel_tol,
    )?;
    let pv = near.value.re + far.value.re;
    let phase = Complex64::from_polar(1.0, -FRAC_PI_2 * al);
    let body = Complex64::new(0.0, -1.0) * phase * pv + phase * (FRAC_PI_2 * a.powf(al - 1.0) * kernel(a));
    Ok(body * (2.0 * params.effective_amplitude()))
}

/// Reservoir correlation function `f(τ) = N ∫ J(ω) e^{−i(ω−ω₀)τ} dω`.
pub fn correlation(params: &ReservoirParams, tau: f64) -> Result<Complex64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("lag {tau} is negative")));
    }
    if tau == 0.0 {
        return Ok(Complex64::new(derived_constants(params).f0, 0.0));
    }
    spectral_transform(params, |y| (-y * tau).exp(), 1e-13)
}

/// The same correlation function by real-axis quadrature: an adaptive
/// panel up to a few widths, then half-period panels whose partial sums are
/// accelerated by the epsilon algorithm. Slower; kept as a reference route.
pub fn correlation_direct(params: &ReservoirParams, tau: f64) -> Result<Complex64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("direct route needs a positive lag, got {tau}")));
    }
    let integrand = |x: f64| Complex64::from_polar(density_at_detuning(params, x), -x * tau);
    let half_period = PI / tau;
    let x1 = (4.0 * params.a / half_period).ceil().max(1.0) * half_period;
    // x^α kink at the origin: resolve it on its own panel
    let x0 = x1.min(1e-3 * params.a);
    let head0 = quad::gauss_kronrod(integrand, 0.0, x0, 1e-16, 1e-14, 4000)?;
    let head = quad::gauss_kronrod(integrand, x0, x1, 1e-15, 1e-14, 4000)?;
    let mut partial = Vec::with_capacity(60);
    let mut sum = head0.value + head.value;
    let mut left = x1;
    for _ in 0..60 {
        let piece = quad::gauss_kronrod(integrand, left, left + half_period, 1e-16, 1e-14, 200)?;
        sum += piece.value;
        partial.push(sum);
        left += half_period;
    }
    let (limit, change) = quad::wynn_epsilon(&partial);
    if change > 1e-10 {
        return Err(Error::Quadrature { estimate: change });
    }
    Ok(limit * params.n_atoms as f64)
}

/// `(∫_lo^hi N J, ∫_lo^hi x N J)` over detunings `x`.
pub fn band_moments(params: &ReservoirParams, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let n = params.n_atoms as f64;
    let est = quad::gauss_kronrod(
        |x| Complex64::new(density_at_detuning(params, x), x * density_at_detuning(params, x)),
        lo,
        hi,
        1e-300,
        1e-12,
        20_000,
    )?;
    Ok((est.value.re * n, est.value.im * n))
}

/// `(∫_cap^∞ N J, ∫_cap^∞ N J / x)` over detunings above `cap`.
pub fn tail_moments(params: &ReservoirParams, cap: f64) -> Result<(f64, f64)> {
    let n = params.n_atoms as f64;
    // x = cap / s
    let est = quad::tanh_sinh(
        |s: f64| {
            // J(cap/s)·cap/s², written to stay finite as s → 0
            let (al, a) = (params.alpha, params.a);
            let w = 2.0 * params.big_a * cap.powf(al + 1.0) * s.powf(-al) / (a * a * s * s + cap * cap);
            Complex64::new(w, w * s / cap)
        },
        0.0,
        1.0,
        1e-300,
        1e-12,
    )?;
    Ok((est.value.re * n, est.value.im * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, big_a: f64, a: f64) -> ReservoirParams {
        ReservoirParams::new(alpha, big_a, a).unwrap()
    }

    #[test]
    fn density_values() {
        let p = params(0.5, 1.0, 1.0);
        assert!((spectral_density(&p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let shifted = ReservoirParams::with_ensemble(0.5, 1.0, 1.0, 3.0, 1).unwrap();
        assert_eq!(spectral_density(&shifted, 3.0).unwrap(), 0.0);
        assert_eq!(spectral_density(&shifted, 1.0).unwrap(), 0.0);
        assert!(spectral_density(&shifted, 3.0 + 1e-9).unwrap() > 0.0);
        assert!(matches!(spectral_density(&p, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn density_edge_and_tail_asymptotics() {
        for alpha in [0.25, 0.5, 0.75] {
            let p = ReservoirParams::with_ensemble(alpha, 1.3, 2.0, 0.7, 1).unwrap();
            let x = p.a * 1e-3;
            let edge = spectral_density(&p, p.omega0 + x).unwrap() / (2.0 * p.big_a / (p.a * p.a) * x.powf(alpha));
            assert!((edge - 1.0).abs() < 0.01);
            let w = p.omega0 + p.a * 1e3;
            let far = spectral_density(&p, w).unwrap() / (2.0 * p.big_a * w.powf(alpha - 2.0));
            assert!((far - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn peak_is_the_grid_maximum() {
        let p = params(0.5, 1.0, 1.0);
        let peak = spectral_peak(&p);
        assert!((peak.omega_alpha - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((peak.m_alpha - 1.139_753_528_477_388_8).abs() < 1e-12);
        let mut best = (0.0, 0.0);
        for i in 1..200_000 {
            let w = i as f64 * 1e-5;
            let j = spectral_density(&p, w).unwrap();
            if j > best.1 {
                best = (w, j);
            }
        }
        assert!((best.0 - peak.omega_alpha).abs() < 2e-5);
        assert!(peak.m_alpha >= best.1);
        assert!((spectral_density(&p, peak.omega_alpha).unwrap() - peak.m_alpha).abs() < 1e-14);
    }

    #[test]
    fn constants_at_weak_coupling() {
        let p = params(0.5, 1e-4, 1.0);
        let dc = derived_constants(&p);
        // iπA a^α csc(πα/2)
        assert!((dc.z0 - Complex64::new(0.0, 4.442_882_938_158_366e-4)).norm() < 1e-15);
        assert!((dc.z1.re + 0.999_555_711_706_184_2).abs() < 1e-14);
        assert!((dc.z_alpha - Complex64::new(-4.442_882_938_158_366e-4, -4.442_882_938_158_366e-4)).norm() < 1e-15);
        assert!((dc.f0 - dc.z1.re - 1.0).abs() < 1e-15);
        assert_eq!(dc.z1.im, 0.0);
    }

    #[test]
    fn special_amplitude_zeroes_z1() {
        for alpha in [0.25, 0.5, 0.75] {
            let a = 1.7;
            let big_a = ReservoirParams::special_amplitude(alpha, a, 1);
            let dc = derived_constants(&params(alpha, big_a, a));
            assert!(dc.z1.norm() < 1e-14 * a * a, "{}", dc.z1);
        }
    }

    #[test]
    fn zero_lag_matches_moment_quadrature() {
        for (alpha, big_a, a) in [(0.25, 1.0, 1.0), (0.5, 0.3, 2.0), (0.75, 5.0, 0.5)] {
            let p = params(alpha, big_a, a);
            let (head, _) = band_moments(&p, 0.0, 10.0 * a).unwrap();
            let (tail, _) = tail_moments(&p, 10.0 * a).unwrap();
            let f0 = derived_constants(&p).f0;
            assert!(((head + tail) / f0 - 1.0).abs() < 1e-8, "alpha {alpha}");
        }
    }

    #[test]
    fn rotated_and_direct_routes_agree() {
        for (alpha, big_a, a, tau) in [(0.5, 1.0, 1.0, 1.0), (0.25, 1.0, 1.0, 0.3), (0.75, 2.0, 0.5, 7.0)] {
            let p = params(alpha, big_a, a);
            let rot = correlation(&p, tau).unwrap();
            let dir = correlation_direct(&p, tau).unwrap();
            assert!((rot - dir).norm() < 1e-9, "alpha {alpha} tau {tau}: {rot} vs {dir}");
        }
    }

    #[test]
    fn correlation_continuous_at_zero() {
        let p = params(0.5, 1.0, 1.0);
        let f0 = derived_constants(&p).f0;
        // f(τ) − f(0) vanishes like τ^{1−α}
        let mut prev = f64::INFINITY;
        for tau in [1e-4, 1e-6, 1e-8, 1e-10] {
            let gap = (correlation(&p, tau).unwrap() - f0).norm();
            assert!(gap < prev && gap < 10.0 * f0 * tau.sqrt());
            prev = gap;
        }
    }

    #[test]
    fn correlation_is_smooth_on_fine_lags() {
        let p = params(0.5, 1.0, 1.0);
        let f0 = derived_constants(&p).f0;
        let dt = 1e-6;
        let mut prev = correlation(&p, 0.5).unwrap();
        for i in 1..20 {
            let cur = correlation(&p, 0.5 + i as f64 * dt).unwrap();
            // |f'| ≤ ∫ x J, which is finite only for α < 1; bound by f0 per unit lag times a generous scale
            assert!((cur - prev).norm() < f0 * dt * 10.0);
            prev = cur;
        }
    }

    #[test]
    fn ensemble_scaling() {
        let p = params(0.5, 1e-4, 1.0);
        assert_eq!(dicke_scale(p, 1).unwrap(), p);
        let p60 = dicke_scale(p, 60).unwrap();
        let q = params(0.5, 60.0 * 1e-4, 1.0);
        let (d1, d2) = (derived_constants(&p60), derived_constants(&q));
        assert!((d1.z0 - d2.z0).norm() < 1e-18 && (d1.z1 - d2.z1).norm() < 1e-15);
        assert!((d1.z_alpha - d2.z_alpha).norm() < 1e-17);
        let (f1, f2) = (correlation(&p60, 2.0).unwrap(), correlation(&q, 2.0).unwrap());
        assert!((f1 - f2).norm() < 1e-14);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ReservoirParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ReservoirParams::new(0.5, 0.0, 1.0).is_err());
        assert!(ReservoirParams::new(0.5, 1.0, -1.0).is_err());
        assert!(ReservoirParams::with_ensemble(0.5, 1.0, 1.0, 0.0, 0).is_err());
        assert!(correlation(&params(0.5, 1.0, 1.0), -1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn modulus_bounded_by_zero_lag(alpha in 0.05f64..0.95, big_a in 0.01f64..10.0, a in 0.2f64..5.0, tau in 0.0f64..50.0) {
                let p = ReservoirParams::new(alpha, big_a, a).unwrap();
                let f = correlation(&p, tau).unwrap();
                let f0 = derived_constants(&p).f0;
                prop_assert!(f.norm() <= f0 * (1.0 + 1e-12));
            }

            #[test]
            fn density_gap_property(omega0 in 0.0f64..10.0, w in 0.0f64..20.0) {
                let p = ReservoirParams::with_ensemble(0.5, 1.0, 1.0, omega0, 1).unwrap();
                let j = spectral_density(&p, w).unwrap();
                if w <= omega0 { prop_assert_eq!(j, 0.0); } else { prop_assert!(j > 0.0); }
            }
        }
    }
}
