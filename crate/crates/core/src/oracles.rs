//! Reference solvers that share nothing with the analytic paths beyond the
//! reservoir definition.
//!
//! The Volterra solver integrates `Ċ = −(f ∗ C)` once,
//! `C(t) = 1 − ∫₀^t F(t−τ) C(τ) dτ` with `F(u) = ∫₀^u f`, and applies product
//! integration: `C` is piecewise linear (order 2) or piecewise constant
//! (order 1) and each basis function is integrated exactly against `F`.
//! The weights are spectral integrals of `J` evaluated on the rotated
//! contour, so `f` itself is never sampled.
//!
//! The mode solver re-discretizes the continuum into cells, one mode per
//! cell, and evolves the single-excitation amplitudes with Crank-Nicolson.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::{DecayCurve, Method};
use crate::error::{Error, Result};
use crate::reservoir::{band_moments, derived_constants, spectral_transform, tail_moments, ReservoirParams};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeOrder {
    /// Piecewise-constant `C`, explicit.
    One,
    /// Piecewise-linear `C`.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraConfig {
    pub dt: f64,
    pub t_max: f64,
    pub scheme_order: SchemeOrder,
}

impl VolterraConfig {
    pub fn new(dt: f64, t_max: f64) -> Self {
        Self { dt, t_max, scheme_order: SchemeOrder::Two }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_max > 0.0 && self.dt <= self.t_max && self.t_max.is_finite()) {
            return Err(Error::Domain(format!("need 0 < dt ≤ t_max, got dt = {}, t_max = {}", self.dt, self.t_max)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }
}

/// Exact cell integrals of `F(u) = ∫₀^u f` against the basis functions.
pub trait MemoryKernel: Sync {
    /// `f(0)`.
    fn f0(&self) -> f64;
    /// `∫_{(m−1)h}^{mh} F(s) ds`.
    fn box_weight(&self, m: usize, h: f64) -> Result<Complex64>;
    /// `∫_{−h}^{h} (1 − |s|/h) F(mh − s) ds`, `m ≥ 1`.
    fn hat_weight(&self, m: usize, h: f64) -> Result<Complex64>;
    /// `∫₀^h (1 − s/h) F(s) ds`.
    fn start_weight(&self, h: f64) -> Result<Complex64>;
    /// `∫₀^h (1 − τ/h) F(nh − τ) dτ`.
    fn end_weight(&self, n: usize, h: f64) -> Result<Complex64>;
}

/// `f ≡ c`, for which `C(t) = cos(√c t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantKernel {
    pub c: f64,
}

impl MemoryKernel for ConstantKernel {
    fn f0(&self) -> f64 {
        self.c
    }
    fn box_weight(&self, m: usize, h: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.c * h * h * (2.0 * m as f64 - 1.0) / 2.0, 0.0))
    }
    fn hat_weight(&self, m: usize, h: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.c * m as f64 * h * h, 0.0))
    }
    fn start_weight(&self, h: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.c * h * h / 6.0, 0.0))
    }
    fn end_weight(&self, n: usize, h: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.c * h * h * (n as f64 / 2.0 - 1.0 / 6.0), 0.0))
    }
}

/// The band-gap reservoir correlation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirKernel {
    pub params: ReservoirParams,
}

// ln(sinh(w)/w)
fn ln_sinhc(w: f64) -> f64 {
    if w < 1e-4 {
        w * w / 6.0 - w.powi(4) / 180.0
    } else if w < 20.0 {
        (w.sinh() / w).ln()
    } else {
        w - (2.0 * w).ln() + (-(-2.0 * w).exp()).ln_1p()
    }
}

// 1/2 − (z − 1 + e^{−z})/z²
fn half_minus_psi(z: f64) -> f64 {
    if z < 0.1 {
        z / 6.0 - z * z / 24.0 + z.powi(3) / 120.0 - z.powi(4) / 720.0 + z.powi(5) / 5040.0 - z.powi(6) / 40320.0
    } else {
        0.5 - (z - 1.0 + (-z).exp()) / (z * z)
    }
}

// 1/2 − (1 − e^{−z} − z e^{−z})/z²
fn half_minus_chi(z: f64) -> f64 {
    if z < 0.1 {
        z / 3.0 - z * z / 8.0 + z.powi(3) / 30.0 - z.powi(4) / 144.0 + z.powi(5) / 840.0 - z.powi(6) / 5760.0
    } else {
        0.5 - (1.0 - (-z).exp() - z * (-z).exp()) / (z * z)
    }
}

impl MemoryKernel for ReservoirKernel {
    fn f0(&self) -> f64 {
        derived_constants(&self.params).f0
    }

    fn box_weight(&self, m: usize, h: f64) -> Result<Complex64> {
        let mf = m as f64;
        spectral_transform(
            &self.params,
            |y| {
                let z = y * h;
                // 1 − e^{−z(m−1)}(1 − e^{−z})/z
                let ln_rest = -z * (mf - 1.0) + (-(-z).exp_m1() / z).ln();
                -h * ln_rest.exp_m1() / y
            },
            WEIGHT_TOL,
        )
    }

    fn hat_weight(&self, m: usize, h: f64) -> Result<Complex64> {
        let mf = m as f64;
        spectral_transform(
            &self.params,
            |y| {
                let z = y * h;
                let ln_l = -z * mf + 2.0 * ln_sinhc(z / 2.0);
                -h * ln_l.exp_m1() / y
            },
            WEIGHT_TOL,
        )
    }

    fn start_weight(&self, h: f64) -> Result<Complex64> {
        spectral_transform(&self.params, |y| h * half_minus_psi(y * h) / y, WEIGHT_TOL)
    }

    fn end_weight(&self, n: usize, h: f64) -> Result<Complex64> {
        let nf = n as f64;
        spectral_transform(
            &self.params,
            |y| {
                let z = y * h;
                let w = z * (nf - 1.0);
                // 1/2 − e^{−w}χ(z) = (1 − e^{−w})/2 + e^{−w}(1/2 − χ(z))
                h * (-0.5 * (-w).exp_m1() + (-w).exp() * half_minus_chi(z)) / y
            },
            WEIGHT_TOL,
        )
    }
}

/// Amplitude samples `C(jh)`, `j = 0..=n`, for an arbitrary kernel.
pub fn volterra_with_kernel<K: MemoryKernel>(kernel: &K, config: &VolterraConfig) -> Result<Vec<(f64, Complex64)>> {
    config.validate()?;
    let h = config.dt;
    let n = config.steps();
    if h * kernel.f0().sqrt() > 0.1 {
        log::warn!("dt·√f0 = {:.3} exceeds 0.1; the solution may be under-resolved", h * kernel.f0().sqrt());
    }
    let one = Complex64::new(1.0, 0.0);
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[0] = one;
    match config.scheme_order {
        SchemeOrder::One => {
            let boxes: Vec<Complex64> = (1..=n).into_par_iter().map(|m| kernel.box_weight(m, h)).collect::<Result<_>>()?;
            for step in 1..=n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..step {
                    acc += boxes[step - j - 1] * c[j];
                }
                c[step] = one - acc;
                check_bound(step as f64 * h, c[step])?;
            }
        }
        SchemeOrder::Two => {
            let start = kernel.start_weight(h)?;
            let hats: Vec<Complex64> = (1..n).into_par_iter().map(|m| kernel.hat_weight(m, h)).collect::<Result<_>>()?;
            let ends: Vec<Complex64> = (1..=n).into_par_iter().map(|k| kernel.end_weight(k, h)).collect::<Result<_>>()?;
            let diag = one + start;
            for step in 1..=n {
                let mut acc = ends[step - 1] * c[0];
                for j in 1..step {
                    acc += hats[step - j - 1] * c[j];
                }
                c[step] = (one - acc) / diag;
                check_bound(step as f64 * h, c[step])?;
            }
        }
    }
    Ok(c.into_iter().enumerate().map(|(j, v)| (j as f64 * h, v)).collect())
}

fn check_bound(t: f64, c: Complex64) -> Result<()> {
    if !(c.norm() <= 1.0 + 1e-3) {
        return Err(Error::Instability { t, modulus: c.norm() });
    }
    Ok(())
}

/// `C` on the uniform grid `0, dt, …, t_max` by product integration.
pub fn volterra_solve(params: &ReservoirParams, config: &VolterraConfig) -> Result<DecayCurve> {
    let samples = volterra_with_kernel(&ReservoirKernel { params: *params }, config)?;
    let mut curve = DecayCurve::new(*params);
    for (t, c) in samples {
        curve.push(t, c, Method::Volterra)?;
    }
    Ok(curve)
}

/// Discrete reservoir: detunings `ω_k − ω₀` and couplings `g_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    /// `∫_cap^∞ N J`, the coupling weight left out above the cap.
    pub tail_mass: f64,
    /// `∫_cap^∞ N J / x`, which bounds the drift of `C` caused by the cap.
    pub tail_inverse_moment: f64,
}

impl ModeGrid {
    /// One mode at the given detuning.
    pub fn single(coupling: f64, detuning: f64) -> Self {
        Self { frequencies: vec![detuning], couplings: vec![coupling], tail_mass: 0.0, tail_inverse_moment: 0.0 }
    }

    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }
}

/// Cells geometric in `[a·1e-4, a]`, linear in `[a, cap]`, plus `[0, a·1e-4]`;
/// each carries `g² = ∫_cell N J` at its spectral centroid.
pub fn mode_discretize(params: &ReservoirParams, count: usize, omega_cap: f64) -> Result<ModeGrid> {
    if count < 10 {
        return Err(Error::Domain(format!("count = {count} is below 10")));
    }
    let a = params.a;
    if !(omega_cap > a) {
        return Err(Error::Domain(format!("omega_cap = {omega_cap} must exceed a = {a}")));
    }
    let n_geo = count / 4;
    let n_lin = count - n_geo - 1;
    let x0 = 1e-4 * a;
    let mut edges = vec![0.0, x0];
    let ratio = (a / x0).powf(1.0 / n_geo as f64);
    for j in 1..=n_geo {
        edges.push(if j == n_geo { a } else { x0 * ratio.powi(j as i32) });
    }
    for j in 1..=n_lin {
        edges.push(a + (omega_cap - a) * j as f64 / n_lin as f64);
    }
    let cells: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let moments: Vec<(f64, f64)> = cells.par_iter().map(|&(lo, hi)| band_moments(params, lo, hi)).collect::<Result<_>>()?;
    let mut frequencies = Vec::with_capacity(cells.len());
    let mut couplings = Vec::with_capacity(cells.len());
    for (&(lo, hi), &(m0, m1)) in cells.iter().zip(&moments) {
        frequencies.push(if m0 > 0.0 { m1 / m0 } else { 0.5 * (lo + hi) });
        couplings.push(m0.max(0.0).sqrt());
    }
    let (tail_mass, tail_inverse_moment) = tail_moments(params, omega_cap)?;
    let f0 = derived_constants(params).f0;
    if tail_mass > 1e-4 * f0 {
        log::warn!("cap {omega_cap} leaves {:.3e} of f0 in the tail", tail_mass / f0);
    }
    Ok(ModeGrid { frequencies, couplings, tail_mass, tail_inverse_moment })
}

/// Amplitudes of the atom and of every mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAmplitudes {
    pub c: Complex64,
    pub lambdas: Vec<Complex64>,
}

impl ModeAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.c.norm_sqr() + self.lambdas.iter().map(|l| l.norm_sqr()).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeRun {
    pub samples: Vec<(f64, Complex64)>,
    pub max_unitarity_defect: f64,
    pub final_state: ModeAmplitudes,
}

impl ModeRun {
    pub fn to_curve(&self, params: &ReservoirParams) -> Result<DecayCurve> {
        let mut curve = DecayCurve::new(*params);
        for &(t, c) in &self.samples {
            curve.push(t, c, Method::Modes)?;
        }
        Ok(curve)
    }
}

/// Crank-Nicolson evolution of `i ψ̇ = H ψ` with `H` the arrow matrix
/// `[[0, g], [g, diag(ω)]]`, from `C = 1`.
pub fn mode_evolve(grid: &ModeGrid, t_max: f64, dt: f64) -> Result<ModeRun> {
    if grid.frequencies.len() != grid.couplings.len() || grid.frequencies.is_empty() {
        return Err(Error::Domain("mode grid needs equal, nonempty frequency and coupling lists".into()));
    }
    if !(dt > 0.0 && t_max > 0.0 && dt <= t_max) {
        return Err(Error::Domain(format!("need 0 < dt ≤ t_max, got dt = {dt}, t_max = {t_max}")));
    }
    let wmax = grid.frequencies.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if dt * wmax > 0.1 {
        return Err(Error::Resolution(format!("dt·max|ω| = {:.3} exceeds 0.1", dt * wmax)));
    }
    let steps = (t_max / dt).round() as usize;
    let tau = 0.5 * dt;
    let i = Complex64::new(0.0, 1.0);
    let g = &grid.couplings;
    let w = &grid.frequencies;
    // per-mode factors of the implicit half step
    let inv: Vec<Complex64> = w.iter().map(|&wk| (Complex64::new(1.0, tau * wk)).inv()).collect();
    let schur = Complex64::new(1.0, 0.0) + g.iter().zip(&inv).map(|(&gk, &d)| d * (tau * tau * gk * gk)).sum::<Complex64>();

    let mut c = Complex64::new(1.0, 0.0);
    let mut lam = vec![Complex64::new(0.0, 0.0); w.len()];
    let mut rhs = vec![Complex64::new(0.0, 0.0); w.len()];
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, c));
    let mut worst = 0.0f64;
    for step in 1..=steps {
        // r = (1 − iτH) ψ
        let coupled: Complex64 = g.iter().zip(&lam).map(|(&gk, &l)| l * gk).sum();
        let r0 = c - i * tau * coupled;
        for k in 0..w.len() {
            rhs[k] = lam[k] - i * tau * (c * g[k] + lam[k] * w[k]);
        }
        let mixed: Complex64 = g.iter().zip(&rhs).zip(&inv).map(|((&gk, &r), &d)| r * d * gk).sum();
        c = (r0 - i * tau * mixed) / schur;
        for k in 0..w.len() {
            lam[k] = (rhs[k] - i * tau * g[k] * c) * inv[k];
        }
        let norm = c.norm_sqr() + lam.iter().map(|l| l.norm_sqr()).sum::<f64>();
        worst = worst.max((norm - 1.0).abs());
        samples.push((step as f64 * dt, c));
    }
    Ok(ModeRun { samples, max_unitarity_defect: worst, final_state: ModeAmplitudes { c, lambdas: lam } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_half::amplitude_half;

    fn params(alpha: f64, big_a: f64, a: f64) -> ReservoirParams {
        ReservoirParams::new(alpha, big_a, a).unwrap()
    }

    #[test]
    fn constant_kernel_gives_cosine() {
        let cfg = VolterraConfig::new(1e-3, std::f64::consts::PI);
        let out = volterra_with_kernel(&ConstantKernel { c: 1.0 }, &cfg).unwrap();
        let (t, c) = *out.last().unwrap();
        assert!((t - std::f64::consts::PI).abs() < 1e-3);
        assert!((c.re - t.cos()).abs() < 1e-5, "{c}");
        let first = VolterraConfig { scheme_order: SchemeOrder::One, ..cfg };
        let out1 = volterra_with_kernel(&ConstantKernel { c: 1.0 }, &first).unwrap();
        assert!((out1.last().unwrap().1.re + 1.0).abs() < 1e-2);
    }

    #[test]
    fn short_cells_see_a_flat_kernel() {
        // the reservoir weights are spectral averages of the constant ones
        let p = params(0.5, 1.0, 1.0);
        let k = ReservoirKernel { params: p };
        let h = 1e-6;
        let f0 = k.f0();
        let flat = ConstantKernel { c: f0 };
        for m in [1usize, 2, 5] {
            let got = k.hat_weight(m, h).unwrap();
            let want = flat.hat_weight(m, h).unwrap();
            assert!((got - want).norm() < 0.05 * want.norm(), "m {m}: {got} vs {want}");
        }
        let s = k.start_weight(h).unwrap();
        assert!((s - flat.start_weight(h).unwrap()).norm() < 0.05 * s.norm());
        let e = k.end_weight(3, h).unwrap();
        assert!((e - flat.end_weight(3, h).unwrap()).norm() < 0.05 * e.norm());
    }

    #[test]
    fn weights_sum_to_double_integral() {
        // Σ of all hat weights at step n equals ∫₀^{nh} F
        let p = params(0.25, 1.0, 1.0);
        let k = ReservoirKernel { params: p };
        let h = 0.05;
        let n = 6;
        let mut total = k.start_weight(h).unwrap() + k.end_weight(n, h).unwrap();
        for m in 1..n {
            total += k.hat_weight(m, h).unwrap();
        }
        let boxes: Complex64 = (1..=n).map(|m| k.box_weight(m, h).unwrap()).sum();
        assert!((total - boxes).norm() < 1e-10 * boxes.norm(), "{total} vs {boxes}");
    }

    #[test]
    fn starts_at_one_and_tracks_closed_form() {
        let p = params(0.5, 1.0, 1.0);
        let curve = volterra_solve(&p, &VolterraConfig::new(1e-3, 2.0)).unwrap();
        assert_eq!(curve.samples[0].c, Complex64::new(1.0, 0.0));
        for s in curve.samples.iter().step_by(250) {
            let h = amplitude_half(&p, s.t).unwrap();
            assert!((s.c - h).norm() < 1e-5, "t {}: {} vs {h}", s.t, s.c);
        }
    }

    #[test]
    fn richardson_ratio() {
        let p = params(0.5, 1.0, 1.0);
        let t = 1.0;
        let exact = amplitude_half(&p, t).unwrap();
        let err = |dt: f64| {
            let c = volterra_solve(&p, &VolterraConfig::new(dt, t)).unwrap();
            (c.samples.last().unwrap().c - exact).norm()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn single_mode_rabi() {
        let grid = ModeGrid::single(2.0, 0.0);
        let run = mode_evolve(&grid, 3.0, 1e-4).unwrap();
        for &(t, c) in run.samples.iter().step_by(1000) {
            assert!((c.re - (2.0 * t).cos()).abs() < 1e-6 && c.im.abs() < 1e-12, "t {t}: {c}");
        }
        assert!(run.max_unitarity_defect < 1e-10);
        assert_eq!(run.samples[0].1, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn discretization_reproduces_band_weight() {
        let p = params(0.5, 1.0, 1.0);
        let grid = mode_discretize(&p, 4000, 200.0).unwrap();
        assert_eq!(grid.frequencies.len(), 4000);
        let f0 = derived_constants(&p).f0;
        let inside = f0 - grid.tail_mass;
        assert!((grid.total_weight() / inside - 1.0).abs() < 1e-6);
        // the J ~ x^{α−2} tail is heavy: about 4/√200 for these parameters
        assert!((grid.tail_mass - 4.0 / 200f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn resolution_precondition() {
        let grid = ModeGrid::single(1.0, 100.0);
        assert!(matches!(mode_evolve(&grid, 1.0, 0.01), Err(Error::Resolution(_))));
    }

    #[test]
    fn modes_follow_volterra() {
        let p = params(0.5, 1.0, 1.0);
        let grid = mode_discretize(&p, 2000, 100.0).unwrap();
        let run = mode_evolve(&grid, 2.0, 5e-4).unwrap();
        assert!(run.max_unitarity_defect < 1e-8);
        let bound = (2.0 * 2.0 * grid.tail_inverse_moment).max(1e-4);
        for &(t, c) in run.samples.iter().step_by(400) {
            let h = amplitude_half(&p, t).unwrap();
            assert!((c - h).norm() < bound, "t {t}: {c} vs {h} (bound {bound})");
        }
    }
}
