//! General-α amplitude as a double series of Wright-type kernels.
//!
//! Expanding `Ĉ(s) = (s² − a²) / (s(s² + z1) + zα s^α + z0)` in powers of
//! `zα s^α + z0` and inverting term by term gives
//!
//! ```text
//! C(t) = Σ_n Σ_k (−1)^n zα^k z0^(n−k) t^(3n−αk) / (k!(n−k)!)
//!        · (W_n,k(z1 t²) − a² t² W⁺_n,k(z1 t²))
//! ```
//!
//! with `W` the residue series of [`crate::specfun::wright_kernel`] and `W⁺`
//! its shifted variant. When `z1 = 0` the kernels collapse to their leading
//! terms and the series becomes an ordinary power series in `t^(1/q)`-type
//! exponents.
//!
//! Terms are generated in log-magnitude with separately tracked unit phases,
//! then summed in increasing order of the exponent `3n − αk`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::{validate_grid, DecayCurve, Method};
use crate::error::{Error, Result};
use crate::reservoir::{derived_constants, ReservoirParams};
use crate::specfun::{ln_gamma, wright_kernel_parts, WrightKernelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControls {
    pub abs_tol: f64,
    pub max_outer_terms: usize,
    /// Largest tolerated ratio of the last outer row to the running sum
    /// when the row cap is reached.
    pub horizon_guard: f64,
}

impl Default for SeriesControls {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_outer_terms: 400, horizon_guard: 1e-3 }
    }
}

impl SeriesControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain(format!("abs_tol = {} must be positive", self.abs_tol)));
        }
        if self.max_outer_terms < 10 {
            return Err(Error::Domain(format!("max_outer_terms = {} is below 10", self.max_outer_terms)));
        }
        if !(self.horizon_guard > 0.0) {
            return Err(Error::Domain("horizon_guard must be positive".into()));
        }
        Ok(())
    }
}

/// A series value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub error: f64,
}

// cancellation past this ratio leaves no correct digits
const CANCELLATION_LIMIT: f64 = 1e12;

struct Term {
    exponent: f64,
    value: Complex64,
}

struct Rows {
    terms: Vec<Term>,
    largest: f64,
    last_row: f64,
}

fn neumaier(values: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for v in values {
        let t = sum + v;
        comp.re += if sum.re.abs() >= v.re.abs() { (sum.re - t.re) + v.re } else { (v.re - t.re) + sum.re };
        comp.im += if sum.im.abs() >= v.im.abs() { (sum.im - t.im) + v.im } else { (v.im - t.im) + sum.im };
        sum = t;
    }
    sum + comp
}

/// Walks the outer rows `n = 0, 1, …`; `row_term(n, k, ln_prefactor, phase)`
/// returns `(value, magnitude scale)` of one term.
fn generate<F>(params: &ReservoirParams, t: f64, controls: &SeriesControls, mut row_term: F) -> Result<SeriesValue>
where
    F: FnMut(u32, u32, f64, Complex64) -> Result<(Complex64, f64)>,
{
    controls.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time {t} must be finite and nonnegative")));
    }
    if t == 0.0 {
        return Ok(SeriesValue { value: Complex64::new(1.0, 0.0), error: 0.0 });
    }
    let k = derived_constants(params);
    let al = params.alpha;
    let (ln_za, ln_z0, ln_t) = (k.z_alpha.norm().ln(), k.z0.norm().ln(), t.ln());
    let (unit_a, unit_0) = (k.z_alpha / k.z_alpha.norm(), k.z0 / k.z0.norm());
    let mut pow_a = vec![Complex64::new(1.0, 0.0)];
    let mut pow_0 = vec![Complex64::new(1.0, 0.0)];

    let mut rows = Rows { terms: Vec::new(), largest: 0.0, last_row: 0.0 };
    let mut quiet_rows = 0;
    let mut prev_row = f64::INFINITY;
    let mut finished = false;
    for n in 0..controls.max_outer_terms as u32 {
        if n > 0 {
            let next_a = pow_a[n as usize - 1] * unit_a;
            let next_0 = pow_0[n as usize - 1] * unit_0;
            pow_a.push(next_a);
            pow_0.push(next_0);
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut row_max = 0.0f64;
        for kk in 0..=n {
            let exponent = 3.0 * n as f64 - al * kk as f64;
            let ln_pref = kk as f64 * ln_za + (n - kk) as f64 * ln_z0 + exponent * ln_t
                - ln_gamma(kk as f64 + 1.0)
                - ln_gamma((n - kk) as f64 + 1.0);
            let phase = pow_a[kk as usize] * pow_0[(n - kk) as usize] * sign;
            let (value, scale) = row_term(n, kk, ln_pref, phase)?;
            row_max = row_max.max(value.norm());
            rows.largest = rows.largest.max(scale);
            rows.terms.push(Term { exponent, value });
        }
        rows.last_row = row_max;
        if !rows.largest.is_finite() {
            return Err(Error::Horizon { t, ratio: f64::INFINITY, partial: Complex64::new(0.0, 0.0) });
        }
        // rows shrink factorially once past their peak
        if n >= 2 && row_max < 1e-3 * controls.abs_tol && row_max <= prev_row {
            quiet_rows += 1;
            if quiet_rows >= 2 {
                finished = true;
                break;
            }
        } else {
            quiet_rows = 0;
        }
        prev_row = row_max;
    }

    rows.terms.sort_by(|x, y| x.exponent.total_cmp(&y.exponent));
    let sum = neumaier(rows.terms.iter().map(|x| x.value));
    let modulus = sum.norm().max(f64::MIN_POSITIVE);
    let ratio = rows.largest / modulus;
    if ratio > CANCELLATION_LIMIT {
        return Err(Error::Horizon { t, ratio, partial: sum });
    }
    if !finished && rows.last_row / modulus > controls.horizon_guard {
        return Err(Error::Horizon { t, ratio: rows.last_row / modulus, partial: sum });
    }
    let roundoff = 4.0 * f64::EPSILON * rows.largest * (rows.terms.len() as f64).sqrt();
    Ok(SeriesValue { value: sum, error: roundoff + if finished { 1e-3 * controls.abs_tol } else { rows.last_row } })
}

/// `C(t)` from the double Wright-kernel series.
pub fn amplitude_series(params: &ReservoirParams, t: f64, controls: &SeriesControls) -> Result<SeriesValue> {
    let k = derived_constants(params);
    let a2t2 = params.a * params.a * t * t;
    let arg = k.z1 * (t * t);
    let alpha = params.alpha;
    let floor = 1e-3 * controls.abs_tol;
    let lost = |e: Error| match e {
        Error::Overflow(_) => Error::Horizon { t, ratio: f64::INFINITY, partial: Complex64::new(0.0, 0.0) },
        other => other,
    };
    generate(params, t, controls, |n, kk, ln_pref, phase| {
        let wk = WrightKernelParams::new(n, kk, alpha)?;
        // kernel tolerance in normalized units, so the scaled term meets `floor`
        let (ln_u, su) = wright_kernel_parts(wk, false, arg, |lead, s| f64::max((floor / 4.0) * (-ln_pref).exp() / lead, 1e-16 * s)).map_err(lost)?;
        let ln_scale = ln_pref + ln_u;
        // shifted kernel lead relative to the unshifted one: 1/(c(c+1))
        let c = wk.base(false);
        let shift = a2t2 / (c * (c + 1.0));
        let (_, ss) = wright_kernel_parts(wk, true, arg, |_, s| {
            f64::max((floor / 4.0) * (-ln_scale).exp() / shift.max(f64::MIN_POSITIVE), 1e-16 * s)
        })
        .map_err(lost)?;
        let unit = su.sum - ss.sum * shift;
        let mag = ln_scale.exp();
        let value = phase * unit * mag;
        let scale = mag * su.largest.max(ss.largest * shift);
        Ok((if value.re.is_finite() && value.im.is_finite() { value } else { Complex64::new(0.0, 0.0) }, scale))
    })
}

/// `C(t)` from the power series valid when `z1 = 0`.
pub fn amplitude_series_z1zero(params: &ReservoirParams, t: f64, controls: &SeriesControls) -> Result<SeriesValue> {
    let k = derived_constants(params);
    let a2 = params.a * params.a;
    if !(k.z1.norm() <= 1e-10 * a2) {
        return Err(Error::Precondition(format!(
            "z1 = {:e} is not zero; the power series needs A = A*",
            k.z1.re
        )));
    }
    let al = params.alpha;
    generate(params, t, controls, |n, kk, ln_pref, phase| {
        let c = 1.0 + 3.0 * n as f64 - al * kk as f64;
        let ln_mag = ln_pref + ln_gamma(n as f64 + 1.0) - ln_gamma(c);
        let mag = ln_mag.exp();
        let factor = 1.0 - a2 * t * t / (c * (c + 1.0));
        let value = phase * (mag * factor);
        Ok((value, mag * factor.abs().max(1.0)))
    })
}

/// `|C|²` on a grid from the general series. Points past the series
/// horizon are left out with a warning; the stitched evaluator in
/// [`crate::asymptotics`] covers them instead.
pub fn population_series(params: &ReservoirParams, grid: &[f64], controls: &SeriesControls) -> Result<DecayCurve> {
    validate_grid(grid)?;
    let values: Vec<Result<SeriesValue>> = grid.par_iter().map(|&t| amplitude_series(params, t, controls)).collect();
    let mut curve = DecayCurve::new(*params);
    for (&t, v) in grid.iter().zip(values) {
        match v {
            Ok(v) => curve.push(t, v.value, Method::Series)?,
            Err(Error::Horizon { ratio, .. }) => {
                log::warn!("t = {t}: beyond the series horizon (ratio {ratio:.3e}); point omitted");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(curve)
}
