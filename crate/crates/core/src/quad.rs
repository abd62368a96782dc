//! Numerical quadrature: double-exponential (tanh-sinh) on finite intervals,
//! adaptive Gauss-Kronrod (7/15), Gauss-Legendre rules, and Wynn's epsilon
//! algorithm for accelerating oscillatory partial sums.

use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

const TS_MAX_LEVEL: usize = 12;
// interior nodes can be tiny next to a boundary layer; only stop early
// once the nodes sit within ~1e-14 of an endpoint
const QUIET_FROM: f64 = 3.0;

/// `∫_a^b f` by tanh-sinh quadrature, refining the step until successive
/// levels agree to `max(abs_tol, rel_tol·|I|)`.
///
/// Tolerates integrable endpoint singularities; `f` is never evaluated at
/// the endpoints themselves.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let half = 0.5 * (b - a);
    // x = a + (b−a)·σ(u), σ(u) = 1/(1+e^{−2u}), u = (π/2)·sinh(t)
    let node = |t: f64| -> Option<(f64, f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let small = e / (1.0 + e);
        if small == 0.0 {
            return None;
        }
        let cu = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cu * cu);
        let (left, right) = if u >= 0.0 {
            (b - (b - a) * small, a + (b - a) * small)
        } else {
            (a + (b - a) * small, b - (b - a) * small)
        };
        Some((left, right, w))
    };
    // both nodes at ±t; a node that rounds onto an endpoint is dropped
    let branch = |t: f64| -> Option<Complex64> {
        let (x1, x2, w) = node(t)?;
        let inside = |x: f64| x > a && x < b;
        match (inside(x1), inside(x2)) {
            (true, true) => Some((f(x1) + f(x2)) * w),
            (true, false) => Some(f(x1) * w),
            (false, true) => Some(f(x2) * w),
            (false, false) => None,
        }
    };

    let mut h = 1.0;
    let mid = f(0.5 * (a + b)) * (half * FRAC_PI_2);
    let mut sum = mid;
    let mut quiet = 0;
    let mut j = 1;
    loop {
        match branch(j as f64 * h) {
            Some(v) => {
                sum += v;
                quiet = if j as f64 * h > QUIET_FROM && v.norm() <= 1e-18 * sum.norm() { quiet + 1 } else { 0 };
                if quiet >= 3 {
                    break;
                }
            }
            None => break,
        }
        j += 1;
    }
    let mut prev = sum * h;
    let mut prev_err = f64::INFINITY;
    for _ in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        let mut j = 1;
        let mut quiet = 0;
        loop {
            match branch(j as f64 * h) {
                Some(v) => {
                    sum += v;
                    quiet = if j as f64 * h > QUIET_FROM && v.norm() <= 1e-18 * sum.norm() { quiet + 1 } else { 0 };
                    if quiet >= 3 {
                        break;
                    }
                }
                None => break,
            }
            j += 2;
        }
        let cur = sum * h;
        let err = (cur - prev).norm();
        let tol = abs_tol.max(rel_tol * cur.norm());
        if err <= tol || (err == 0.0) {
            let refined = if prev_err.is_finite() && prev_err > 0.0 {
                (err * err / prev_err).max(f64::EPSILON * cur.norm())
            } else {
                err
            };
            return Ok(Estimate { value: cur, error: refined.min(err) });
        }
        prev = cur;
        prev_err = err;
    }
    Err(Error::Quadrature { estimate: prev_err })
}

// Gauss-Kronrod 7/15 abscissae and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on `[a, b]`.
pub fn gauss_kronrod<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    let (value, error) = kronrod_15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    while total_err > abs_tol.max(rel_tol * total.norm()) {
        if heap.len() >= max_panels {
            return Err(Error::Quadrature { estimate: total_err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            return Err(Error::Quadrature { estimate: total_err });
        }
        let (v1, e1) = kronrod_15(&f, worst.a, m);
        let (v2, e2) = kronrod_15(&f, m, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
    }
    // recompute from panels to shed accumulated rounding in the running totals
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

/// Real-valued convenience wrapper around [`gauss_kronrod`].
pub fn gauss_kronrod_real<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let est = gauss_kronrod(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol, 20_000)?;
    Ok((est.value.re, est.error))
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Limit of a slowly converging sequence of partial sums by Wynn's epsilon
/// algorithm. Returns the best estimate and the size of its last change.
pub fn wynn_epsilon(partial: &[Complex64]) -> (Complex64, f64) {
    let n = partial.len();
    if n < 3 {
        let last = partial.last().copied().unwrap_or_default();
        return (last, f64::INFINITY);
    }
    // table columns: eps_{-1} = 0, eps_0 = partial sums
    let mut prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cur: Vec<Complex64> = partial.to_vec();
    let mut best = partial[n - 1];
    let mut best_change = (partial[n - 1] - partial[n - 2]).norm();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let inv = if diff.norm() == 0.0 { Complex64::new(1e300, 0.0) } else { diff.inv() };
            next.push(prev[i + 1] + inv);
        }
        col += 1;
        // even columns hold the accelerated estimates
        if col % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let change = (next[m - 1] - next[m - 2]).norm();
            if change < best_change {
                best_change = change;
                best = next[m - 1];
            }
        }
        prev = cur;
        cur = next;
    }
    (best, best_change)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let est = tanh_sinh(re(|x: f64| x.exp()), 0.0, 1.0, 1e-14, 1e-14).unwrap();
        assert!((est.value.re - (1f64.exp() - 1.0)).abs() < 1e-14);
        // ∫_0^1 x^{−3/4} = 4
        let est = tanh_sinh(re(|x: f64| x.powf(-0.75)), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((est.value.re - 4.0).abs() < 1e-11, "{}", est.value.re);
        // ∫_0^1 ln x = −1
        let est = tanh_sinh(re(|x: f64| x.ln()), 0.0, 1.0, 1e-14, 1e-14).unwrap();
        assert!((est.value.re + 1.0).abs() < 1e-13);
    }

    #[test]
    fn kronrod_oscillatory() {
        let est = gauss_kronrod(|x| Complex64::new(0.0, -x).exp(), 0.0, 20.0, 1e-13, 1e-13, 1000).unwrap();
        let want = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -20.0).exp()) / Complex64::new(0.0, 1.0);
        assert!((est.value - want).norm() < 1e-12);
        assert!(est.error < 1e-12);
    }

    #[test]
    fn kronrod_reports_failure() {
        let r = gauss_kronrod(|x| Complex64::new(1.0 / x, 0.0), 0.0, 1.0, 1e-12, 0.0, 50);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 8, 13] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-14, "n = {n}");
            // degree 2n−1 integrates exactly
            let d = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32 - 1)).sum();
            let exact = if (d - 1) % 2 == 0 { 2.0 / d as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // Σ (−1)^k/(k+1) = ln 2
        let mut s = Complex64::new(0.0, 0.0);
        let partial: Vec<Complex64> = (0..20)
            .map(|k| {
                s += Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0), 0.0);
                s
            })
            .collect();
        let (v, _) = wynn_epsilon(&partial);
        assert!((v.re - 2f64.ln()).abs() < 1e-12, "{}", v.re);
    }
}
