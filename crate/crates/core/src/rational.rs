//! Amplitude for rational `α = p/q` as poles plus a branch-cut integral.
//!
//! With `s = z^q` the Laplace transform becomes the rational function
//! `Ĉ = (z^{2q} − a²) / Q(z)`, `Q(z) = z^{3q} + z1 z^q + zα z^p + z0`.
//! Partial fractions over the roots `ζ_l` of `Q` give
//!
//! ```text
//! C(t) = Σ_{|arg ζ_l| < π/q} Res_{s=ζ_l^q} e^{st} Ĉ  +  ∫₀^∞ e^{−ξt} K(ξ) dξ,
//! K(ξ) = ∫₀^∞ Φ(η, ξ) dη,
//! Φ(η, ξ) = Σ_l Σ_k (b_{l,k}/π) η^{m_l−k} sin(η ξ^{1/q} sin(π/q)) e^{η(ζ_l − cos(π/q) ξ^{1/q})}.
//! ```
//!
//! The η-integral converges only while `Re ζ_l < cos(π/q) ξ^{1/q}`; it is
//! done in closed form, `n!·[(γ−iβ)^{−n−1} − (γ+iβ)^{−n−1}]/(2i)`, whose
//! continuation covers the remaining roots.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad::{self, Estimate};
use crate::reservoir::{derived_constants, ReservoirParams};

const MAX_DENOMINATOR: u32 = 16;
const CLUSTER_TOL: f64 = 1e-7;
const ROOT_RESIDUAL: f64 = 1e-9;

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `α = p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalAlpha {
    pub p: u32,
    pub q: u32,
}

impl RationalAlpha {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::Domain(format!("need 0 < p < q, got {p}/{q}")));
        }
        if gcd(p, q) != 1 {
            return Err(Error::Domain(format!("{p}/{q} is not in lowest terms")));
        }
        if q > MAX_DENOMINATOR {
            return Err(Error::Domain(format!("denominator {q} exceeds {MAX_DENOMINATOR}")));
        }
        Ok(Self { p, q })
    }

    /// Smallest-denominator fraction within 1e-12 of `alpha`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        for q in 2..=MAX_DENOMINATOR {
            let p = (alpha * q as f64).round() as u32;
            if p > 0 && p < q && (p as f64 / q as f64 - alpha).abs() <= 1e-12 && gcd(p, q) == 1 {
                return Ok(Self { p, q });
            }
        }
        Err(Error::Domain(format!("alpha = {alpha} is not p/q with q ≤ {MAX_DENOMINATOR}")))
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// One distinct root of `Q` with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootGroup {
    pub zeta: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalRep {
    pub ratio: RationalAlpha,
    pub a: f64,
    pub poly: Poly,
    pub roots: Vec<RootGroup>,
    /// `b_coeffs[l][k − 1] = b_{l,k}`.
    pub b_coeffs: Vec<Vec<Complex64>>,
    pub max_residual: f64,
}

/// `Q(z) = z^{3q} + z1 z^q + zα z^p + z0`.
pub fn denominator(params: &ReservoirParams, ra: RationalAlpha) -> Poly {
    let k = derived_constants(params);
    let q = ra.q as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 3 * q + 1];
    coeffs[0] = k.z0;
    coeffs[ra.p as usize] += k.z_alpha;
    coeffs[q] += k.z1;
    coeffs[3 * q] = Complex64::new(1.0, 0.0);
    Poly::new(coeffs)
}

fn numerator(a: f64, q: u32) -> Poly {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * q as usize + 1];
    coeffs[0] = Complex64::new(-a * a, 0.0);
    coeffs[2 * q as usize] = Complex64::new(1.0, 0.0);
    Poly::new(coeffs)
}

/// Divides out `(z − r)`, dropping the remainder.
fn deflate(p: &Poly, r: Complex64) -> Poly {
    let n = p.degree();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut carry = Complex64::new(0.0, 0.0);
    for j in (1..=n).rev() {
        carry = carry * r + p.coeffs[j];
        out[j - 1] = carry;
    }
    Poly::new(out)
}

pub fn build_poly_roots(params: &ReservoirParams, ra: RationalAlpha) -> Result<RationalRep> {
    if (ra.value() - params.alpha).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "{}/{} does not match alpha = {}",
            ra.p, ra.q, params.alpha
        )));
    }
    let poly = denominator(params, ra);
    let raw = poly.roots()?;
    let max_residual = raw
        .iter()
        .map(|&z| poly.eval(z).norm() / poly.magnitude_scale(z))
        .fold(0.0f64, f64::max);
    if max_residual > ROOT_RESIDUAL {
        return Err(Error::RootQuality { residual: max_residual, bound: ROOT_RESIDUAL });
    }

    // cluster within 1e-7 relative
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &z in &raw {
        let scale = z.norm().max(1e-300);
        match groups.iter_mut().find(|g| (g[0] - z).norm() <= CLUSTER_TOL * scale) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    let num = numerator(params.a, ra.q);
    let mut roots = Vec::with_capacity(groups.len());
    let mut b_coeffs = Vec::with_capacity(groups.len());
    for g in &groups {
        let m = g.len();
        let zeta = g.iter().sum::<Complex64>() / m as f64;
        if m > 2 {
            return Err(Error::Multiplicity { zeta, multiplicity: m });
        }
        let (nv, dn) = num.eval_with_derivative(zeta);
        let removable = nv.norm() <= 1e-12 * num.magnitude_scale(zeta);
        let b = if m == 1 {
            let dq = poly.derivative().eval(zeta);
            vec![if removable { Complex64::new(0.0, 0.0) } else { nv / dq }]
        } else {
            let rest = deflate(&deflate(&poly, zeta), zeta);
            let (qv, dq) = rest.eval_with_derivative(zeta);
            // (z−ζ)² N/Q and its first derivative at ζ
            vec![nv / qv, (dn * qv - nv * dq) / (qv * qv)]
        };
        roots.push(RootGroup { zeta, multiplicity: m });
        b_coeffs.push(b);
    }
    Ok(RationalRep { ratio: ra, a: params.a, poly, roots, b_coeffs, max_residual })
}

impl RationalRep {
    pub fn b(&self, l: usize, k: usize) -> Complex64 {
        self.b_coeffs[l][k - 1]
    }

    /// Sum of the `1/(z − ζ_l)` coefficients; zero for `q ≥ 2`.
    pub fn residue_sum(&self) -> Complex64 {
        self.b_coeffs.iter().map(|b| *b.last().expect("nonempty")).sum()
    }

    /// Roots expanded by multiplicity.
    pub fn expanded_roots(&self) -> Vec<Complex64> {
        self.roots.iter().flat_map(|g| std::iter::repeat(g.zeta).take(g.multiplicity)).collect()
    }

    /// `(z^{2q} − a²)/Q(z)` reassembled from the partial fractions.
    pub fn transform_from_fractions(&self, z: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (g, b) in self.roots.iter().zip(&self.b_coeffs) {
            for (k, &bk) in b.iter().enumerate() {
                let power = (g.multiplicity - k) as i32;
                sum += bk / (z - g.zeta).powi(power);
            }
        }
        sum
    }

    /// Roots with `|arg ζ| < π/q`, the poles of `Ĉ` on the principal sheet.
    pub fn principal_poles(&self) -> Vec<usize> {
        let limit = PI / self.ratio.q as f64;
        (0..self.roots.len()).filter(|&l| self.roots[l].zeta.arg().abs() < limit).collect()
    }

    /// Residue of `e^{st}Ĉ(s)` at `s = ζ_l^q`.
    pub fn pole_term(&self, l: usize, t: f64) -> Complex64 {
        let q = self.ratio.q as i32;
        let qf = q as f64;
        let z = self.roots[l].zeta;
        let e = (z.powi(q) * t).exp();
        let jac = z.powi(q - 1) * qf;
        match self.roots[l].multiplicity {
            1 => self.b(l, 1) * jac * e,
            _ => {
                // b₁/(z−ζ)² + b₂/(z−ζ): residue of q z^{q−1} e^{z^q t} Ĉ in z
                let d = (z.powi(q - 2) * (qf * (qf - 1.0)) + z.powi(2 * q - 2) * (qf * qf * t)) * e;
                self.b(l, 1) * d + self.b(l, 2) * jac * e
            }
        }
    }

    fn lip(&self, xi: f64) -> (f64, f64) {
        let q = self.ratio.q as f64;
        let r = xi.powf(1.0 / q);
        (r * (PI / q).cos(), r * (PI / q).sin())
    }

    /// `K(ξ) = ∫₀^∞ Φ(η, ξ) dη` with the η-integral in closed form.
    pub fn cut_density(&self, xi: f64) -> Complex64 {
        if xi <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (c, beta) = self.lip(xi);
        let i = Complex64::new(0.0, 1.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for (g, b) in self.roots.iter().zip(&self.b_coeffs) {
            let gamma = Complex64::new(c, 0.0) - g.zeta;
            for (k, &bk) in b.iter().enumerate() {
                let n = (g.multiplicity - 1 - k) as i32;
                let lo = (gamma - i * beta).powi(-(n + 1));
                let hi = (gamma + i * beta).powi(-(n + 1));
                sum += bk * (lo - hi) / (2.0 * i); // n! = 1 for n ≤ 1
            }
        }
        sum / PI
    }
}

/// The integrand `Φ(η, ξ)`; an error if any contributing root is undamped
/// at this `ξ`, where the η-integral diverges.
pub fn phi_kernel(rep: &RationalRep, eta: f64, xi: f64) -> Result<Complex64> {
    if !(eta >= 0.0 && xi >= 0.0) {
        return Err(Error::Domain(format!("need eta, xi ≥ 0, got ({eta}, {xi})")));
    }
    if eta == 0.0 || xi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (c, beta) = rep.lip(xi);
    let mut sum = Complex64::new(0.0, 0.0);
    for (g, b) in rep.roots.iter().zip(&rep.b_coeffs) {
        let live = b.iter().any(|x| x.norm() > 0.0);
        if live && g.zeta.re >= c {
            return Err(Error::Divergence(format!(
                "root {} is not damped at xi = {xi} (needs Re < {c})",
                g.zeta
            )));
        }
        let wave = (eta * beta).sin() * (eta * (g.zeta - c)).exp();
        for (k, &bk) in b.iter().enumerate() {
            sum += bk * eta.powi((g.multiplicity - 1 - k) as i32) * wave;
        }
    }
    Ok(sum / PI)
}

/// `C(t)` from the pole and cut decomposition, with an error estimate.
pub fn amplitude_rational(params: &ReservoirParams, ra: RationalAlpha, t: f64) -> Result<Estimate> {
    let rep = build_poly_roots(params, ra)?;
    amplitude_from_rep(&rep, t)
}

pub fn amplitude_from_rep(rep: &RationalRep, t: f64) -> Result<Estimate> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time {t} must be finite and nonnegative")));
    }
    let poles: Complex64 = rep.principal_poles().into_iter().map(|l| rep.pole_term(l, t)).sum();
    // ξ = σ u/(1−u) with σ the typical |ζ|^q
    let sigma = rep
        .roots
        .iter()
        .map(|g| g.zeta.norm().powi(rep.ratio.q as i32))
        .fold(0.0f64, f64::max)
        .max(rep.a);
    let cut = quad::gauss_kronrod(
        |u: f64| {
            let xi = sigma * u / (1.0 - u);
            let jac = sigma / ((1.0 - u) * (1.0 - u));
            let v = rep.cut_density(xi) * ((-xi * t).exp() * jac);
            if v.re.is_finite() && v.im.is_finite() {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        0.0,
        1.0,
        1e-10,
        1e-10,
        20_000,
    )?;
    Ok(Estimate { value: poles + cut.value, error: cut.error })
}
