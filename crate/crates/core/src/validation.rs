//! The fixed cross-method acceptance suite.
//!
//! Each `criterion_*` function runs one group of checks and returns its
//! cases; [`run_suite`] runs them all. Deviations are absolute unless the
//! case name says `rel`.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::{critical_n, decay_factor, law_root_based};
use crate::closed_half::{population_half, HalfSolution};
use crate::error::Result;
use crate::oracles::{mode_discretize, mode_evolve, volterra_solve, VolterraConfig};
use crate::quad;
use crate::rational::{amplitude_from_rep, build_poly_roots, RationalAlpha};
use crate::reservoir::{derived_constants, ReservoirParams};
use crate::series::{amplitude_series, amplitude_series_z1zero, SeriesControls};
use crate::specfun::{scaled_upper_gamma_half, wright_kernel, WrightKernelParams};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub criterion: u8,
    pub name: String,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Case {
    fn new(criterion: u8, name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self { criterion, name: name.into(), max_abs_deviation: deviation, tolerance, passed: deviation <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub cases: Vec<Case>,
    pub overall_passed: bool,
    /// Diagnostics that are reported but not judged.
    pub notes: Vec<String>,
}

impl ValidationReport {
    fn from_parts(cases: Vec<Case>, notes: Vec<String>) -> Self {
        let overall_passed = cases.iter().all(|c| c.passed);
        Self { cases, overall_passed, notes }
    }

    pub fn criterion_passed(&self, id: u8) -> bool {
        self.cases.iter().filter(|c| c.criterion == id).all(|c| c.passed)
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub cases: Vec<Case>,
    pub notes: Vec<String>,
    /// Largest `|C|` seen in the solver runs of this criterion.
    pub max_modulus: f64,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }
}

pub const TITLES: [&str; 10] = [
    "critical ensemble size",
    "root-based time scales, ensembles at A = 1e-4",
    "root-based time scales, single atom at a = 1",
    "closed form against Volterra and series",
    "general alpha: series against Volterra",
    "inverse power law at alpha = 1/2",
    "short-time quadratic law",
    "unitarity and amplitude bounds",
    "special-function identities",
    "rational representation at alpha = 1/2",
];

fn half(big_a: f64, n: u64) -> ReservoirParams {
    ReservoirParams::with_ensemble(0.5, big_a, 1.0, 0.0, n).expect("valid parameters")
}

fn rel(x: f64, want: f64) -> f64 {
    (x - want).abs() / want.abs()
}

fn failed_case(criterion: u8, name: &str, err: &Error) -> Case {
    let mut c = Case::new(criterion, format!("{name}: {err}"), f64::INFINITY, 0.0);
    c.passed = false;
    c
}

pub fn criterion_1() -> CriterionOutcome {
    let start = Instant::now();
    let n = critical_n(&half(1e-4, 1));
    let ms = start.elapsed().as_secs_f64() * 1e3;
    CriterionOutcome {
        cases: vec![
            Case::new(1, format!("N* = {n} (expected 3591)"), (n as f64 - 3591.0).abs(), 0.0),
            Case::new(1, "runtime ms", ms, 1.0),
        ],
        notes: vec![],
        max_modulus: 0.0,
    }
}

pub fn criterion_2() -> CriterionOutcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    for (n, want) in [(3u64, 789.0), (12, 206.9), (60, 46.1)] {
        match law_root_based(&half(1e-4, n)) {
            Ok(law) => cases.push(Case::new(2, format!("N = {n}: tau = {:.4} vs {want} rel", law.tau), rel(law.tau, want), 5e-3)),
            Err(e) => cases.push(failed_case(2, &format!("N = {n}"), &e)),
        }
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    cases.push(Case::new(2, "runtime ms", ms, 10.0));
    CriterionOutcome { cases, notes: vec![], max_modulus: 0.0 }
}

pub fn criterion_3() -> CriterionOutcome {
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let sets = [(1.0, 0.84, "A = 1"), (100.0, 0.06, "A = 100"), (0.5f64.powf(2.5), 1.40, "A = (1/2)^(5/2)"), (1e-3f64.powf(2.5), 7121.40, "A = (1/1000)^(5/2)")];
    for (big_a, want, label) in sets {
        match law_root_based(&half(big_a, 1)) {
            Ok(law) => {
                cases.push(Case::new(3, format!("{label}: tau = {:.6} vs {want} rel", law.tau), rel(law.tau, want), 1e-2));
            }
            Err(e) => cases.push(failed_case(3, label, &e)),
        }
    }
    // the last two reference values are τ at A = 1 with a = 2 and a = 1000
    for (a, want) in [(2.0, 1.40), (1000.0, 7121.40)] {
        if let Ok(p) = ReservoirParams::new(0.5, 1.0, a) {
            if let Ok(law) = law_root_based(&p) {
                notes.push(format!("a = {a}, A = 1: tau = {:.4} (reference {want})", law.tau));
            }
        }
    }
    CriterionOutcome { cases, notes, max_modulus: 0.0 }
}

pub fn criterion_4() -> CriterionOutcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let mut max_modulus = 0.0f64;
    let controls = SeriesControls::default();
    for big_a in [1e-4, 1.0, 100.0] {
        let p = half(big_a, 1);
        let sol = match HalfSolution::new(&p) {
            Ok(s) => s,
            Err(e) => {
                cases.push(failed_case(4, &format!("A = {big_a}"), &e));
                continue;
            }
        };
        let span = f64::min(2.0, 2.0 * sol.onset_time());
        let dt = 1e-4 * span / 2.0;
        match volterra_solve(&p, &VolterraConfig::new(dt, span)) {
            Ok(curve) => {
                max_modulus = max_modulus.max(curve.max_modulus());
                let mut worst = 0.0f64;
                for s in &curve.samples {
                    let exact = sol.amplitude(s.t).map(|c| c.norm_sqr()).unwrap_or(f64::NAN);
                    worst = worst.max((s.p - exact).abs());
                    max_modulus = max_modulus.max(exact.sqrt());
                }
                cases.push(Case::new(4, format!("A = {big_a}: closed vs Volterra on [0, {span:.4}]"), worst, 1e-5));
            }
            Err(e) => cases.push(failed_case(4, &format!("A = {big_a} Volterra"), &e)),
        }
        let mut worst = 0.0f64;
        let mut beyond = 0;
        for j in 0..=200 {
            let t = span * j as f64 / 200.0;
            match amplitude_series(&p, t, &controls) {
                Ok(v) => {
                    max_modulus = max_modulus.max(v.value.norm());
                    let exact = sol.amplitude(t).map(|c| c.norm_sqr()).unwrap_or(f64::NAN);
                    worst = worst.max((v.value.norm_sqr() - exact).abs());
                }
                Err(Error::Horizon { .. }) => beyond += 1,
                Err(e) => {
                    worst = f64::INFINITY;
                    notes.push(format!("A = {big_a}: series failed at t = {t}: {e}"));
                }
            }
        }
        if beyond > 0 {
            notes.push(format!("A = {big_a}: {beyond} of 201 points beyond the series horizon"));
        }
        cases.push(Case::new(4, format!("A = {big_a}: closed vs series"), worst, 1e-6));
    }
    cases.push(Case::new(4, "runtime s", start.elapsed().as_secs_f64(), 60.0));
    CriterionOutcome { cases, notes, max_modulus }
}

pub fn criterion_5() -> CriterionOutcome {
    let start = Instant::now();
    let mut cases = Vec::new();
    let mut max_modulus = 0.0f64;
    let controls = SeriesControls::default();
    for al in [0.25, 0.75] {
        let p = ReservoirParams::new(al, 1.0, 1.0).expect("valid parameters");
        match volterra_solve(&p, &VolterraConfig::new(1e-4, 1.0)) {
            Ok(curve) => {
                max_modulus = max_modulus.max(curve.max_modulus());
                let mut worst = 0.0f64;
                for s in curve.samples.iter().step_by(50) {
                    match amplitude_series(&p, s.t, &controls) {
                        Ok(v) => {
                            max_modulus = max_modulus.max(v.value.norm());
                            worst = worst.max((v.value.norm_sqr() - s.p).abs());
                        }
                        Err(_) => worst = f64::INFINITY,
                    }
                }
                cases.push(Case::new(5, format!("alpha = {al}: series vs Volterra on [0, 1]"), worst, 1e-5));
            }
            Err(e) => cases.push(failed_case(5, &format!("alpha = {al}"), &e)),
        }
    }
    let al = 0.75;
    let special = ReservoirParams::new(al, ReservoirParams::special_amplitude(al, 1.0, 1), 1.0).expect("valid parameters");
    let mut worst = 0.0f64;
    for j in 0..=30 {
        let t = 0.1 * j as f64;
        match (amplitude_series(&special, t, &controls), amplitude_series_z1zero(&special, t, &controls)) {
            (Ok(g), Ok(z)) => worst = worst.max((g.value - z.value).norm()),
            _ => worst = f64::INFINITY,
        }
    }
    cases.push(Case::new(5, "alpha = 0.75, A = A*: z1 = 0 series vs general series on [0, 3]", worst, 1e-10));
    cases.push(Case::new(5, "runtime s", start.elapsed().as_secs_f64(), 60.0));
    CriterionOutcome { cases, notes: vec![], max_modulus }
}

/// Least-squares slope and intercept of `ln y` against `ln t`.
pub fn log_log_fit(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ls.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn criterion_6() -> CriterionOutcome {
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let p = half(1.0, 1);
    let mut run = || -> Result<()> {
        let sol = HalfSolution::new(&p)?;
        let law = law_root_based(&p)?;
        let ts: Vec<f64> = (0..40).map(|j| law.tau * 10f64.powf(2.0 + 2.0 * j as f64 / 39.0)).collect();
        let curve = population_half(&p, &ts)?;
        let (slope, icpt) = log_log_fit(&ts, &curve.populations());
        cases.push(Case::new(6, format!("A = 1: slope of P = {slope:.4}"), (slope + 3.0).abs(), 0.05));
        cases.push(Case::new(6, format!("A = 1: intercept {:.4e} vs zeta {:.4e} rel", icpt.exp(), law.zeta), rel(icpt.exp(), law.zeta), 0.05));
        let rad: Vec<f64> = ts.iter().map(|&t| sol.radiative_part(t).map(|c| c.norm_sqr())).collect::<Result<_>>()?;
        let (rs, ri) = log_log_fit(&ts, &rad);
        notes.push(format!(
            "A = 1: radiative part alone has slope {rs:.4}, intercept/zeta = {:.4}; trapped population {:.6}",
            ri.exp() / law.zeta,
            sol.trapped_population()
        ));
        Ok(())
    };
    if let Err(e) = run() {
        cases.push(failed_case(6, "power law", &e));
    }
    let mut worst = 0.0f64;
    for scale in [1e-4, 1e-2, 1.0, 1e2] {
        let q = half(scale, 1);
        match law_root_based(&q) {
            Ok(law) => {
                let other = decay_factor(&q);
                worst = worst.max(rel(law.zeta, other));
                notes.push(format!("A = {scale}: zeta root-based {:.6e}, closed formula {:.6e}, ratio {:.6}", law.zeta, other, other / law.zeta));
            }
            Err(e) => cases.push(failed_case(6, &format!("zeta A = {scale}"), &e)),
        }
    }
    cases.push(Case::new(6, "zeta routes agree rel", worst, 1e-6));
    CriterionOutcome { cases, notes, max_modulus: 0.0 }
}

/// Least squares for `y ≈ Σ_j c_j t^{e_j}` by modified Gram-Schmidt.
pub fn power_fit(ts: &[f64], ys: &[f64], exponents: &[f64]) -> Vec<f64> {
    let k = exponents.len();
    let mut cols: Vec<Vec<f64>> = exponents.iter().map(|&e| ts.iter().map(|t| t.powf(e)).collect()).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    for (c, &n) in cols.iter_mut().zip(&norms) {
        c.iter_mut().for_each(|v| *v /= n);
    }
    let mut r = vec![vec![0.0; k]; k];
    let mut q = cols.clone();
    for j in 0..k {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            q[j].iter_mut().zip(&qi).for_each(|(v, w)| *v -= d * w);
        }
        let nn = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[j][j] = nn;
        q[j].iter_mut().for_each(|v| *v /= nn);
    }
    let rhs: Vec<f64> = (0..k).map(|i| q[i].iter().zip(ys).map(|(a, b)| a * b).sum()).collect();
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[i][j] * c[j]).sum();
        c[i] = (rhs[i] - s) / r[i][i];
    }
    c.iter().zip(&norms).map(|(v, n)| v / n).collect()
}

/// Coefficient of `t²` in `1 − P` fitted on `{t², t^{3−α}, t³}`.
pub fn short_time_coefficient(alpha: f64, ts: &[f64], ps: &[f64]) -> f64 {
    let ys: Vec<f64> = ps.iter().map(|p| 1.0 - p).collect();
    power_fit(ts, &ys, &[2.0, 3.0 - alpha, 3.0])[0]
}

pub fn criterion_7() -> CriterionOutcome {
    let mut cases = Vec::new();
    let mut max_modulus = 0.0f64;
    let controls = SeriesControls::default();
    let t_end = 1e-3;
    for al in [0.25, 0.5, 0.75] {
        let p = ReservoirParams::new(al, 1.0, 1.0).expect("valid parameters");
        let f0 = derived_constants(&p).f0;
        match volterra_solve(&p, &VolterraConfig::new(t_end / 500.0, t_end)) {
            Ok(curve) => {
                max_modulus = max_modulus.max(curve.max_modulus());
                let ts: Vec<f64> = curve.times().into_iter().skip(1).collect();
                let ps: Vec<f64> = curve.populations().into_iter().skip(1).collect();
                let c = short_time_coefficient(al, &ts, &ps);
                cases.push(Case::new(7, format!("alpha = {al}: Volterra t² coefficient {c:.8} vs f0 {f0:.8} rel"), rel(c, f0), 1e-4));
            }
            Err(e) => cases.push(failed_case(7, &format!("alpha = {al} Volterra"), &e)),
        }
        let ts: Vec<f64> = (1..=50).map(|j| t_end * j as f64 / 50.0).collect();
        let ps: Result<Vec<f64>> = ts.iter().map(|&t| amplitude_series(&p, t, &controls).map(|v| v.value.norm_sqr())).collect();
        match ps {
            Ok(ps) => {
                let c = short_time_coefficient(al, &ts, &ps);
                cases.push(Case::new(7, format!("alpha = {al}: series t² coefficient rel"), rel(c, f0), 1e-4));
            }
            Err(e) => cases.push(failed_case(7, &format!("alpha = {al} series"), &e)),
        }
        if al == 0.5 {
            match population_half(&p, &ts) {
                Ok(curve) => {
                    let c = short_time_coefficient(al, &ts, &curve.populations());
                    cases.push(Case::new(7, "alpha = 0.5: closed-form t² coefficient rel", rel(c, f0), 1e-4));
                }
                Err(e) => cases.push(failed_case(7, "closed form", &e)),
            }
        }
    }
    CriterionOutcome { cases, notes: vec![], max_modulus }
}

/// Runs the mode oracle; `earlier` is the largest `|C|` reported by the
/// other criteria.
pub fn criterion_8(earlier: f64) -> CriterionOutcome {
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let mut max_modulus = earlier;
    let p = half(1.0, 1);
    let mut run = || -> Result<(f64, f64, f64)> {
        let grid = mode_discretize(&p, 2000, 100.0)?;
        let run = mode_evolve(&grid, 2.0, 5e-4)?;
        let m = run.samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max);
        let closed = population_half(&p, &run.samples.iter().map(|s| s.0).collect::<Vec<_>>())?;
        let dev = run.samples.iter().zip(&closed.samples).map(|(a, b)| (a.1 - b.c).norm()).fold(0.0, f64::max);
        let bound = f64::max(1e-4, 2.0 * 2.0 * grid.tail_inverse_moment);
        notes.push(format!("modes vs closed form on [0, 2]: {dev:.3e} (cap bound {bound:.3e})"));
        Ok((run.max_unitarity_defect, m, closed.max_modulus()))
    };
    match run() {
        Ok((defect, m1, m2)) => {
            cases.push(Case::new(8, "mode unitarity defect on [0, 2]", defect, 1e-8));
            max_modulus = max_modulus.max(m1).max(m2);
        }
        Err(e) => cases.push(failed_case(8, "modes", &e)),
    }
    cases.push(Case::new(8, format!("max |C| over all runs = {max_modulus:.15}, excess"), (max_modulus - 1.0).max(0.0), 1e-12));
    CriterionOutcome { cases, notes, max_modulus }
}

pub fn criterion_9() -> CriterionOutcome {
    let mut cases = Vec::new();
    let wk = WrightKernelParams::new(0, 0, 0.5).expect("valid indices");
    let mut worst = 0.0f64;
    for j in 0..=250 {
        let z = 0.1 * j as f64;
        match wright_kernel(wk, false, Complex64::new(z, 0.0)) {
            Ok(v) => worst = worst.max((v - z.sqrt().cos()).norm()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    cases.push(Case::new(9, "wright kernel (0,0) vs cos(√z) on [0, 25]", worst, 1e-12));
    let mut worst = 0.0f64;
    for j in 0..=58 {
        let z = 1.0 + 0.5 * j as f64;
        // e^z Γ(1/2, z) = ∫₀^∞ (z+u)^{−1/2} e^{−u} du, u = s/(1−s)
        let direct = quad::tanh_sinh(
            |s: f64| {
                let u = s / (1.0 - s);
                let v = (z + u).powf(-0.5) * (-u).exp() / ((1.0 - s) * (1.0 - s));
                Complex64::new(if v.is_finite() { v } else { 0.0 }, 0.0)
            },
            0.0,
            1.0,
            1e-300,
            1e-14,
        );
        match (direct, scaled_upper_gamma_half(Complex64::new(z, 0.0))) {
            (Ok(d), Ok(g)) => worst = worst.max((g - d.value).norm() / d.value.norm()),
            _ => worst = f64::INFINITY,
        }
    }
    cases.push(Case::new(9, "scaled incomplete gamma vs quadrature on [1, 30] rel", worst, 1e-10));
    CriterionOutcome { cases, notes: vec![], max_modulus: 0.0 }
}

pub fn criterion_10() -> CriterionOutcome {
    let mut cases = Vec::new();
    let mut max_modulus = 0.0f64;
    let p = half(1.0, 1);
    let run = |cases: &mut Vec<Case>, max_modulus: &mut f64| -> Result<()> {
        let rep = build_poly_roots(&p, RationalAlpha::new(1, 2)?)?;
        let sol = HalfSolution::new(&p)?;
        let c0 = amplitude_from_rep(&rep, 0.0)?.value;
        cases.push(Case::new(10, "C(0) from the sextic representation", (c0 - 1.0).norm(), 1e-3));
        let mut worst = 0.0f64;
        for t in [0.5, 1.0, 2.0] {
            let c = amplitude_from_rep(&rep, t)?.value;
            *max_modulus = max_modulus.max(c.norm());
            worst = worst.max((c - sol.amplitude(t)?).norm());
        }
        cases.push(Case::new(10, "sextic vs closed form at t = 0.5, 1, 2", worst, 1e-3));
        cases.push(Case::new(10, "residue sum", rep.residue_sum().norm(), 1e-8));
        Ok(())
    };
    if let Err(e) = run(&mut cases, &mut max_modulus) {
        cases.push(failed_case(10, "rational representation", &e));
    }
    CriterionOutcome { cases, notes: vec![], max_modulus }
}

/// Runs all ten criteria in order.
pub fn run_suite() -> ValidationReport {
    let mut outcomes: Vec<CriterionOutcome> = Vec::new();
    let mut max_modulus = 0.0f64;
    for id in 1..=10u8 {
        let out = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => continue,
            9 => criterion_9(),
            _ => criterion_10(),
        };
        max_modulus = max_modulus.max(out.max_modulus);
        outcomes.push(out);
    }
    outcomes.insert(7, criterion_8(max_modulus));
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    for out in outcomes {
        cases.extend(out.cases);
        notes.extend(out.notes);
    }
    ValidationReport::from_parts(cases, notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_recover_exact_data() {
        let ts: Vec<f64> = (1..=30).map(|j| j as f64 * 1e-4).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * t * t - 2.0 * t.powf(2.25) + 0.5 * t.powi(3)).collect();
        let c = power_fit(&ts, &ys, &[2.0, 2.25, 3.0]);
        assert!((c[0] - 3.0).abs() < 1e-6 && (c[1] + 2.0).abs() < 1e-5, "{c:?}");
        let ys: Vec<f64> = ts.iter().map(|t| 7.0 * t.powf(-3.0)).collect();
        let (s, i) = log_log_fit(&ts, &ys);
        assert!((s + 3.0).abs() < 1e-12 && (i.exp() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn report_conjunction() {
        let r = ValidationReport::from_parts(vec![Case::new(1, "x", 0.0, 0.0), Case::new(2, "y", 2.0, 1.0)], vec![]);
        assert!(!r.overall_passed);
        assert!(r.criterion_passed(1) && !r.criterion_passed(2));
    }

    #[test]
    fn quick_criteria() {
        assert!(criterion_1().cases[0].passed);
        assert!(criterion_9().passed());
    }
}
