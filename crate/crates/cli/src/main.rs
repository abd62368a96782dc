mod config;
mod emit;

use std::process::ExitCode;

use bandgap::asymptotics::{critical_n, hybrid_population, law_constant_based, law_limit, law_root_based, AsymptoticLaw};
use bandgap::closed_half::population_half;
use bandgap::oracles::{mode_discretize, mode_evolve, volterra_solve, VolterraConfig};
use bandgap::rational::{amplitude_from_rep, build_poly_roots, RationalAlpha};
use bandgap::reservoir::{derived_constants, spectral_density};
use bandgap::series::{population_series, SeriesControls};
use bandgap::validation::run_suite;
use bandgap::{Complex64, DecayCurve, Method, ReservoirParams};
use clap::error::ErrorKind;
use clap::Parser;
use log::warn;
use serde_json::json;

use config::{Cli, Command, Format, GridKind, MethodChoice, RunConfig};
use emit::num;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

// modes oracle resolution
const MODE_COUNT: usize = 2000;
const MODE_CAP: f64 = 100.0;
// longest Volterra run before dt is coarsened
const MAX_STEPS: f64 = 20_000.0;

enum Failure {
    Usage(String),
    Numerical(String),
    Validation,
}

impl From<bandgap::Error> for Failure {
    fn from(e: bandgap::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("output: {e}"))
    }
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    let n = cfg.points;
    let last = (n - 1) as f64;
    match cfg.grid_kind {
        GridKind::Linear => (0..n).map(|i| cfg.t_max * i as f64 / last).collect(),
        // four decades below t_max
        GridKind::Log => (0..n).map(|i| cfg.t_max * 10f64.powf(-4.0 * (1.0 - i as f64 / last))).collect(),
    }
}

/// Linear interpolation of a uniformly stepped run onto `grid`.
fn resample(params: &ReservoirParams, run: &[(f64, Complex64)], grid: &[f64], method: Method) -> bandgap::Result<DecayCurve> {
    let mut curve = DecayCurve::new(*params);
    let dt = run[1].0 - run[0].0;
    for &t in grid {
        let x = t / dt;
        let j = (x.floor() as usize).min(run.len() - 2);
        let w = x - j as f64;
        let c = if w.abs() < 1e-9 {
            run[j].1
        } else if (w - 1.0).abs() < 1e-9 {
            run[j + 1].1
        } else {
            run[j].1 * (1.0 - w) + run[j + 1].1 * w
        };
        curve.push(t, c, method)?;
    }
    Ok(curve)
}

fn volterra_step(cfg: &RunConfig) -> f64 {
    let f0 = derived_constants(&cfg.params).f0;
    let target = f64::min(1e-3 / cfg.params.a, 0.05 / f0.sqrt());
    let floor = cfg.t_max / MAX_STEPS;
    if target < floor {
        warn!("Volterra step coarsened from {target:.3e} to {floor:.3e}");
    }
    let dt = target.max(floor);
    // land on the linear grid exactly
    let spacing = cfg.t_max / (cfg.points - 1) as f64;
    if cfg.grid_kind == GridKind::Linear && spacing >= dt {
        spacing / (spacing / dt).ceil()
    } else {
        cfg.t_max / (cfg.t_max / dt).ceil()
    }
}

fn decay(cfg: &RunConfig) -> Result<DecayCurve, Failure> {
    let grid = time_grid(cfg);
    let p = &cfg.params;
    let curve = match cfg.method {
        MethodChoice::Auto => hybrid_population(p, &grid)?,
        MethodChoice::ClosedHalf => population_half(p, &grid)?,
        MethodChoice::Series => population_series(p, &grid, &SeriesControls::default())?,
        MethodChoice::Volterra => {
            let run = volterra_solve(p, &VolterraConfig::new(volterra_step(cfg), cfg.t_max))?;
            let pairs: Vec<_> = run.samples.iter().map(|s| (s.t, s.c)).collect();
            resample(p, &pairs, &grid, Method::Volterra)?
        }
        MethodChoice::Modes => {
            let modes = mode_discretize(p, MODE_COUNT, MODE_CAP * p.a)?;
            let wmax = modes.frequencies.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            let dt = cfg.t_max / (cfg.t_max * wmax / 0.09).ceil();
            let run = mode_evolve(&modes, cfg.t_max, dt)?;
            resample(p, &run.samples, &grid, Method::Modes)?
        }
        MethodChoice::Rational => {
            let ra = RationalAlpha::from_alpha(p.alpha)?;
            let rep = build_poly_roots(p, ra)?;
            let mut curve = DecayCurve::new(*p);
            for &t in &grid {
                curve.push(t, amplitude_from_rep(&rep, t)?.value, Method::Rational)?;
            }
            curve
        }
    };
    if curve.len() < grid.len() {
        warn!("{} of {} grid points lie beyond the series horizon", grid.len() - curve.len(), grid.len());
    }
    Ok(curve)
}

fn method_label(cfg: &RunConfig) -> &'static str {
    match cfg.method {
        MethodChoice::Auto => "auto",
        MethodChoice::ClosedHalf => "closed-half",
        MethodChoice::Series => "series",
        MethodChoice::Volterra => "volterra",
        MethodChoice::Modes => "modes",
        MethodChoice::Rational => "rational",
    }
}

fn law_row(law: &AsymptoticLaw) -> Vec<String> {
    let variant = serde_json::to_value(law.variant).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    vec![variant, num(law.power), num(law.zeta), num(law.tau)]
}

fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let out = cfg.output_path.as_deref();
    let json = cfg.output_format == Format::Json;
    let p = &cfg.params;
    match cfg.command {
        Command::Decay => {
            let curve = decay(cfg)?;
            let text = if json { emit::json_text(&emit::decay_json(&curve, method_label(cfg))) } else { emit::decay_csv(&curve) };
            emit::write_out(out, &text)?;
        }
        Command::Spectrum => {
            let n = cfg.points;
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let w = p.omega0 + (cfg.omega_max - p.omega0) * i as f64 / (n - 1) as f64;
                rows.push((w, spectral_density(p, w)?));
            }
            let text = if json {
                let samples: Vec<_> = rows.iter().map(|(w, j)| json!({"omega": w, "j": j})).collect();
                emit::json_text(&json!({"metadata": emit::metadata(p, "spectrum", None), "samples": samples}))
            } else {
                let rows: Vec<Vec<String>> = rows.iter().map(|(w, j)| vec![num(*w), num(*j)]).collect();
                emit::table_csv(&["omega", "j"], &rows)
            };
            emit::write_out(out, &text)?;
        }
        Command::Timescale => {
            let mut laws = Vec::new();
            if p.alpha == 0.5 {
                laws.push(law_root_based(p)?);
            } else {
                warn!("the root-based law exists only at alpha = 1/2");
            }
            laws.push(law_constant_based(p));
            laws.push(law_limit(p));
            let text = if json {
                emit::json_text(&json!({"metadata": emit::metadata(p, "timescale", None), "laws": laws}))
            } else {
                emit::table_csv(&["variant", "power", "zeta", "tau"], &laws.iter().map(law_row).collect::<Vec<_>>())
            };
            emit::write_out(out, &text)?;
        }
        Command::CriticalN => {
            let n = critical_n(p);
            let text = if json { emit::json_text(&json!({"metadata": emit::metadata(p, "critical-n", None), "critical_n": n})) } else { format!("{n}\n") };
            emit::write_out(out, &text)?;
        }
        Command::Validate => {
            let report = run_suite();
            let text = if json {
                emit::json_text(&serde_json::to_value(&report).expect("report serializes"))
            } else {
                let rows: Vec<Vec<String>> = report
                    .cases
                    .iter()
                    .map(|c| vec![c.criterion.to_string(), format!("\"{}\"", c.name.replace('"', "'")), num(c.max_abs_deviation), num(c.tolerance), c.passed.to_string()])
                    .collect();
                emit::table_csv(&["criterion", "name", "max_abs_deviation", "tolerance", "passed"], &rows)
            };
            emit::write_out(out, &text)?;
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            if !report.overall_passed {
                return Err(Failure::Validation);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = RunConfig::resolve(cli).map_err(Failure::Usage).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Validation) => {
            eprintln!("validation failed");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
