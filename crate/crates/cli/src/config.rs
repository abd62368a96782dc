//! Flags, config files and the resolved run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use bandgap::ReservoirParams;
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Decay,
    Spectrum,
    Timescale,
    CriticalN,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Auto,
    ClosedHalf,
    Series,
    Volterra,
    Modes,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "bandgap-decay", version, about = "Decay of an atom coupled to a band-gap reservoir")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Exponent of the spectral density, 0 < alpha < 1
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Band width scale
    #[arg(long)]
    pub a: Option<f64>,
    /// Coupling amplitude
    #[arg(long = "A")]
    pub big_a: Option<f64>,
    #[arg(long)]
    pub n_atoms: Option<u64>,
    /// Band edge frequency
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// Upper frequency of the spectrum command
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// File of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ReservoirParams,
    pub command: Command,
    pub method: MethodChoice,
    pub t_max: f64,
    pub points: usize,
    pub grid_kind: GridKind,
    pub omega_max: f64,
    pub output_path: Option<PathBuf>,
    pub output_format: Format,
}

#[derive(Debug, Default)]
struct Raw {
    alpha: Option<f64>,
    a: Option<f64>,
    big_a: Option<f64>,
    n_atoms: Option<u64>,
    omega0: Option<f64>,
    method: Option<MethodChoice>,
    t_max: Option<f64>,
    points: Option<usize>,
    grid: Option<GridKind>,
    omega_max: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("config key `{key}`: cannot parse `{value}`"))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, String> {
    T::from_str(value, false).map_err(|_| format!("config key `{key}`: unknown value `{value}`"))
}

fn read_config(path: &Path) -> Result<Raw, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut raw = Raw::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected `key = value`", path.display(), lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "alpha" => raw.alpha = Some(parse_value(key, value)?),
            "a" => raw.a = Some(parse_value(key, value)?),
            "A" => raw.big_a = Some(parse_value(key, value)?),
            "n_atoms" | "n-atoms" => raw.n_atoms = Some(parse_value(key, value)?),
            "omega0" => raw.omega0 = Some(parse_value(key, value)?),
            "method" => raw.method = Some(parse_enum(key, value)?),
            "t_max" | "t-max" => raw.t_max = Some(parse_value(key, value)?),
            "points" => raw.points = Some(parse_value(key, value)?),
            "grid" => raw.grid = Some(parse_enum(key, value)?),
            "omega_max" | "omega-max" => raw.omega_max = Some(parse_value(key, value)?),
            "output" => raw.output = Some(PathBuf::from(value)),
            "format" => raw.format = Some(parse_enum(key, value)?),
            _ => return Err(format!("{}:{}: unknown key `{key}`", path.display(), lineno + 1)),
        }
    }
    Ok(raw)
}

impl RunConfig {
    /// Merges flags over the config file over the defaults. Errors are usage errors.
    pub fn resolve(cli: Cli) -> Result<Self, String> {
        let file = match &cli.config {
            Some(p) => read_config(p)?,
            None => Raw::default(),
        };
        let alpha = cli.alpha.or(file.alpha).unwrap_or(0.5);
        let a = cli.a.or(file.a).unwrap_or(1.0);
        let big_a = cli.big_a.or(file.big_a).unwrap_or(1.0);
        let n_atoms = cli.n_atoms.or(file.n_atoms).unwrap_or(1);
        let omega0 = cli.omega0.or(file.omega0).unwrap_or(0.0);
        let params = ReservoirParams::with_ensemble(alpha, big_a, a, omega0, n_atoms).map_err(|e| e.to_string())?;
        let method = cli.method.or(file.method).unwrap_or(MethodChoice::Auto);
        let t_max = cli.t_max.or(file.t_max).unwrap_or(10.0 / a);
        let points = cli.points.or(file.points).unwrap_or(201);
        let omega_max = cli.omega_max.or(file.omega_max).unwrap_or(omega0 + 10.0 * a);
        let config = Self {
            params,
            command: cli.command,
            method,
            t_max,
            points,
            grid_kind: cli.grid.or(file.grid).unwrap_or(GridKind::Linear),
            omega_max,
            output_path: cli.output.or(file.output),
            output_format: cli.format.or(file.format).unwrap_or(Format::Csv),
        };
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<(), String> {
        if matches!(self.command, Command::Decay | Command::Spectrum) && self.points < 2 {
            return Err(format!("--points must be at least 2, got {}", self.points));
        }
        if self.command == Command::Decay {
            if !(self.t_max > 0.0 && self.t_max.is_finite()) {
                return Err(format!("--t-max must be positive, got {}", self.t_max));
            }
            if self.method == MethodChoice::ClosedHalf && self.params.alpha != 0.5 {
                return Err(format!("closed-half requires alpha = 1/2, got alpha = {}", self.params.alpha));
            }
            if self.method == MethodChoice::Rational {
                bandgap::rational::RationalAlpha::from_alpha(self.params.alpha).map_err(|e| e.to_string())?;
            }
        }
        if self.command == Command::Spectrum && !(self.omega_max > self.params.omega0 && self.omega_max.is_finite()) {
            return Err(format!("--omega-max must exceed omega0 = {}", self.params.omega0));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("bandgap-decay").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(cli(&["decay"])).unwrap();
        assert_eq!((c.params.alpha, c.params.a, c.params.big_a, c.params.n_atoms), (0.5, 1.0, 1.0, 1));
        assert_eq!((c.method, c.output_format), (MethodChoice::Auto, Format::Csv));
    }

    #[test]
    fn flags_override_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nalpha = 0.25 # trailing\nA = 3\n\nmethod = series").unwrap();
        let path = f.path().to_str().unwrap();
        let c = RunConfig::resolve(cli(&["decay", "--config", path, "--A", "2"])).unwrap();
        assert_eq!((c.params.alpha, c.params.big_a, c.method), (0.25, 2.0, MethodChoice::Series));
    }

    #[test]
    fn unknown_key_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "beta = 1").unwrap();
        let err = RunConfig::resolve(cli(&["decay", "--config", f.path().to_str().unwrap()])).unwrap_err();
        assert!(err.contains("beta"), "{err}");
    }

    #[test]
    fn method_alpha_conflict() {
        let err = RunConfig::resolve(cli(&["decay", "--alpha", "0.3", "--method", "closed-half"])).unwrap_err();
        assert!(err.contains("closed-half requires alpha = 1/2"));
    }
}
