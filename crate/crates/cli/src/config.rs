//! Run configuration: flat `key = value` file, then flags, then `EO_SEED`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eo_core::tolerance::Tolerances;

use crate::error::{usage, CliError, CliResult};

pub const SEED_ENV: &str = "EO_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldenMode {
    Write,
    Check,
    Off,
}

impl FromStr for GoldenMode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "write" => Ok(GoldenMode::Write),
            "check" => Ok(GoldenMode::Check),
            "off" => Ok(GoldenMode::Off),
            other => usage(format!("golden mode must be write, check or off, got {other:?}")),
        }
    }
}

impl fmt::Display for GoldenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoldenMode::Write => "write",
            GoldenMode::Check => "check",
            GoldenMode::Off => "off",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub rho: f64,
    pub grid_size: usize,
    pub output_dir: PathBuf,
    pub golden_mode: GoldenMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            tolerances: Tolerances::default(),
            rho: 2.0,
            grid_size: 1 << 16,
            output_dir: PathBuf::from("."),
            golden_mode: GoldenMode::Check,
        }
    }
}

/// Flag values that override the file; `None` leaves the field alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rho: Option<f64>,
    pub grid_size: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub golden_mode: Option<GoldenMode>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value {value:?} for config key {key}")))
}

impl RunConfig {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return usage(format!("config line {}: expected key = value", i + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => self.seed = parse_value(key, value)?,
                "rho" => self.rho = parse_value(key, value)?,
                "grid_size" => self.grid_size = parse_value(key, value)?,
                "output_dir" => self.output_dir = PathBuf::from(value),
                "golden_mode" => self.golden_mode = value.parse()?,
                "tolerance.parseval" => self.tolerances.parseval = parse_value(key, value)?,
                "tolerance.identity" => self.tolerances.identity = parse_value(key, value)?,
                "tolerance.quadrature" => self.tolerances.quadrature = parse_value(key, value)?,
                "tolerance.convolution" => self.tolerances.convolution = parse_value(key, value)?,
                other => return usage(format!("config line {}: unknown key {other:?}", i + 1)),
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.rho {
            self.rho = v;
        }
        if let Some(v) = o.grid_size {
            self.grid_size = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.golden_mode {
            self.golden_mode = v;
        }
    }

    pub fn apply_env_seed(&mut self, value: Option<&str>) -> CliResult<()> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        if !self.tolerances.is_valid() {
            return usage("all tolerances must be positive");
        }
        if !(self.rho > 1.0) || !self.rho.is_finite() {
            return usage(format!("rho must exceed 1, got {}", self.rho));
        }
        if !self.grid_size.is_power_of_two() || self.grid_size < 2 {
            return usage(format!("grid_size must be a power of two, got {}", self.grid_size));
        }
        Ok(())
    }

    /// File, then flags, then the environment seed.
    pub fn load(file: Option<&Path>, overrides: &Overrides, env_seed: Option<&str>) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        cfg.apply_overrides(overrides);
        cfg.apply_env_seed(env_seed)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `path` relative to the output directory unless absolute.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.output_dir.join(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("seed = 7\nrho = 3.5 # comment\n\ngolden_mode = off\ntolerance.identity = 1e-6").unwrap();
        assert_eq!((cfg.seed, cfg.rho, cfg.golden_mode), (7, 3.5, GoldenMode::Off));
        assert_eq!(cfg.tolerances.identity, 1e-6);
        cfg.apply_overrides(&Overrides {
            seed: Some(9),
            ..Default::default()
        });
        assert_eq!(cfg.seed, 9);
        cfg.apply_env_seed(Some("11")).unwrap();
        assert_eq!(cfg.seed, 11);
        assert!(cfg.apply_env_seed(Some("x")).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.grid_size = 1000;
        assert!(cfg.validate().is_err());
        cfg.grid_size = 1024;
        cfg.rho = 1.0;
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().apply_text("nope = 1").is_err());
        assert!(RunConfig::default().apply_text("seed 1").is_err());
        assert!(RunConfig::default().apply_text("tolerance.parseval = -1").is_ok());
    }
}
