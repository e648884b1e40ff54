//! Run configuration: defaults, overridden by `ECOMAT_OUTPUT_DIR`, then by
//! a `key = value` config file, then by command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ecomat::eigen::{SolverConfig, SolverKind};
use ecomat::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Power,
    InversePower,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: ModeArg,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub solver: SolverArg,
    pub shift_margin: f64,
    pub horizon: usize,
    pub theta_weak: f64,
    pub theta_pillar: f64,
    pub crisis_threshold: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: ModeArg::Rational,
            tolerance: 1e-12,
            max_iterations: 100_000,
            solver: SolverArg::Power,
            shift_margin: 0.5,
            horizon: 1000,
            theta_weak: 0.05,
            theta_pillar: 0.50,
            crisis_threshold: 0.1,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            solver: match self.solver {
                SolverArg::Power => SolverKind::Power,
                SolverArg::InversePower => SolverKind::InversePower,
            },
            shift_margin: self.shift_margin,
            ..SolverConfig::default()
        }
    }

    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var("ECOMAT_OUTPUT_DIR") {
            if !dir.is_empty() {
                self.output_dir = PathBuf::from(dir);
            }
        }
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("{}:{}: expected key = value", path.display(), no + 1))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                Error::Parse(format!("{}:{}: {e}", path.display(), no + 1))
            })?;
        }
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let bad = |what: &str| Error::Parse(format!("bad {what} value {value:?}"));
        match key {
            "mode" => {
                self.mode = match value {
                    "rational" => ModeArg::Rational,
                    "float" => ModeArg::Float,
                    _ => return Err(bad("mode")),
                }
            }
            "tolerance" => self.tolerance = value.parse().map_err(|_| bad("tolerance"))?,
            "max_iterations" => {
                self.max_iterations = value.parse().map_err(|_| bad("max_iterations"))?
            }
            "solver" => {
                self.solver = match value {
                    "power" => SolverArg::Power,
                    "inverse-power" => SolverArg::InversePower,
                    _ => return Err(bad("solver")),
                }
            }
            "shift_margin" => self.shift_margin = value.parse().map_err(|_| bad("shift_margin"))?,
            "horizon" => self.horizon = value.parse().map_err(|_| bad("horizon"))?,
            "theta_weak" => self.theta_weak = value.parse().map_err(|_| bad("theta_weak"))?,
            "theta_pillar" => self.theta_pillar = value.parse().map_err(|_| bad("theta_pillar"))?,
            "crisis_threshold" => {
                self.crisis_threshold = value.parse().map_err(|_| bad("crisis_threshold"))?
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::Parse(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        for (name, v) in [
            ("shift_margin", self.shift_margin),
            ("theta_weak", self.theta_weak),
            ("theta_pillar", self.theta_pillar),
            ("crisis_threshold", self.crisis_threshold),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        if self.horizon == 0 || self.max_iterations == 0 {
            return Err(Error::Domain("horizon and max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}
