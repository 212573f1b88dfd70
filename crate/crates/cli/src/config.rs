use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use scatter_core::io::parse_key_values;

/// Settings shared by all subcommands. Values come from the defaults, then a
/// `key = value` config file, then command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub model2: Option<PathBuf>,
    pub inner: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub fourier_degree: usize,
    pub newton_degree: usize,
    pub fixed_point_tol: f64,
    pub max_iter: usize,
    pub integrator_tol: f64,
    pub cells_action: usize,
    pub cells_angle: usize,
    pub start_action: f64,
    pub start_angle: f64,
    pub target_action: f64,
    pub target_angle: f64,
    pub radius: f64,
    pub t_out: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub samples: usize,
    pub tori: usize,
    pub orbits: usize,
    pub iterations: usize,
    pub mu: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: None,
            model: None,
            model2: None,
            inner: None,
            out: None,
            out_dir: PathBuf::from("."),
            fourier_degree: 4,
            newton_degree: 5,
            fixed_point_tol: 1e-5,
            max_iter: 50,
            integrator_tol: 1e-14,
            cells_action: 30,
            cells_angle: 30,
            start_action: 1.0,
            start_angle: 1.5,
            target_action: 7.0,
            target_angle: 1.5,
            radius: 0.25,
            t_out: scatter_core::ifs::T_OUT_MAX,
            max_steps: 500,
            seed: 2024,
            samples: 128,
            tori: 7,
            orbits: 100,
            iterations: 1000,
            mu: scatter_core::rtbp::SUN_EARTH_MU,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .ok()
        .with_context(|| format!("config key {key}: cannot parse {value:?}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply(&parse_key_values(&text)?)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        for (key, v) in kv {
            match key.as_str() {
                "grid" => self.grid = Some(v.into()),
                "model" => self.model = Some(v.into()),
                "model2" => self.model2 = Some(v.into()),
                "inner" => self.inner = Some(v.into()),
                "out" => self.out = Some(v.into()),
                "out_dir" => self.out_dir = v.into(),
                "fourier_degree" => self.fourier_degree = parse(key, v)?,
                "newton_degree" => self.newton_degree = parse(key, v)?,
                "fixed_point_tol" => self.fixed_point_tol = parse(key, v)?,
                "max_iter" => self.max_iter = parse(key, v)?,
                "integrator_tol" => self.integrator_tol = parse(key, v)?,
                "cells_action" => self.cells_action = parse(key, v)?,
                "cells_angle" => self.cells_angle = parse(key, v)?,
                "start_action" => self.start_action = parse(key, v)?,
                "start_angle" => self.start_angle = parse(key, v)?,
                "target_action" => self.target_action = parse(key, v)?,
                "target_angle" => self.target_angle = parse(key, v)?,
                "radius" => self.radius = parse(key, v)?,
                "t_out" => self.t_out = parse(key, v)?,
                "max_steps" => self.max_steps = parse(key, v)?,
                "seed" => self.seed = parse(key, v)?,
                "samples" => self.samples = parse(key, v)?,
                "tori" => self.tori = parse(key, v)?,
                "orbits" => self.orbits = parse(key, v)?,
                "iterations" => self.iterations = parse(key, v)?,
                "mu" => self.mu = parse(key, v)?,
                other => bail!("unknown config key {other:?}"),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fixed_point_tol", self.fixed_point_tol),
            ("integrator_tol", self.integrator_tol),
            ("radius", self.radius),
            ("t_out", self.t_out),
        ] {
            if v.is_nan() || v <= 0.0 {
                bail!("{name} must be positive, got {v}");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_override_defaults() {
        let mut cfg = RunConfig::default();
        let kv = parse_key_values("radius = 0.5\ncells_action=10\ngrid=g.csv\n").unwrap();
        cfg.apply(&kv).unwrap();
        assert_eq!(cfg.radius, 0.5);
        assert_eq!(cfg.cells_action, 10);
        assert_eq!(cfg.grid, Some(PathBuf::from("g.csv")));
        assert_eq!(cfg.cells_angle, 30);
    }

    #[test]
    fn rejects_unknown_and_nonpositive() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply(&parse_key_values("colour=red").unwrap()).is_err());
        cfg.fixed_point_tol = 0.0;
        assert!(cfg.validate().is_err());
    }
}
