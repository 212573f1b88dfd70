use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// One tabulated scattering-map sample on a torus `I = const`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSample {
    pub phi: f64,
    pub phi_prime: f64,
    pub action_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Torus {
    pub action: f64,
    pub samples: Vec<TorusSample>,
}

impl Torus {
    /// Equispacing error tolerated in `phi'`.
    pub const SPACING_TOL: f64 = 1e-9;

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Error::Invariant { torus: index, msg };
        if !(self.action > 0.0) || !self.action.is_finite() {
            return Err(bad(format!("action level {} is not positive", self.action)));
        }
        let count = self.samples.len();
        if count < 2 || !count.is_power_of_two() {
            return Err(bad(format!("sample count {count} is not a power of two >= 2")));
        }
        let step = TAU / count as f64;
        let origin = self.samples[0].phi_prime;
        if !(0.0..step).contains(&origin) {
            return Err(bad(format!(
                "first phi' = {origin} not in [0, {step})"
            )));
        }
        for (k, s) in self.samples.iter().enumerate() {
            if !(s.phi.is_finite() && s.phi_prime.is_finite() && s.action_prime.is_finite()) {
                return Err(bad(format!("sample {k} has a non-finite entry")));
            }
            let expected = origin + step * k as f64;
            if (s.phi_prime - expected).abs() > Self::SPACING_TOL {
                return Err(bad(format!(
                    "phi' not equispaced at sample {k}: {} vs {expected}",
                    s.phi_prime
                )));
            }
        }
        Ok(())
    }

    pub fn phase_origin(&self) -> f64 {
        self.samples[0].phi_prime
    }
}

/// Tabulated scattering map, one torus per action level, sorted by action.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringGrid {
    pub tori: Vec<Torus>,
}

impl ScatteringGrid {
    /// Checks every torus and the ordering of action levels.
    pub fn new(tori: Vec<Torus>) -> Result<Self> {
        let grid = Self { tori };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tori.is_empty() {
            return Err(Error::Invariant {
                torus: 0,
                msg: "grid has no tori".into(),
            });
        }
        for (i, t) in self.tori.iter().enumerate() {
            t.validate(i)?;
            if i > 0 && !(t.action > self.tori[i - 1].action) {
                return Err(Error::Invariant {
                    torus: i,
                    msg: format!("action levels not strictly increasing at {}", t.action),
                });
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<f64> {
        self.tori.iter().map(|t| t.action).collect()
    }

    pub fn min_samples(&self) -> usize {
        self.tori.iter().map(|t| t.samples.len()).min().unwrap_or(0)
    }

    pub fn max_action(&self) -> f64 {
        self.tori.last().map_or(0.0, |t| t.action)
    }

    /// Grid restricted to tori with `action <= max_action`.
    pub fn restricted(&self, max_action: f64) -> Self {
        Self {
            tori: self
                .tori
                .iter()
                .filter(|t| t.action <= max_action)
                .cloned()
                .collect(),
        }
    }
}
