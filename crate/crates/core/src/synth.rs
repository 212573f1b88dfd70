//! Ground-truth models and forward-generated scattering grids.
//!
//! A grid is generated in the explicit direction of the generating-function
//! equations: `phi'` is chosen on an equispaced grid and
//! `phi = phi' + omega(I) + dLt/dI`, `I' = I + dLt/dphi'` are evaluated
//! directly, so no iteration is involved.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::newton::{newton_interpolate, NewtonPoly};
use crate::ssm::{
    eval_derivs, normalize_angle, FitMeta, Harmonic, ScatteringGrid, SsmModel, Torus, TorusSample,
};

/// Dominant divided differences of the n = 2 harmonic at unit action.
pub const DOMINANT_A: f64 = 0.178180;
pub const DOMINANT_B: f64 = -0.097275;

/// Anchors `(I, omega/pi)` the synthetic frequency passes through.
pub const OMEGA_ANCHORS: [(f64, f64); 3] = [
    (0.0, 0.630128),
    (2.4175, 2.0 / 3.0),
    (6.5550, 3.0 / 4.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpec {
    pub n: u32,
    /// Divided differences of `A_n` on `GroundTruthSpec::nodes`; first entry 0.
    pub a_dd: Vec<f64>,
    pub b_dd: Vec<f64>,
}

/// Exact description of a scattering map for round-trip tests.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSpec {
    pub harmonics: Vec<HarmonicSpec>,
    /// Newton nodes for `A_n`, `B_n`; must start at `I = 0`.
    pub nodes: Vec<f64>,
    pub omega: NewtonPoly,
    pub action_max: f64,
}

impl GroundTruthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes.first() != Some(&0.0) {
            return Err(Error::InvalidConfig(
                "ground truth harmonic nodes must start at I = 0".into(),
            ));
        }
        for h in &self.harmonics {
            if h.n == 0 || h.n % 2 != 0 {
                return Err(Error::InvalidConfig(format!(
                    "harmonic {} is not a positive even number",
                    h.n
                )));
            }
            if h.a_dd.first().copied().unwrap_or(0.0) != 0.0
                || h.b_dd.first().copied().unwrap_or(0.0) != 0.0
            {
                return Err(Error::InvalidConfig(format!(
                    "harmonic {} does not vanish at I = 0",
                    h.n
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<SsmModel> {
        self.validate()?;
        let pad = |dd: &[f64]| -> Vec<f64> {
            if dd.is_empty() {
                vec![0.0]
            } else {
                dd.to_vec()
            }
        };
        let mut harmonics = Vec::with_capacity(self.harmonics.len());
        for h in &self.harmonics {
            harmonics.push(Harmonic {
                n: h.n,
                a: NewtonPoly::from_parts(self.nodes.clone(), pad(&h.a_dd))?,
                b: NewtonPoly::from_parts(self.nodes.clone(), pad(&h.b_dd))?,
            });
        }
        harmonics.sort_by_key(|h| h.n);
        let fourier_degree = harmonics.last().map_or(0, |h| h.n as usize);
        Ok(SsmModel {
            fourier_degree,
            newton_degree: self.nodes.len() - 1,
            harmonics,
            omega: self.omega.clone(),
            action_max: self.action_max,
            meta: FitMeta {
                source: "synthetic ground truth".into(),
                ..FitMeta::default()
            },
        })
    }

    /// Random full-degree spec: harmonics `2, 4, .., n_deg`, Newton degree
    /// `l_deg` on nodes `0, levels[0..l_deg]`, frequency of degree `l_deg` on
    /// `levels[0..=l_deg]`.
    pub fn random(seed: u64, n_deg: usize, l_deg: usize, levels: &[f64]) -> Result<Self> {
        if levels.len() < l_deg + 1 {
            return Err(Error::InsufficientTori {
                needed: l_deg + 1,
                found: levels.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = vec![0.0];
        nodes.extend_from_slice(&levels[..l_deg]);
        let scale = levels[l_deg.min(levels.len() - 1)].max(1.0);
        let mut harmonics = Vec::new();
        for n in (2..=n_deg).step_by(2) {
            let amp = 0.05 / n as f64;
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let mut dd = vec![0.0];
                for l in 1..=l_deg {
                    dd.push(amp * rng.random_range(-1.0..1.0) / scale.powi(l as i32 - 1));
                }
                dd
            };
            let a_dd = draw(&mut rng);
            let b_dd = draw(&mut rng);
            harmonics.push(HarmonicSpec {
                n: n as u32,
                a_dd,
                b_dd,
            });
        }
        let omega_nodes = levels[..=l_deg].to_vec();
        let mut omega_dd = vec![2.0 + 0.05 * rng.random_range(-1.0..1.0)];
        for l in 1..=l_deg {
            omega_dd.push(0.02 * rng.random_range(-1.0..1.0) / scale.powi(l as i32));
        }
        Ok(Self {
            harmonics,
            nodes,
            omega: NewtonPoly::from_parts(omega_nodes, omega_dd)?,
            action_max: *levels.last().unwrap(),
        })
    }
}

/// The two homoclinic channels of the synthetic calibrated setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    First,
    Second,
}

/// Frequency through [`OMEGA_ANCHORS`], written in Newton form on the tori
/// `I = 1, 2, 3`.
pub fn anchored_omega() -> NewtonPoly {
    let xs: Vec<f64> = OMEGA_ANCHORS.iter().map(|a| a.0).collect();
    let ys: Vec<f64> = OMEGA_ANCHORS.iter().map(|a| a.1 * PI).collect();
    let through_anchors = newton_interpolate(&xs, &ys).expect("distinct anchors");
    let nodes = [1.0, 2.0, 3.0];
    let values: Vec<f64> = nodes.iter().map(|&x| through_anchors.eval(x)).collect();
    newton_interpolate(&nodes, &values).expect("distinct nodes")
}

fn unit_nodes() -> Vec<f64> {
    (0..=5).map(|k| k as f64).collect()
}

/// Calibrated model of the given channel: `N = 4`, Newton nodes
/// `0..=5`, domain `(0, 7]`.
///
/// The first channel has the dominant `n = 2` divided differences
/// `(0.178180, -0.097275)`, so `I' - I` has amplitude 0.203003 at `I = 1`
/// and peaks near `phi' = 2.89`. The second channel has amplitude 0.25 per
/// unit action peaking at `phi' = 0.6` and a frequency lowered by 0.12.
/// The seed draws the small quadratic n = 2 terms and the n = 4 harmonic
/// (order 1e-3).
pub fn make_channel_model(channel: Channel, seed: u64) -> SsmModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (channel as u64) << 32);
    let (a1, b1, omega) = match channel {
        Channel::First => (DOMINANT_A, DOMINANT_B, anchored_omega()),
        Channel::Second => {
            let theta: f64 = 1.2;
            let omega = anchored_omega();
            let shifted = NewtonPoly::from_parts(omega.nodes().to_vec(), {
                let mut dd = omega.divided_differences().to_vec();
                dd[0] -= 0.12;
                dd
            })
            .expect("valid nodes");
            (0.25 * theta.cos(), 0.25 * theta.sin(), shifted)
        }
    };
    let mut small = |s: f64| s * rng.random_range(-1.0..1.0);
    let n2 = HarmonicSpec {
        n: 2,
        a_dd: vec![0.0, a1, small(3e-3)],
        b_dd: vec![0.0, b1, small(3e-3)],
    };
    let n4 = HarmonicSpec {
        n: 4,
        a_dd: vec![0.0, small(1e-3), small(1e-4)],
        b_dd: vec![0.0, small(1e-3), small(1e-4)],
    };
    GroundTruthSpec {
        harmonics: vec![n2, n4],
        nodes: unit_nodes(),
        omega,
        action_max: 7.0,
    }
    .build()
    .expect("calibrated spec is valid")
}

/// Calibrated model of the first channel.
pub fn make_paper_magnitude_model(seed: u64) -> SsmModel {
    make_channel_model(Channel::First, seed)
}

/// The truncated two-coefficient model `I' = I + a I cos 2phi' + b I sin 2phi'`
/// with the dominant divided differences.
pub fn make_dominant_term_model() -> SsmModel {
    GroundTruthSpec {
        harmonics: vec![HarmonicSpec {
            n: 2,
            a_dd: vec![0.0, DOMINANT_A],
            b_dd: vec![0.0, DOMINANT_B],
        }],
        nodes: vec![0.0, 1.0],
        omega: anchored_omega(),
        action_max: 7.0,
    }
    .build()
    .expect("dominant-term spec is valid")
}

/// Forward-generates one torus per level with `samples` equispaced `phi'`.
pub fn generate_grid(m: &SsmModel, levels: &[f64], samples: usize) -> Result<ScatteringGrid> {
    let mut tori = Vec::with_capacity(levels.len());
    for &action in levels {
        if !m.in_domain(action) {
            return Err(Error::OutOfRange(format!(
                "torus level {action} outside (0, {}]",
                m.action_max
            )));
        }
        let omega = m.omega(action);
        let samples = (0..samples)
            .map(|k| {
                let phi_prime = TAU * k as f64 / samples as f64;
                let d = eval_derivs(m, action, phi_prime);
                TorusSample {
                    phi: normalize_angle(phi_prime + omega + d.d_i),
                    phi_prime,
                    action_prime: action + d.d_phi,
                }
            })
            .collect();
        tori.push(Torus { action, samples });
    }
    ScatteringGrid::new(tori)
}

/// Integer tori `1..=count`.
pub fn unit_levels(count: usize) -> Vec<f64> {
    (1..=count).map(|k| k as f64).collect()
}
