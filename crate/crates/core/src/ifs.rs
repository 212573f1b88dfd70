//! The iterated function system on the reduced NHIM: the inner twist map
//! `F(I, phi) = (I, phi + nu(I))`, the transition maps `tau = F ∘ sigma ∘ F`
//! and the time attached to each step.

use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result, Stage};
use crate::ssm::{apply_sm, normalize_angle, ApplyOptions, SsmModel};

/// Upper end of the homoclinic flight-time range.
pub const T_OUT_MAX: f64 = 6.000688;
/// Lower end of the homoclinic flight-time range.
pub const T_OUT_MIN: f64 = 5.936738;

/// Inner-map frequencies tabulated on action nodes and interpolated
/// linearly in between.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerModel {
    nodes: Vec<f64>,
    nu: Vec<f64>,
    nu_p: Vec<f64>,
}

impl InnerModel {
    pub fn new(nodes: Vec<f64>, nu: Vec<f64>, nu_p: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("inner model: {msg}")));
        if nodes.len() < 2 || nodes.len() != nu.len() || nodes.len() != nu_p.len() {
            return bad("need at least two rows of equal length".into());
        }
        if nodes.iter().chain(&nu).chain(&nu_p).any(|v| !v.is_finite()) {
            return bad("non-finite entry".into());
        }
        for k in 1..nodes.len() {
            if !(nodes[k] > nodes[k - 1]) {
                return bad(format!("nodes not strictly increasing at {}", nodes[k]));
            }
            if !(nu[k] < nu[k - 1]) {
                return bad(format!("nu not strictly decreasing at I = {}", nodes[k]));
            }
        }
        if let Some(p) = nu_p.iter().find(|p| !(**p > 2.0 && **p < 2.2)) {
            return bad(format!("nu_p = {p} outside (2.0, 2.2)"));
        }
        Ok(Self { nodes, nu, nu_p })
    }

    /// Approximate table: `nu` linear from 6.1054 at `I = 0` to 6.0944 at
    /// `I = 7`, `nu_p` constant 2.0772.
    pub fn calibrated() -> Self {
        Self::new(
            vec![0.0, 7.0],
            vec![6.1054, 6.0944],
            vec![2.0772, 2.0772],
        )
        .expect("calibrated table is valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.nodes.len()).map(|k| (self.nodes[k], self.nu[k], self.nu_p[k]))
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn contains(&self, action: f64) -> bool {
        let (lo, hi) = self.range();
        action >= lo && action <= hi
    }

    fn lerp(&self, values: &[f64], action: f64) -> f64 {
        let k = self
            .nodes
            .partition_point(|&x| x <= action)
            .clamp(1, self.nodes.len() - 1);
        let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
        let s = (action - x0) / (x1 - x0);
        values[k - 1] + s * (values[k] - values[k - 1])
    }

    /// `nu(I)`; extrapolates linearly outside the table.
    pub fn nu(&self, action: f64) -> f64 {
        self.lerp(&self.nu, action)
    }

    pub fn nu_p(&self, action: f64) -> f64 {
        self.lerp(&self.nu_p, action)
    }

    fn check(&self, action: f64) -> Result<()> {
        if self.contains(action) {
            Ok(())
        } else {
            let (lo, hi) = self.range();
            Err(Error::OutOfRange(format!(
                "action {action} outside inner table [{lo}, {hi}]"
            )))
        }
    }
}

/// `(I, (phi + nu(I)) mod 2pi)`; the action is returned untouched.
pub fn apply_inner(im: &InnerModel, action: f64, phi: f64) -> Result<(f64, f64)> {
    im.check(action)?;
    Ok((action, normalize_angle(phi + im.nu(action))))
}

/// Return time `2pi / nu_p(I)` of one inner iterate.
pub fn inner_time(im: &InnerModel, action: f64) -> f64 {
    TAU / im.nu_p(action)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeModel {
    pub t_in: f64,
    pub t_out: f64,
}

impl TimeModel {
    /// Uses the longest inner return time over the table and `t_out = T_OUT_MAX`,
    /// so drift times are upper estimates.
    pub fn from_inner(im: &InnerModel) -> Self {
        let t_in = im
            .nodes
            .iter()
            .map(|&x| inner_time(im, x))
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            t_in,
            t_out: T_OUT_MAX,
        }
    }

    pub fn with_t_out(self, t_out: f64) -> Self {
        Self { t_out, ..self }
    }

    pub fn step_time(&self, label: StepLabel) -> f64 {
        match label {
            StepLabel::Inner => self.t_in,
            _ => self.t_out,
        }
    }
}

impl Default for TimeModel {
    fn default() -> Self {
        Self::from_inner(&InnerModel::calibrated())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepLabel {
    Inner,
    Tau1,
    Tau2,
    Sigma1,
    Sigma2,
}

impl StepLabel {
    pub fn code(self) -> &'static str {
        match self {
            StepLabel::Inner => "F",
            StepLabel::Tau1 => "T1",
            StepLabel::Tau2 => "T2",
            StepLabel::Sigma1 => "S1",
            StepLabel::Sigma2 => "S2",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Some(match s {
            "F" => StepLabel::Inner,
            "T1" => StepLabel::Tau1,
            "T2" => StepLabel::Tau2,
            "S1" => StepLabel::Sigma1,
            "S2" => StepLabel::Sigma2,
            _ => return None,
        })
    }

    /// Transition label for channel index 0 or 1.
    pub fn tau(channel: usize) -> Self {
        if channel == 0 {
            StepLabel::Tau1
        } else {
            StepLabel::Tau2
        }
    }

    pub fn sigma(channel: usize) -> Self {
        if channel == 0 {
            StepLabel::Sigma1
        } else {
            StepLabel::Sigma2
        }
    }

    /// 1 or 2 for scattering and transition steps.
    pub fn channel(self) -> Option<usize> {
        match self {
            StepLabel::Inner => None,
            StepLabel::Tau1 | StepLabel::Sigma1 => Some(1),
            StepLabel::Tau2 | StepLabel::Sigma2 => Some(2),
        }
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionImage {
    pub action: f64,
    pub angle: f64,
    /// The scattering image left the top of the inner table; the final
    /// inner step used `nu` at the table edge.
    pub clipped: bool,
}

/// `tau = F ∘ sigma ∘ F`, applied inner, scattering, inner.
pub fn apply_transition(
    m: &SsmModel,
    im: &InnerModel,
    action: f64,
    phi: f64,
    opts: ApplyOptions,
) -> Result<TransitionImage> {
    let (i1, p1) = apply_inner(im, action, phi).map_err(|_| Error::DomainExit {
        stage: Stage::FirstInner,
        action,
    })?;
    if !m.in_domain(i1) {
        return Err(Error::DomainExit {
            stage: Stage::Scattering,
            action: i1,
        });
    }
    let (i2, p2) = apply_sm(m, i1, p1, opts)?;
    let (lo, hi) = im.range();
    if i2 < lo || !(i2 > crate::ssm::MIN_ACTION) {
        return Err(Error::DomainExit {
            stage: Stage::SecondInner,
            action: i2,
        });
    }
    let clipped = i2 > hi;
    let angle = normalize_angle(p2 + im.nu(i2.min(hi)));
    Ok(TransitionImage {
        action: i2,
        angle,
        clipped,
    })
}
