//! Adaptive Runge–Kutta–Fehlberg 7(8) integration of the RTBP flow and
//! crossing detection on the XZ-plane.

use crate::error::{Error, Result};
use crate::rtbp::{vector_field, MassRatio, State6};

const STAGES: usize = 13;

// Stage nodes; the field is autonomous so only the tests read them.
#[cfg_attr(not(test), allow(dead_code))]
const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    1.0 / 2.0,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [2.0 / 27.0, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.0 / 36.0, 1.0 / 12.0, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0., 0., 0., 0., 0., 0., 0.],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        2.0,
        0.0,
        0.0,
        -53.0 / 6.0,
        704.0 / 45.0,
        -107.0 / 9.0,
        67.0 / 90.0,
        3.0,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.,
        0.,
        0.,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.,
        0.,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// Eighth-order weights; the seventh-order solution differs only in stages
/// 1, 11, 12 and 13, which gives the error estimate below.
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

const ERR_WEIGHT: f64 = 41.0 / 840.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Absolute local error bound per step, max norm.
    pub local_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Horizon for section searches.
    pub t_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            local_tol: 1e-14,
            h_init: 1e-2,
            h_min: 1e-13,
            h_max: 0.5,
            t_max: 50.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.local_tol > 0.0) {
            return Err(Error::InvalidConfig("local_tol must be positive".into()));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return Err(Error::InvalidConfig(
                "need 0 < h_min <= h_init <= h_max".into(),
            ));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::InvalidConfig("t_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionDirection {
    Positive,
    Negative,
}

impl SectionDirection {
    pub fn sign(self) -> f64 {
        match self {
            SectionDirection::Positive => 1.0,
            SectionDirection::Negative => -1.0,
        }
    }
}

/// Crossing of the XZ-plane `{Y = 0}` with the requested sign of `VY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionEvent {
    pub direction: SectionDirection,
}

impl SectionEvent {
    pub fn xz_plane(direction: SectionDirection) -> Self {
        Self { direction }
    }
}

fn rhs(y: &[f64; 6], mu: MassRatio) -> Result<[f64; 6]> {
    Ok(vector_field(&State6::from_array(*y), mu)?.to_array())
}

/// One RKF7(8) step. Returns the eighth-order solution and the max-norm
/// error estimate.
fn rkf78_step(y: &[f64; 6], h: f64, mu: MassRatio) -> Result<([f64; 6], f64)> {
    let mut k = [[0.0f64; 6]; STAGES];
    k[0] = rhs(y, mu)?;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..6 {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs(&ys, mu)?;
    }
    let mut out = *y;
    let mut err = 0.0f64;
    for i in 0..6 {
        let mut acc = 0.0;
        for s in 0..STAGES {
            acc += B8[s] * k[s][i];
        }
        out[i] += h * acc;
        let e = (h * ERR_WEIGHT * (k[0][i] + k[10][i] - k[11][i] - k[12][i])).abs();
        err = err.max(e);
    }
    Ok((out, err))
}

struct Stepper {
    cfg: IntegratorConfig,
    mu: MassRatio,
    h: f64,
    prev_err_ratio: f64,
}

impl Stepper {
    fn new(cfg: IntegratorConfig, mu: MassRatio, dir: f64) -> Self {
        Self {
            cfg,
            mu,
            h: dir * cfg.h_init,
            prev_err_ratio: 1.0,
        }
    }

    /// Takes one accepted step no longer than `limit` (signed; `None` for
    /// unlimited) and returns `(new_state, step_taken)`.
    fn advance(&mut self, t: f64, y: &[f64; 6], limit: Option<f64>) -> Result<([f64; 6], f64)> {
        let tol = self.cfg.local_tol;
        loop {
            let mut h = self.h;
            let mut truncated = false;
            if let Some(lim) = limit {
                if h.abs() >= lim.abs() {
                    h = lim;
                    truncated = true;
                }
            }
            let (y_new, err) = rkf78_step(y, h, self.mu)?;
            let ratio = (err / tol).max(1e-10);
            if err <= tol {
                // PI controller on the accepted step.
                let fac = 0.9 * ratio.powf(-0.7 / 8.0) * self.prev_err_ratio.powf(0.4 / 8.0);
                let fac = fac.clamp(0.2, 5.0);
                self.prev_err_ratio = ratio.max(1e-4);
                if !truncated {
                    let next = (h.abs() * fac).min(self.cfg.h_max);
                    self.h = h.signum() * next;
                }
                return Ok((y_new, h));
            }
            let fac = (0.9 * ratio.powf(-1.0 / 8.0)).clamp(0.1, 0.9);
            let next = h.abs() * fac;
            if next < self.cfg.h_min {
                return Err(Error::StepUnderflow { t, h: next });
            }
            self.h = h.signum() * next;
        }
    }
}

/// Integrates from `s` over the signed duration `t_final`.
pub fn integrate(s: &State6, mu: MassRatio, t_final: f64, cfg: &IntegratorConfig) -> Result<State6> {
    cfg.validate()?;
    if t_final == 0.0 {
        return Ok(*s);
    }
    let dir = t_final.signum();
    let mut stepper = Stepper::new(*cfg, mu, dir);
    let mut y = s.to_array();
    let mut t = 0.0;
    while (t_final - t) * dir > 0.0 {
        let (y_new, h) = stepper.advance(t, &y, Some(t_final - t))?;
        y = y_new;
        if (t_final - t - h) * dir <= 0.0 || (t_final - t - h).abs() <= 1e-15 * t_final.abs() {
            t = t_final;
        } else {
            t += h;
        }
    }
    Ok(State6::from_array(y))
}

/// Integrates forward until the next crossing of the XZ-plane in the
/// requested direction and returns the crossing state and time.
///
/// A state starting on the plane does not count as a crossing. The crossing
/// time is refined by Newton's method on `Y(t)` (derivative `VY`), where
/// `Y(t)` is evaluated by integrating from the start of the bracketing step;
/// iterates leaving the bracket fall back to bisection.
pub fn integrate_to_section(
    s: &State6,
    mu: MassRatio,
    ev: SectionEvent,
    cfg: &IntegratorConfig,
) -> Result<(State6, f64)> {
    cfg.validate()?;
    let sign = ev.direction.sign();
    let mut stepper = Stepper::new(*cfg, mu, 1.0);
    let mut y = s.to_array();
    let mut t = 0.0;
    while t < cfg.t_max {
        let (y_new, h) = stepper.advance(t, &y, Some(cfg.t_max - t))?;
        let g0 = sign * y[1];
        let g1 = sign * y_new[1];
        if g0 < 0.0 && g1 >= 0.0 {
            let start = State6::from_array(y);
            let (state, dt) = refine_crossing(&start, mu, h, cfg)?;
            return Ok((state, t + dt));
        }
        y = y_new;
        t += h;
    }
    Err(Error::NoCrossing { t_max: cfg.t_max })
}

fn refine_crossing(
    start: &State6,
    mu: MassRatio,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<(State6, f64)> {
    let inner = IntegratorConfig {
        h_init: cfg.h_init.min(h).max(cfg.h_min),
        ..*cfg
    };
    let y0 = start.y;
    let end = integrate(start, mu, h, &inner)?;
    let (mut lo, mut hi) = (0.0, h);
    let (mut g_lo, g_hi) = (y0, end.y);
    if g_hi == 0.0 {
        return Ok((end, h));
    }
    let mut dt = lo - g_lo * (hi - lo) / (g_hi - g_lo);
    let mut state = integrate(start, mu, dt, &inner)?;
    for _ in 0..30 {
        if state.y.abs() < 1e-14 {
            break;
        }
        // Keep the bracket consistent with the sign of the event function.
        if (state.y < 0.0) == (g_lo < 0.0) {
            lo = dt;
            g_lo = state.y;
        } else {
            hi = dt;
        }
        let mut next = dt - state.y / state.vy;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == dt {
            break;
        }
        dt = next;
        state = integrate(start, mu, dt, &inner)?;
    }
    Ok((state, dt))
}
