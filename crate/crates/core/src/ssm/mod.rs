//! The Standard Scattering Map: a scattering map on the reduced NHIM given
//! implicitly by the generating function
//!
//! ```text
//! L(I, phi') = I phi' + Omega(I) + Lt(I, phi'),     omega(I) = Omega'(I)
//! Lt(I, phi') = sum_n [ -B_n(I)/n cos(n phi') + A_n(I)/n sin(n phi') ]
//! ```
//!
//! with `phi = phi' + omega(I) + dLt/dI` and `I' = I + dLt/dphi'`. Only even
//! harmonics are stored. `A_n`, `B_n` and `omega` are Newton polynomials in
//! the scaled action `I`.

mod diagnostics;
mod fit;
mod grid;

pub use diagnostics::{
    approximation_error, error_sweep, kam_first_order, locate_resonance, phase_portrait,
    phase_shift_bounds, twist, ErrorReport, KamCurve, PortraitOptions, PortraitOrbit,
    SweepEntry, TorusError, DIAGNOSTIC_TOL,
};
pub use fit::{fit_fourier_torus, fit_ssm, FourierCoeffs};
pub use grid::{ScatteringGrid, Torus, TorusSample};

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::newton::NewtonPoly;

/// Actions at or below this value are outside every model's domain.
pub const MIN_ACTION: f64 = 1e-9;

/// Reduces an angle to `[0, 2pi)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `[0, pi)`, the display range used for phase plots.
pub fn normalize_half_angle(a: f64) -> f64 {
    let r = a.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = normalize_angle(a + PI) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// One even harmonic `n` with its coefficient polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    pub n: u32,
    pub a: NewtonPoly,
    pub b: NewtonPoly,
}

/// Bookkeeping carried from the fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitMeta {
    pub source: String,
    /// Largest odd-harmonic magnitude seen before zeroing.
    pub odd_harmonic_max: f64,
    /// Largest deviation of a per-sample frequency estimate from its torus mean.
    pub omega_spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsmModel {
    /// Fourier degree `N`.
    pub fourier_degree: usize,
    /// Newton degree `L`.
    pub newton_degree: usize,
    pub harmonics: Vec<Harmonic>,
    pub omega: NewtonPoly,
    /// Upper end of the action domain `(0, action_max]`.
    pub action_max: f64,
    pub meta: FitMeta,
}

/// `Lt` and the derivatives needed by the map, the twist and the KAM
/// expansion, all at one `(I, phi')`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenDerivs {
    pub value: f64,
    pub d_phi: f64,
    pub d_i: f64,
    pub d_ii: f64,
    pub d_phi_i: f64,
}

/// Fixed-point controls for [`apply_sm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApplyOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 50,
        }
    }
}

impl ApplyOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Image of a point under the scattering map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmImage {
    pub action: f64,
    /// `phi'` reduced to `[0, 2pi)`.
    pub angle: f64,
    /// `phi'` before reduction, on the branch `phi - omega(I) - dLt/dI`.
    pub angle_unwrapped: f64,
    pub iterations: usize,
}

impl SsmModel {
    /// Model with no oscillatory part: a pure phase shift `phi' = phi - omega(I)`.
    pub fn phase_shift_only(omega: NewtonPoly, action_max: f64) -> Self {
        Self {
            fourier_degree: 0,
            newton_degree: omega.degree(),
            harmonics: Vec::new(),
            omega,
            action_max,
            meta: FitMeta::default(),
        }
    }

    pub fn harmonic(&self, n: u32) -> Option<&Harmonic> {
        self.harmonics.iter().find(|h| h.n == n)
    }

    pub fn omega(&self, action: f64) -> f64 {
        self.omega.eval(action)
    }

    pub fn omega_derivative(&self, action: f64) -> f64 {
        self.omega.eval_derivs(action).1
    }

    /// `(A_n(I), B_n(I))` for harmonic `n`, zero when absent.
    pub fn coefficients(&self, n: u32, action: f64) -> (f64, f64) {
        self.harmonic(n)
            .map(|h| (h.a.eval(action), h.b.eval(action)))
            .unwrap_or((0.0, 0.0))
    }

    pub fn in_domain(&self, action: f64) -> bool {
        action > MIN_ACTION && action <= self.action_max * (1.0 + 1e-12)
    }

    /// Copy with every harmonic truncated to `n <= max_n`.
    pub fn truncated(&self, max_n: u32) -> Self {
        let mut out = self.clone();
        out.harmonics.retain(|h| h.n <= max_n);
        out.fourier_degree = out.fourier_degree.min(max_n as usize);
        out
    }

    /// Copy with every harmonic coefficient multiplied by `k`.
    pub fn with_amplitude_scale(&self, k: f64) -> Self {
        let mut out = self.clone();
        for h in &mut out.harmonics {
            h.a = h.a.scaled(k);
            h.b = h.b.scaled(k);
        }
        out
    }
}

/// Evaluates `Lt` and its derivatives directly in the Newton basis.
pub fn eval_derivs(m: &SsmModel, action: f64, phi_prime: f64) -> GenDerivs {
    let mut d = GenDerivs::default();
    for h in &m.harmonics {
        let n = h.n as f64;
        let (a, da, dda) = h.a.eval_derivs(action);
        let (b, db, ddb) = h.b.eval_derivs(action);
        let (s, c) = (n * phi_prime).sin_cos();
        d.value += (-b * c + a * s) / n;
        d.d_phi += a * c + b * s;
        d.d_i += (-db * c + da * s) / n;
        d.d_ii += (-ddb * c + dda * s) / n;
        d.d_phi_i += da * c + db * s;
    }
    d
}

/// Applies the scattering map by fixed-point iteration on
/// `phi' = phi - omega(I) - dLt/dI(I, phi')` starting from `phi - omega(I)`,
/// then evaluates `I' = I + dLt/dphi'` at the converged angle.
pub fn apply_sm_detailed(
    m: &SsmModel,
    action: f64,
    phi: f64,
    opts: ApplyOptions,
) -> Result<SmImage> {
    if !m.in_domain(action) {
        return Err(Error::OutOfRange(format!(
            "action {action} outside (0, {}]",
            m.action_max
        )));
    }
    let base = phi - m.omega(action);
    let mut current = base;
    let mut iterations = 0;
    let mut step = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let next = base - eval_derivs(m, action, current).d_i;
        step = (next - current).abs();
        current = next;
        if step < opts.tol {
            let d_phi = eval_derivs(m, action, current).d_phi;
            return Ok(SmImage {
                action: action + d_phi,
                angle: normalize_angle(current),
                angle_unwrapped: current,
                iterations,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations,
        residual: step,
    })
}

/// `(I', phi')` with `phi'` in `[0, 2pi)`.
pub fn apply_sm(m: &SsmModel, action: f64, phi: f64, opts: ApplyOptions) -> Result<(f64, f64)> {
    let img = apply_sm_detailed(m, action, phi, opts)?;
    Ok((img.action, img.angle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::newton_interpolate;
    use crate::synth;

    fn zero_model() -> SsmModel {
        let omega = newton_interpolate(&[1.0, 2.0], &[2.0, 2.1]).unwrap();
        SsmModel::phase_shift_only(omega, 7.0)
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(normalize_angle(-0.5), TAU - 0.5);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert!((wrap_angle(TAU - 0.1) + 0.1).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert!((normalize_half_angle(PI + 0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_model_derivatives_vanish() {
        let d = eval_derivs(&zero_model(), 3.0, 1.2);
        assert_eq!(d, GenDerivs::default());
    }

    #[test]
    fn zero_model_is_pure_phase_shift() {
        let m = zero_model();
        let img = apply_sm_detailed(&m, 1.5, 0.4, ApplyOptions::default()).unwrap();
        assert_eq!(img.iterations, 1);
        assert_eq!(img.action, 1.5);
        assert!((img.angle - normalize_angle(0.4 - m.omega(1.5))).abs() < 1e-15);
    }

    #[test]
    fn rejects_actions_outside_domain() {
        let m = zero_model();
        assert!(matches!(
            apply_sm(&m, 0.0, 0.1, ApplyOptions::default()),
            Err(Error::OutOfRange(_))
        ));
        assert!(apply_sm(&m, 7.5, 0.1, ApplyOptions::default()).is_err());
    }

    #[test]
    fn non_convergence_reported() {
        let m = synth::make_paper_magnitude_model(1);
        let opts = ApplyOptions {
            tol: 1e-15,
            max_iter: 2,
        };
        assert!(matches!(
            apply_sm(&m, 5.0, 0.3, opts),
            Err(Error::NonConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn dominant_term_model_derivative_at_unit_action() {
        let m = synth::make_dominant_term_model();
        let d = eval_derivs(&m, 1.0, 0.0);
        assert!((d.d_phi - 0.178180).abs() < 1e-15);
    }

    #[test]
    fn dominant_term_oscillation() {
        // I' - I = a cos 2phi' + b sin 2phi' at I = 1: amplitude sqrt(a^2 + b^2),
        // peak to peak twice that.
        let m = synth::make_dominant_term_model();
        let opts = ApplyOptions::with_tol(1e-13);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..20_000 {
            let phi = TAU * k as f64 / 20_000.0;
            let (ip, _) = apply_sm(&m, 1.0, phi, opts).unwrap();
            lo = lo.min(ip);
            hi = hi.max(ip);
        }
        let amplitude = (0.178180f64.powi(2) + 0.097275f64.powi(2)).sqrt();
        assert!((amplitude - 0.203003).abs() < 1e-6);
        assert!((0.5 * (hi - lo) - amplitude).abs() < 1e-6, "{}", hi - lo);
    }

    #[test]
    fn derivative_in_action_matches_finite_difference() {
        let m = synth::make_paper_magnitude_model(3);
        let h = 1e-6;
        for k in 0..50 {
            let action = 0.5 + 6.0 * k as f64 / 49.0;
            let phi = 0.37 * k as f64;
            let fd = (eval_derivs(&m, action + h, phi).value - eval_derivs(&m, action - h, phi).value)
                / (2.0 * h);
            assert!((fd - eval_derivs(&m, action, phi).d_i).abs() < 1e-8);
            let fd2 = (eval_derivs(&m, action + h, phi).d_i - eval_derivs(&m, action - h, phi).d_i)
                / (2.0 * h);
            assert!((fd2 - eval_derivs(&m, action, phi).d_ii).abs() < 1e-8);
            let fdp = (eval_derivs(&m, action, phi + h).d_i - eval_derivs(&m, action, phi - h).d_i)
                / (2.0 * h);
            assert!((fdp - eval_derivs(&m, action, phi).d_phi_i).abs() < 1e-8);
        }
    }

    #[test]
    fn oscillatory_part_has_zero_mean() {
        let m = synth::make_paper_magnitude_model(7);
        for &action in &[0.5, 2.0, 6.5] {
            let mean: f64 = (0..256)
                .map(|k| eval_derivs(&m, action, TAU * k as f64 / 256.0).d_phi)
                .sum::<f64>()
                / 256.0;
            assert!(mean.abs() < 1e-15, "{mean:e}");
        }
    }
}
