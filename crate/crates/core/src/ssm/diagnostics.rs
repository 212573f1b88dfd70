use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex64;

use super::{
    apply_sm, apply_sm_detailed, eval_derivs, fit_ssm, wrap_angle, ApplyOptions, ScatteringGrid,
    SsmModel,
};
use crate::error::{Error, Result};

/// Fixed-point tolerance used when a diagnostic needs the map to high accuracy.
pub const DIAGNOSTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusError {
    pub action: f64,
    pub eps_action: f64,
    pub eps_angle: f64,
}

/// Largest discrepancies between a model and tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub eps_action: f64,
    pub eps_angle: f64,
    pub per_torus: Vec<TorusError>,
}

impl ErrorReport {
    pub fn max(&self) -> f64 {
        self.eps_action.max(self.eps_angle)
    }

    /// Same report restricted to tori with `action <= max_action`.
    pub fn restricted(&self, max_action: f64) -> Self {
        let per_torus: Vec<TorusError> = self
            .per_torus
            .iter()
            .filter(|t| t.action <= max_action)
            .copied()
            .collect();
        Self {
            eps_action: per_torus.iter().map(|t| t.eps_action).fold(0.0, f64::max),
            eps_angle: per_torus.iter().map(|t| t.eps_angle).fold(0.0, f64::max),
            per_torus,
        }
    }
}

/// Maximum over all grid samples of `|I'_model - I'|` and `|phi'_model - phi'|`
/// (angles compared modulo `2 pi`).
pub fn approximation_error(m: &SsmModel, grid: &ScatteringGrid, tol: f64) -> Result<ErrorReport> {
    let opts = ApplyOptions::with_tol(tol);
    let mut per_torus = Vec::with_capacity(grid.tori.len());
    for t in &grid.tori {
        let mut e = TorusError {
            action: t.action,
            eps_action: 0.0,
            eps_angle: 0.0,
        };
        for s in &t.samples {
            let (ip, pp) = apply_sm(m, t.action, s.phi, opts)?;
            e.eps_action = e.eps_action.max((ip - s.action_prime).abs());
            e.eps_angle = e.eps_angle.max(wrap_angle(pp - s.phi_prime).abs());
        }
        per_torus.push(e);
    }
    Ok(ErrorReport {
        eps_action: per_torus.iter().map(|t| t.eps_action).fold(0.0, f64::max),
        eps_angle: per_torus.iter().map(|t| t.eps_angle).fold(0.0, f64::max),
        per_torus,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub fourier_degree: usize,
    pub newton_degree: usize,
    /// `None` when the fit or the map evaluation failed for this pair.
    pub report: Option<ErrorReport>,
}

/// Fits and scores every `(N, L)` pair.
pub fn error_sweep(
    grid: &ScatteringGrid,
    fourier_degrees: &[usize],
    newton_degrees: &[usize],
    tol: f64,
) -> Vec<SweepEntry> {
    let mut out = Vec::new();
    for &n in fourier_degrees {
        for &l in newton_degrees {
            let report = fit_ssm(grid, n, l)
                .and_then(|m| approximation_error(&m, grid, tol))
                .ok();
            out.push(SweepEntry {
                fourier_degree: n,
                newton_degree: l,
                report,
            });
        }
    }
    out
}

/// Enclosure `[lo, hi]` of the phase shift `phi' - phi = -omega(I) - dLt/dI`,
/// with the maximum of `|dLt/dI|` taken over `n_samples` equispaced `phi'`.
pub fn phase_shift_bounds(m: &SsmModel, action: f64, n_samples: usize) -> Result<(f64, f64)> {
    if n_samples < 64 {
        return Err(Error::InvalidConfig(format!(
            "phase shift bounds need at least 64 samples, got {n_samples}"
        )));
    }
    let peak = (0..n_samples)
        .map(|k| {
            eval_derivs(m, action, TAU * k as f64 / n_samples as f64)
                .d_i
                .abs()
        })
        .fold(0.0, f64::max);
    let w = m.omega(action);
    Ok((-w - peak, -w + peak))
}

/// Twist `dphi'/dI = -(omega'(I) + d2Lt/dI2) / (1 + d2Lt/dphi'dI)`.
pub fn twist(m: &SsmModel, action: f64, phi_prime: f64) -> Result<f64> {
    let d = eval_derivs(m, action, phi_prime);
    let denom = 1.0 + d.d_phi_i;
    if denom.abs() <= 1e-8 {
        return Err(Error::SingularTwist(denom));
    }
    Ok(-(m.omega_derivative(action) + d.d_ii) / denom)
}

/// First-order approximation `I = I0 + h(phi)` of the invariant curve near
/// the torus `I0`, with `h(phi) = sum_{0<|n|<=N} h_n e^{i n phi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KamCurve {
    pub action0: f64,
    pub omega0: f64,
    /// `(n, h_n)` for `n = +-2, +-4, ...`.
    pub coeffs: Vec<(i32, Complex64)>,
}

impl KamCurve {
    pub fn coefficient(&self, n: i32) -> Complex64 {
        self.coeffs
            .iter()
            .find(|(k, _)| *k == n)
            .map_or(Complex64::new(0.0, 0.0), |(_, h)| *h)
    }

    pub fn offset(&self, phi: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(n, h)| (h * Complex64::from_polar(1.0, *n as f64 * phi)).re)
            .sum()
    }

    pub fn action_at(&self, phi: f64) -> f64 {
        self.action0 + self.offset(phi)
    }
}

/// `h_n = -C_n / (e^{i n omega0} - 1)` with `C_n = (A_n - i B_n)/2`,
/// `C_{-n} = conj(C_n)`.
pub fn kam_first_order(m: &SsmModel, action0: f64) -> Result<KamCurve> {
    let omega0 = m.omega(action0);
    let mut coeffs = Vec::with_capacity(2 * m.harmonics.len());
    for h in &m.harmonics {
        let n = h.n as i32;
        let divisor = Complex64::from_polar(1.0, n as f64 * omega0) - 1.0;
        if divisor.norm() <= 1e-6 {
            return Err(Error::Resonance {
                n,
                divisor: divisor.norm(),
            });
        }
        let c = Complex64::new(h.a.eval(action0), -h.b.eval(action0)) * 0.5;
        let hn = -c / divisor;
        coeffs.push((n, hn));
        coeffs.push((-n, hn.conj()));
    }
    Ok(KamCurve {
        action0,
        omega0,
        coeffs,
    })
}

/// Action where `omega(I) / pi = p / q`, by bisection over `[0, action_max]`.
pub fn locate_resonance(m: &SsmModel, p: u32, q: u32) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidConfig("resonance denominator is zero".into()));
    }
    let target = PI * p as f64 / q as f64;
    let f = |x: f64| m.omega(x) - target;
    let (mut lo, mut hi) = (0.0, m.action_max);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::OutOfRange(format!(
            "omega/pi = {p}/{q} not bracketed by omega on [0, {}] (omega/pi from {} to {})",
            m.action_max,
            m.omega(lo) / PI,
            m.omega(hi) / PI
        )));
    }
    let lo_sign = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitOptions {
    pub orbits: usize,
    pub iterations: usize,
    /// Seed line `{I in (0, action_max], phi = phi0}`.
    pub phi0: f64,
    pub apply: ApplyOptions,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        Self {
            orbits: 100,
            iterations: 1000,
            phi0: 0.0,
            apply: ApplyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitOrbit {
    pub id: usize,
    pub start: (f64, f64),
    /// Iterates 1..=k as `(I, phi)`, `phi` in `[0, 2pi)`.
    pub points: Vec<(f64, f64)>,
    /// Set when the orbit left the domain and was cut short.
    pub escaped: bool,
}

/// Iterates the map from `orbits` seeds equispaced on `(0, action_max]`
/// (`I_k = action_max (k + 1) / orbits`).
pub fn phase_portrait(m: &SsmModel, opts: &PortraitOptions) -> Result<Vec<PortraitOrbit>> {
    let mut out = Vec::with_capacity(opts.orbits);
    for id in 0..opts.orbits {
        let action = m.action_max * (id + 1) as f64 / opts.orbits as f64;
        let mut point = (action, super::normalize_angle(opts.phi0));
        let mut orbit = PortraitOrbit {
            id,
            start: point,
            points: Vec::with_capacity(opts.iterations),
            escaped: false,
        };
        for _ in 0..opts.iterations {
            if !m.in_domain(point.0) {
                orbit.escaped = true;
                break;
            }
            let img = apply_sm_detailed(m, point.0, point.1, opts.apply)?;
            point = (img.action, img.angle);
            if !m.in_domain(point.0) {
                orbit.escaped = true;
                break;
            }
            orbit.points.push(point);
        }
        out.push(orbit);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::newton_interpolate;
    use crate::ssm::SsmModel;
    use crate::synth;

    fn zero_model() -> SsmModel {
        let omega = newton_interpolate(&[1.0, 2.0, 3.0], &[2.0, 2.05, 2.12]).unwrap();
        SsmModel::phase_shift_only(omega, 7.0)
    }

    #[test]
    fn bounds_of_pure_shift_collapse() {
        let m = zero_model();
        let (lo, hi) = phase_shift_bounds(&m, 2.5, 64).unwrap();
        assert_eq!(lo, -m.omega(2.5));
        assert_eq!(hi, -m.omega(2.5));
        assert!(phase_shift_bounds(&m, 2.5, 32).is_err());
    }

    #[test]
    fn bounds_grow_with_refinement() {
        let m = synth::make_paper_magnitude_model(2);
        for &action in &[0.7, 3.3, 6.1] {
            let (lo1, hi1) = phase_shift_bounds(&m, action, 64).unwrap();
            let (lo2, hi2) = phase_shift_bounds(&m, action, 128).unwrap();
            assert!(lo2 <= lo1 && hi2 >= hi1);
            assert!(lo1 <= hi1);
        }
    }

    #[test]
    fn twist_of_pure_shift() {
        let m = zero_model();
        let t = twist(&m, 2.2, 0.4).unwrap();
        assert!((t + m.omega_derivative(2.2)).abs() < 1e-15);
    }

    #[test]
    fn kam_zero_and_resonant() {
        let k = kam_first_order(&synth::make_paper_magnitude_model(1).with_amplitude_scale(0.0), 2.0)
            .unwrap();
        assert!(k.coeffs.iter().all(|(_, h)| h.norm() == 0.0));

        let omega = newton_interpolate(&[1.0], &[PI]).unwrap();
        let mut m = synth::make_paper_magnitude_model(1);
        m.omega = omega;
        assert!(matches!(
            kam_first_order(&m, 1.0),
            Err(Error::Resonance { n: 2, .. })
        ));
    }

    #[test]
    fn kam_coefficients_are_conjugate_pairs() {
        let m = synth::make_paper_magnitude_model(4);
        let k = kam_first_order(&m, 1.3).unwrap();
        for n in [2, 4] {
            assert_eq!(k.coefficient(-n), k.coefficient(n).conj());
        }
        // h is real
        let z: Complex64 = k
            .coeffs
            .iter()
            .map(|(n, h)| h * Complex64::from_polar(1.0, *n as f64 * 0.77))
            .sum();
        assert!(z.im.abs() < 1e-15);
    }

    #[test]
    fn resonance_out_of_range() {
        let m = zero_model();
        // omega/pi spans roughly [0.63, 0.83] on [0, 7]
        assert!(matches!(locate_resonance(&m, 1, 7), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn portrait_of_pure_shift_keeps_levels() {
        let m = zero_model();
        let opts = PortraitOptions {
            orbits: 10,
            iterations: 50,
            ..Default::default()
        };
        let orbits = phase_portrait(&m, &opts).unwrap();
        assert_eq!(orbits.len(), 10);
        for o in &orbits {
            assert_eq!(o.points.len(), 50);
            assert!(!o.escaped);
            assert!(o.points.iter().all(|p| p.0 == o.start.0));
        }
    }
}
