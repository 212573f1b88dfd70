use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{eval_derivs, wrap_angle, FitMeta, Harmonic, ScatteringGrid, SsmModel};
use crate::error::{Error, Result};
use crate::newton::{newton_interpolate, NewtonPoly};

/// Real Fourier coefficients of `y(phi') = a_0 + sum_n a_n cos(n phi') + b_n sin(n phi')`,
/// indexed by `n = 0..=samples/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl FourierCoeffs {
    pub fn max_degree(&self) -> usize {
        self.a.len() - 1
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let mut y = self.a[0];
        for n in 1..self.a.len() {
            let (s, c) = (n as f64 * phi).sin_cos();
            y += self.a[n] * c + self.b[n] * s;
        }
        y
    }
}

/// DFT of values sampled at `phi'_k = origin + 2 pi k / len`.
pub fn fit_fourier_torus(values: &[f64], origin: f64) -> FourierCoeffs {
    let len = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(len);
    fft.process(&mut buf);
    let half = len / 2;
    let mut a = vec![0.0; half + 1];
    let mut b = vec![0.0; half + 1];
    for n in 0..=half {
        // sum_k y_k e^{-i n phi'_k} = e^{-i n origin} X_n
        let rot = Complex64::from_polar(1.0, -(n as f64) * origin);
        let z = buf[n] * rot;
        let scale = if n == 0 || (len.is_multiple_of(2) && n == half) {
            1.0 / len as f64
        } else {
            2.0 / len as f64
        };
        a[n] = scale * z.re;
        b[n] = -scale * z.im;
    }
    if len.is_multiple_of(2) && half > 0 {
        // Nyquist term: sin(half * phi'_k) is aliased away on the grid.
        b[half] = 0.0;
    }
    FourierCoeffs { a, b }
}

/// Fits the Standard Scattering Map of Fourier degree `n_deg` and Newton
/// degree `l_deg`.
///
/// `A_n`, `B_n` interpolate the per-torus DFT coefficients on the nodes
/// `0, I_1, ..., I_L` (value zero at `I = 0`); `omega` interpolates the
/// per-torus frequency on `I_1, ..., I_{L+1}`. Odd harmonics are dropped.
pub fn fit_ssm(grid: &ScatteringGrid, n_deg: usize, l_deg: usize) -> Result<SsmModel> {
    grid.validate()?;
    let max = grid.min_samples() / 2;
    if n_deg > max {
        return Err(Error::DegreeTooHigh {
            requested: n_deg,
            max,
        });
    }
    let found = grid.tori.len();
    if found < l_deg + 1 {
        return Err(Error::InsufficientTori {
            needed: l_deg + 1,
            found,
        });
    }

    let coeffs: Vec<FourierCoeffs> = grid
        .tori
        .iter()
        .map(|t| {
            let values: Vec<f64> = t
                .samples
                .iter()
                .map(|s| s.action_prime - t.action)
                .collect();
            fit_fourier_torus(&values, t.phase_origin())
        })
        .collect();

    let mut odd_harmonic_max = 0.0f64;
    for c in &coeffs {
        for n in (1..=c.max_degree()).step_by(2) {
            odd_harmonic_max = odd_harmonic_max.max(c.a[n].hypot(c.b[n]));
        }
    }

    let mut nodes = vec![0.0];
    nodes.extend(grid.tori.iter().take(l_deg).map(|t| t.action));
    let mut harmonics = Vec::new();
    for n in (2..=n_deg).step_by(2) {
        let mut a_vals = vec![0.0];
        let mut b_vals = vec![0.0];
        for c in coeffs.iter().take(l_deg) {
            a_vals.push(c.a[n]);
            b_vals.push(c.b[n]);
        }
        harmonics.push(Harmonic {
            n: n as u32,
            a: newton_interpolate(&nodes, &a_vals)?,
            b: newton_interpolate(&nodes, &b_vals)?,
        });
    }

    let mut model = SsmModel {
        fourier_degree: n_deg,
        newton_degree: l_deg,
        harmonics,
        omega: NewtonPoly::zero(),
        action_max: grid.max_action(),
        meta: FitMeta {
            source: format!(
                "{} tori, {} samples per torus, I in [{}, {}]",
                found,
                grid.min_samples(),
                grid.tori[0].action,
                grid.max_action()
            ),
            odd_harmonic_max,
            omega_spread: 0.0,
        },
    };

    // omega(I) = phi - phi' - dLt/dI(I, phi'), averaged over each torus.
    let mut omega_nodes = Vec::with_capacity(l_deg + 1);
    let mut omega_vals = Vec::with_capacity(l_deg + 1);
    let mut spread = 0.0f64;
    let mut previous: Option<f64> = None;
    for t in grid.tori.iter().take(l_deg + 1) {
        let raw: Vec<f64> = t
            .samples
            .iter()
            .map(|s| s.phi - s.phi_prime - eval_derivs(&model, t.action, s.phi_prime).d_i)
            .collect();
        let reference = previous.unwrap_or_else(|| super::normalize_angle(raw[0]));
        let unwrapped: Vec<f64> = raw
            .iter()
            .map(|&w| reference + wrap_angle(w - reference))
            .collect();
        let mean = unwrapped.iter().sum::<f64>() / unwrapped.len() as f64;
        for w in &unwrapped {
            spread = spread.max((w - mean).abs());
        }
        omega_nodes.push(t.action);
        omega_vals.push(mean);
        previous = Some(mean);
    }
    model.omega = newton_interpolate(&omega_nodes, &omega_vals)?;
    model.meta.omega_spread = spread;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssm::{Torus, TorusSample};
    use std::f64::consts::TAU;

    fn grid_phis(count: usize) -> Vec<f64> {
        (0..count).map(|k| TAU * k as f64 / count as f64).collect()
    }

    #[test]
    fn single_cosine() {
        let values: Vec<f64> = grid_phis(128).iter().map(|p| 0.1 * (2.0 * p).cos()).collect();
        let c = fit_fourier_torus(&values, 0.0);
        assert_eq!(c.max_degree(), 64);
        assert!((c.a[2] - 0.1).abs() < 1e-15);
        for n in 0..=64 {
            if n != 2 {
                assert!(c.a[n].abs() < 1e-14 && c.b[n].abs() < 1e-14, "n = {n}");
            }
        }
        assert!(c.b[2].abs() < 1e-14);
    }

    #[test]
    fn all_zero() {
        let c = fit_fourier_torus(&[0.0; 64], 0.0);
        assert!(c.a.iter().chain(&c.b).all(|&x| x == 0.0));
    }

    #[test]
    fn recovers_two_term_series_with_offset_origin() {
        // forward synthesis is the oracle
        let origin = 0.013;
        let f = |p: f64| 0.3 * (2.0 * p).cos() - 0.07 * (6.0 * p).sin() + 0.01;
        let values: Vec<f64> = grid_phis(32).iter().map(|p| f(p + origin)).collect();
        let c = fit_fourier_torus(&values, origin);
        assert!((c.a[0] - 0.01).abs() < 1e-12);
        assert!((c.a[2] - 0.3).abs() < 1e-12);
        assert!((c.b[6] + 0.07).abs() < 1e-12);
        assert!(c.b[2].abs() < 1e-12 && c.a[6].abs() < 1e-12);
        for k in 0..10 {
            let p = 0.61 * k as f64;
            assert!((c.eval(p) - f(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_and_tori_checks() {
        let torus = |action: f64| Torus {
            action,
            samples: grid_phis(8)
                .into_iter()
                .map(|p| TorusSample {
                    phi: p,
                    phi_prime: p,
                    action_prime: action,
                })
                .collect(),
        };
        let g = ScatteringGrid::new(vec![torus(1.0), torus(2.0)]).unwrap();
        assert!(matches!(
            fit_ssm(&g, 6, 1),
            Err(Error::DegreeTooHigh { requested: 6, max: 4 })
        ));
        assert!(matches!(
            fit_ssm(&g, 2, 2),
            Err(Error::InsufficientTori { needed: 3, found: 2 })
        ));
        assert!(fit_ssm(&g, 4, 1).is_ok());
    }
}
