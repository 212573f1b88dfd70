//! Spatial circular restricted three-body problem in the synodic frame.
//!
//! **Primary convention.** The large primary (mass `1 - mu`) sits at
//! `P1 = (mu, 0, 0)` and the small primary (mass `mu`) at `P2 = (mu - 1, 0, 0)`.
//! Many references use the mirrored layout; with this one L1 lies on the
//! segment `(mu - 1, mu)` at distance `gamma` from the small primary.
//!
//! Equations of motion:
//!
//! ```text
//! X'' - 2 Y' = dOmega/dX,   Y'' + 2 X' = dOmega/dY,   Z'' = dOmega/dZ
//! Omega = (X^2 + Y^2) / 2 + (1 - mu) / r1 + mu / r2
//! ```

use crate::error::{Error, Result};

/// Distances below this radius to either primary are rejected.
pub const SINGULARITY_RADIUS: f64 = 1e-12;

/// Sun–Earth mass ratio.
pub const SUN_EARTH_MU: f64 = 3.040423398444176e-6;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MassRatio(f64);

impl MassRatio {
    /// Accepts `0 <= mu <= 0.5`; the closed ends are the Kepler limit and the
    /// equal-mass problem.
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_finite() && (0.0..=0.5).contains(&mu) {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidMassRatio(mu))
        }
    }

    pub fn sun_earth() -> Self {
        Self(SUN_EARTH_MU)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for MassRatio {
    fn default() -> Self {
        Self::sun_earth()
    }
}

/// Position and velocity in the rotating frame (adimensional units).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State6 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl State6 {
    pub fn new(x: f64, y: f64, z: f64, vx: f64, vy: f64, vz: f64) -> Self {
        Self {
            x,
            y,
            z,
            vx,
            vy,
            vz,
        }
    }

    pub fn at_rest(pos: [f64; 3]) -> Self {
        Self::new(pos[0], pos[1], pos[2], 0.0, 0.0, 0.0)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.vx, self.vy, self.vz]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn speed_squared(&self) -> f64 {
        self.vx * self.vx + self.vy * self.vy + self.vz * self.vz
    }

    /// Generalized momenta `PX = VX - Y`, `PY = VY + X`, `PZ = VZ`.
    pub fn to_momenta(&self) -> Momenta6 {
        Momenta6 {
            x: self.x,
            y: self.y,
            z: self.z,
            px: self.vx - self.y,
            py: self.vy + self.x,
            pz: self.vz,
        }
    }
}

/// Position and canonical momenta.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Momenta6 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl Momenta6 {
    pub fn to_state(&self) -> State6 {
        State6 {
            x: self.x,
            y: self.y,
            z: self.z,
            vx: self.px + self.y,
            vy: self.py - self.x,
            vz: self.pz,
        }
    }
}

/// Linear frequencies at L1: saddle rate and the two centre frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequencies {
    pub nu_h: f64,
    pub nu_p: f64,
    pub nu_v: f64,
}

struct Offsets {
    dx1: f64,
    dx2: f64,
    r1: f64,
    r2: f64,
}

fn offsets(pos: [f64; 3], mu: MassRatio) -> Result<Offsets> {
    let mu = mu.value();
    let [x, y, z] = pos;
    let dx1 = x - mu;
    let dx2 = x - mu + 1.0;
    let yz = y * y + z * z;
    let r1 = (dx1 * dx1 + yz).sqrt();
    let r2 = (dx2 * dx2 + yz).sqrt();
    if !(r1 >= SINGULARITY_RADIUS) {
        return Err(Error::Singularity {
            primary: 1,
            distance: r1,
        });
    }
    if !(r2 >= SINGULARITY_RADIUS) {
        return Err(Error::Singularity {
            primary: 2,
            distance: r2,
        });
    }
    Ok(Offsets { dx1, dx2, r1, r2 })
}

/// `Omega = (X^2 + Y^2)/2 + (1 - mu)/r1 + mu/r2`.
pub fn effective_potential(pos: [f64; 3], mu: MassRatio) -> Result<f64> {
    let o = offsets(pos, mu)?;
    let m = mu.value();
    Ok(0.5 * (pos[0] * pos[0] + pos[1] * pos[1]) + (1.0 - m) / o.r1 + m / o.r2)
}

/// Analytic gradient of the effective potential.
pub fn potential_gradient(pos: [f64; 3], mu: MassRatio) -> Result<[f64; 3]> {
    let o = offsets(pos, mu)?;
    let m = mu.value();
    let k1 = (1.0 - m) / (o.r1 * o.r1 * o.r1);
    let k2 = m / (o.r2 * o.r2 * o.r2);
    let [x, y, z] = pos;
    Ok([
        x - k1 * o.dx1 - k2 * o.dx2,
        y - (k1 + k2) * y,
        -(k1 + k2) * z,
    ])
}

/// Analytic Hessian of the effective potential (symmetric, row-major).
pub fn potential_hessian(pos: [f64; 3], mu: MassRatio) -> Result<[[f64; 3]; 3]> {
    let o = offsets(pos, mu)?;
    let m = mu.value();
    let [_, y, z] = pos;
    let r1_3 = o.r1.powi(3);
    let r2_3 = o.r2.powi(3);
    let a1 = (1.0 - m) / r1_3;
    let a2 = m / r2_3;
    let b1 = 3.0 * (1.0 - m) / (r1_3 * o.r1 * o.r1);
    let b2 = 3.0 * m / (r2_3 * o.r2 * o.r2);
    let d1 = [o.dx1, y, z];
    let d2 = [o.dx2, y, z];
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let diag = if i == j { -a1 - a2 } else { 0.0 };
            h[i][j] = diag + b1 * d1[i] * d1[j] + b2 * d2[i] * d2[j];
        }
    }
    h[0][0] += 1.0;
    h[1][1] += 1.0;
    Ok(h)
}

/// Time derivative of a state, packed as a `State6`.
pub fn vector_field(s: &State6, mu: MassRatio) -> Result<State6> {
    let g = potential_gradient(s.position(), mu)?;
    Ok(State6 {
        x: s.vx,
        y: s.vy,
        z: s.vz,
        vx: g[0] + 2.0 * s.vy,
        vy: g[1] - 2.0 * s.vx,
        vz: g[2],
    })
}

/// Jacobi integral `C = 2 Omega - v^2`.
pub fn jacobi_constant(s: &State6, mu: MassRatio) -> Result<f64> {
    Ok(2.0 * effective_potential(s.position(), mu)? - s.speed_squared())
}

/// `H = (PX^2 + PY^2 + PZ^2)/2 + Y PX - X PY - (1 - mu)/r1 - mu/r2`, equal to `-C/2`.
pub fn hamiltonian(m: &Momenta6, mu: MassRatio) -> Result<f64> {
    let o = offsets([m.x, m.y, m.z], mu)?;
    let k = mu.value();
    Ok(0.5 * (m.px * m.px + m.py * m.py + m.pz * m.pz) + m.y * m.px
        - m.x * m.py
        - (1.0 - k) / o.r1
        - k / o.r2)
}

fn axis_gradient(x: f64, mu: MassRatio) -> f64 {
    let m = mu.value();
    let d1 = x - m;
    let d2 = x - m + 1.0;
    x - (1.0 - m) * d1 / d1.abs().powi(3) - m * d2 / d2.abs().powi(3)
}

fn axis_curvature(x: f64, mu: MassRatio) -> f64 {
    let m = mu.value();
    let d1 = (x - m).abs();
    let d2 = (x - m + 1.0).abs();
    1.0 + 2.0 * (1.0 - m) / d1.powi(3) + 2.0 * m / d2.powi(3)
}

/// X-coordinate of L1, the root of `dOmega/dX` on the open segment between
/// the primaries. Bisection down to a 1e-10 bracket, then up to five Newton
/// steps.
pub fn locate_l1(mu: MassRatio) -> Result<f64> {
    let m = mu.value();
    if m <= 0.0 {
        return Err(Error::InvalidMassRatio(m));
    }
    // f -> -inf at the small primary, +inf at the large one.
    let mut lo = m - 1.0 + 1e-9;
    let mut hi = m - 1e-9;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if axis_gradient(mid, mu) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..5 {
        let f = axis_gradient(x, mu);
        if f == 0.0 {
            break;
        }
        let next = x - f / axis_curvature(x, mu);
        if next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Distance from L1 to the small primary.
pub fn l1_gamma(mu: MassRatio) -> Result<f64> {
    Ok(locate_l1(mu)? - (mu.value() - 1.0))
}

/// Eigenvalues `±nu_h`, `±i nu_p`, `±i nu_v` of the linearized flow at L1.
///
/// The 6x6 linearization splits into a planar 4x4 block with characteristic
/// polynomial `s^2 + (4 - Oxx - Oyy) s + (Oxx Oyy - Oxy^2)` in `s = lambda^2`
/// and a vertical 2x2 block with `s = Ozz`.
pub fn linear_frequencies(mu: MassRatio) -> Result<Frequencies> {
    let x = locate_l1(mu)?;
    let h = potential_hessian([x, 0.0, 0.0], mu)?;
    let (oxx, oyy, oxy, ozz) = (h[0][0], h[1][1], h[0][1], h[2][2]);
    let b = 4.0 - oxx - oyy;
    let c = oxx * oyy - oxy * oxy;
    let disc = b * b - 4.0 * c;
    if disc <= 0.0 {
        return Err(Error::Eigenstructure(format!(
            "planar block has complex lambda^2 (discriminant {disc:e})"
        )));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (s1, s2) = (q, c / q);
    let (s_pos, s_neg) = if s1 > s2 { (s1, s2) } else { (s2, s1) };
    if !(s_pos > 0.0 && s_neg < 0.0) {
        return Err(Error::Eigenstructure(format!(
            "planar lambda^2 roots {s_pos:e}, {s_neg:e} are not a saddle x centre"
        )));
    }
    if !(ozz < 0.0) {
        return Err(Error::Eigenstructure(format!(
            "vertical block Ozz = {ozz:e} is not a centre"
        )));
    }
    Ok(Frequencies {
        nu_h: s_pos.sqrt(),
        nu_p: (-s_neg).sqrt(),
        nu_v: (-ozz).sqrt(),
    })
}

/// The 6x6 Jacobian of [`vector_field`] at a state, row-major.
pub fn linearization(s: &State6, mu: MassRatio) -> Result<[[f64; 6]; 6]> {
    let h = potential_hessian(s.position(), mu)?;
    let mut a = [[0.0; 6]; 6];
    for i in 0..3 {
        a[i][i + 3] = 1.0;
        for j in 0..3 {
            a[i + 3][j] = h[i][j];
        }
    }
    a[3][4] = 2.0;
    a[4][3] = -2.0;
    Ok(a)
}
