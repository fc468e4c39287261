//! Exact trajectory in a constant uniform electric field, rapidity windows
//! and the reduced mode variables `(z, xi, nu, Lambda)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::DerivedConstants;

/// Position and velocity (over c) at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub position: [f64; 3],
    pub beta: [f64; 3],
}

/// Closed-form trajectory, normalised so that `r(0) = r0` and `u(0) = u0`.
pub fn trajectory(d: &DerivedConstants, t: f64) -> Result<TrajectoryPoint> {
    d.require_field()?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument("trajectory time must be finite".into()));
    }
    let (eps, rho, c) = (d.epsilon, d.rho, d.c);
    let v = eps * t + d.u_par / c;
    let v0 = d.u_par / c;
    let s = rho.hypot(v);
    let s0 = rho.hypot(v0);
    let shift = (v / rho).asinh() - (v0 / rho).asinh();
    let [ux, uy] = d.u_perp;
    let position = [
        d.r0[0] + ux / eps * shift,
        d.r0[1] + uy / eps * shift,
        d.r0[2] + c / eps * (s - s0),
    ];
    let beta = [ux / c / s, uy / c / s, v / s];
    Ok(TrajectoryPoint { position, beta })
}

/// Rapidity `eta(t) = asinh(eps t / rho + u_par / (rho c))`.
pub fn eta_of_t(d: &DerivedConstants, t: f64) -> f64 {
    (d.epsilon * t / d.rho + d.u_par / (d.rho * d.c)).asinh()
}

/// Inverse of [`eta_of_t`].
pub fn t_of_eta(d: &DerivedConstants, eta: f64) -> f64 {
    -d.u_par / (d.epsilon * d.c) + d.rho / d.epsilon * eta.sinh()
}

/// `d eta / dt = eps / (rho cosh eta)`.
pub fn eta_rate(d: &DerivedConstants, eta: f64) -> f64 {
    d.epsilon / (d.rho * eta.cosh())
}

/// An end of an integration window. Infinite ends are explicit, never large floats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl Endpoint {
    pub fn finite(self) -> Option<f64> {
        match self {
            Endpoint::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    pub fn shifted(self, by: f64) -> Endpoint {
        match self {
            Endpoint::Finite(x) => Endpoint::Finite(x + by),
            other => other,
        }
    }

    fn ordinal(self) -> f64 {
        match self {
            Endpoint::NegInfinity => f64::NEG_INFINITY,
            Endpoint::Finite(x) => x,
            Endpoint::PosInfinity => f64::INFINITY,
        }
    }
}

/// A window in a rapidity-like variable: `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Result<Self> {
        if lo.ordinal().is_nan() || hi.ordinal().is_nan() || lo.ordinal() > hi.ordinal() {
            return Err(Error::InvalidArgument(format!(
                "window must satisfy lo <= hi, got {:?} .. {:?}",
                lo, hi
            )));
        }
        if lo == Endpoint::PosInfinity || hi == Endpoint::NegInfinity {
            return Err(Error::InvalidArgument("degenerate infinite window".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn finite(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Endpoint::Finite(lo), Endpoint::Finite(hi))
    }

    pub fn full() -> Self {
        Self { lo: Endpoint::NegInfinity, hi: Endpoint::PosInfinity }
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Endpoint::Finite(a), Endpoint::Finite(b)) if a == b)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Maps `eta`-window to `u = eta - xi`.
    pub fn shifted(&self, by: f64) -> Self {
        Self { lo: self.lo.shifted(by), hi: self.hi.shifted(by) }
    }

    pub fn length(&self) -> f64 {
        self.hi.ordinal() - self.lo.ordinal()
    }
}

/// Evaluation window in lab time, stored as rapidities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub eta: Interval,
}

impl Window {
    pub fn from_eta(eta_in: f64, eta: f64) -> Result<Self> {
        Ok(Self { eta: Interval::finite(eta_in, eta)? })
    }

    /// `None` stands for the corresponding infinite limit.
    pub fn from_times(d: &DerivedConstants, t_in: Option<f64>, t: Option<f64>) -> Result<Self> {
        d.require_field()?;
        let lo = t_in.map_or(Endpoint::NegInfinity, |t| Endpoint::Finite(eta_of_t(d, t)));
        let hi = t.map_or(Endpoint::PosInfinity, |t| Endpoint::Finite(eta_of_t(d, t)));
        Ok(Self { eta: Interval::new(lo, hi)? })
    }

    /// `t_in = -infinity`, upper end at `eta`.
    pub fn half_infinite(eta: f64) -> Self {
        Self { eta: Interval { lo: Endpoint::NegInfinity, hi: Endpoint::Finite(eta) } }
    }

    /// Symmetric window `t = -t_in = T/2`; `None` means `T = infinity`.
    pub fn symmetric(d: &DerivedConstants, period: Option<f64>) -> Result<Self> {
        match period {
            Some(p) if p < 0.0 || !p.is_finite() => Err(Error::InvalidArgument(format!(
                "symmetric window needs finite T >= 0, got {}",
                p
            ))),
            Some(p) => Self::from_times(d, Some(-0.5 * p), Some(0.5 * p)),
            None => Ok(Self { eta: Interval::full() }),
        }
    }

    pub fn eta_in(&self) -> Endpoint {
        self.eta.lo
    }

    pub fn eta_hi(&self) -> Endpoint {
        self.eta.hi
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// The window in `u = eta - xi`.
    pub fn u_window(&self, xi: f64) -> Interval {
        self.eta.shifted(-xi)
    }
}

/// A photon wave vector `(k_x, k_y, k_par)` with `k_par` along the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveVector {
    pub kx: f64,
    pub ky: f64,
    pub kpar: f64,
}

impl WaveVector {
    pub fn new(kx: f64, ky: f64, kpar: f64) -> Self {
        Self { kx, ky, kpar }
    }

    /// From cylindrical coordinates; `azimuth` is measured from the x axis.
    pub fn cylindrical(kperp: f64, kpar: f64, azimuth: f64) -> Self {
        Self { kx: kperp * azimuth.cos(), ky: kperp * azimuth.sin(), kpar }
    }

    /// From `|k|` and polar angle to the field, in the `(k_x, k_par)` plane rotated by `phi`.
    pub fn spherical(k0: f64, theta: f64, phi: f64) -> Self {
        let kp = k0 * theta.sin();
        Self { kx: kp * phi.cos(), ky: kp * phi.sin(), kpar: k0 * theta.cos() }
    }

    pub fn kperp(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    pub fn k0(&self) -> f64 {
        self.kperp().hypot(self.kpar)
    }

    /// Polar angle to the field, in `[0, pi]`.
    pub fn theta(&self) -> f64 {
        self.kperp().atan2(self.kpar)
    }

    pub fn polar_azimuth(&self) -> f64 {
        self.ky.atan2(self.kx)
    }

    pub fn unit(&self) -> [f64; 3] {
        let k = self.k0();
        [self.kx / k, self.ky / k, self.kpar / k]
    }

    /// `|k| - k_par` without cancellation.
    pub fn k_minus_kpar(&self) -> f64 {
        let k = self.k0();
        if self.kpar > 0.0 {
            let kp = self.kperp();
            kp * kp / (k + self.kpar)
        } else {
            k - self.kpar
        }
    }

    /// `|k| + k_par` without cancellation.
    pub fn k_plus_kpar(&self) -> f64 {
        let k = self.k0();
        if self.kpar < 0.0 {
            let kp = self.kperp();
            kp * kp / (k - self.kpar)
        } else {
            k + self.kpar
        }
    }
}

/// Dimensionless mode variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedMode {
    pub z: f64,
    pub xi: f64,
    pub nu: f64,
    /// `c^2 k0 / a`.
    pub lambda: f64,
    /// `k_par / |k|`.
    pub cos_theta: f64,
    /// Coefficients of the phase `A e^eta - B e^-eta - nu eta` in rapidity
    /// form; finite on the field axis where `xi` is not.
    pub a_coef: f64,
    pub b_coef: f64,
}

fn check_positive_field(d: &DerivedConstants) -> Result<()> {
    d.require_field()?;
    if d.epsilon < 0.0 {
        return Err(Error::InvalidConfig(
            "reduced variables need qE > 0; orient the field along the force".into(),
        ));
    }
    Ok(())
}

/// Exponential-form coefficients `(A, B)`, valid on the axis too.
pub fn phase_coefficients(d: &DerivedConstants, k: &WaveVector) -> Result<(f64, f64)> {
    check_positive_field(d)?;
    let scale = d.rho * d.c / d.epsilon;
    Ok((0.5 * scale * k.k_minus_kpar(), 0.5 * scale * k.k_plus_kpar()))
}

/// `z = (c rho / eps) |k_perp|`, `xi = asinh(k_par / |k_perp|)`,
/// `nu = k_perp . u_perp / eps`, `Lambda = c^2 k0 / a`.
pub fn reduce_mode(d: &DerivedConstants, k: &WaveVector) -> Result<ReducedMode> {
    check_positive_field(d)?;
    let kperp = k.kperp();
    let k0 = k.k0();
    let xi = if kperp > 0.0 {
        (k.kpar / kperp).asinh()
    } else if k.kpar == 0.0 {
        0.0
    } else {
        return Err(Error::OnAxis);
    };
    let (a_coef, b_coef) = phase_coefficients(d, k)?;
    Ok(ReducedMode {
        z: d.c * d.rho / d.epsilon * kperp,
        xi,
        nu: (k.kx * d.u_perp[0] + k.ky * d.u_perp[1]) / d.epsilon,
        lambda: d.c * d.c * k0 / d.accel,
        cos_theta: if k0 > 0.0 { k.kpar / k0 } else { 0.0 },
        a_coef,
        b_coef,
    })
}

/// Recovers `(|k_perp|, k_par)` from `(z, xi)`.
pub fn unreduce(d: &DerivedConstants, z: f64, xi: f64) -> (f64, f64) {
    let s = d.epsilon / (d.rho * d.c);
    (z * s, z * xi.sinh() * s)
}

/// Phase of the amplitude integrand.
///
/// `Phi(eta') = z sinh(eta' - xi) - nu eta' + C`, `phi(u') = z sinh u' - nu u'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseContext {
    pub constant: f64,
    pub z: f64,
    pub xi: f64,
    pub nu: f64,
}

impl PhaseContext {
    pub fn new(d: &DerivedConstants, k: &WaveVector, t_in: f64) -> Result<Self> {
        let m = reduce_mode(d, k)?;
        let omega = d.c * k.k0();
        let kr = k.kx * d.r0[0] + k.ky * d.r0[1] + k.kpar * d.r0[2];
        let constant = -omega * (d.u_par / (d.c * d.epsilon) + t_in) - kr
            + m.nu * (d.u_par / (d.c * d.rho)).asinh();
        Ok(Self { constant, z: m.z, xi: m.xi, nu: m.nu })
    }

    pub fn big_phi(&self, eta: f64) -> f64 {
        self.z * (eta - self.xi).sinh() - self.nu * eta + self.constant
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.z * u.sinh() - self.nu * u
    }

    pub fn phi_prime(&self, u: f64) -> f64 {
        self.z * u.cosh() - self.nu
    }
}
