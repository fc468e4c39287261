//! Amplitude integrals `I1 = int e^{i Phi} d eta`, `I2 = int sinh(eta) e^{i Phi} d eta`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{phase_coefficients, reduce_mode, Endpoint, Interval, WaveVector, Window};
use crate::quadrature::{QuadResult, QuadSpec};
use crate::specfun::{special_value, ExpPhase, MacdonaldOptions, Method, SpecialValue};
use crate::units::DerivedConstants;

/// How the amplitudes are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Route {
    /// Moments of the rapidity-form phase `A e^eta - B e^-eta - nu eta`.
    /// Well conditioned everywhere, including the field axis.
    #[default]
    Rapidity,
    /// Through the incomplete Macdonald function `K` and the combination `S`.
    Reduced,
    /// Plain real-axis quadrature; finite windows only.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeVector {
    pub i1: Complex64,
    pub i2: Complex64,
    pub error: f64,
}

impl AmplitudeVector {
    pub const ZERO: Self = Self { i1: Complex64 { re: 0.0, im: 0.0 }, i2: Complex64 { re: 0.0, im: 0.0 }, error: 0.0 };

    /// `(u_perp / c I1, rho I2)`.
    pub fn assembled(&self, d: &DerivedConstants) -> [Complex64; 3] {
        [self.i1 * (d.u_perp[0] / d.c), self.i1 * (d.u_perp[1] / d.c), self.i2 * d.rho]
    }

    /// `|I|^2 - |n . I|^2`, the sum over the two transverse polarizations,
    /// evaluated as `|I - n (n . I)|^2`.
    pub fn polarization_sum(&self, d: &DerivedConstants, k: &WaveVector) -> f64 {
        let v = self.assembled(d);
        let n = k.unit();
        let proj = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
        (0..3).map(|i| (v[i] - proj * n[i]).norm_sqr()).sum()
    }
}

/// Rapidity-form phase of the mode `k`.
pub fn mode_phase(d: &DerivedConstants, k: &WaveVector) -> Result<ExpPhase> {
    let (a, b) = phase_coefficients(d, k)?;
    let nu = (k.kx * d.u_perp[0] + k.ky * d.u_perp[1]) / d.epsilon;
    ExpPhase::new(a, b, nu)
}

/// `[J_-1, J_0, J_1]` over a rapidity window. On the field axis (`A = 0` or
/// `B = 0`) short windows go through the power series.
pub fn rapidity_moments(phase: &ExpPhase, window: &Interval, spec: &QuadSpec) -> Result<QuadResult<[Complex64; 3]>> {
    let on_axis = phase.a == 0.0 || phase.b == 0.0;
    let method = match (window.lo, window.hi) {
        (Endpoint::Finite(lo), Endpoint::Finite(hi)) if on_axis && phase.a * hi.exp() + phase.b * (-lo).exp() <= 8.0 => Method::Series,
        _ => Method::Auto,
    };
    phase.moments([-1.0, 0.0, 1.0], window, method, spec)?.require("amplitude moments")
}

fn from_moments(m: &QuadResult<[Complex64; 3]>) -> AmplitudeVector {
    let [jm, j0, jp] = m.value;
    AmplitudeVector { i1: j0, i2: 0.5 * (jp - jm), error: m.error }
}

/// `I1` and `I2` of the mode `k` over `window`.
pub fn amplitude_integrals(d: &DerivedConstants, k: &WaveVector, window: &Window, route: Route, spec: &QuadSpec) -> Result<AmplitudeVector> {
    if window.is_empty() {
        return Ok(AmplitudeVector::ZERO);
    }
    match route {
        Route::Rapidity => Ok(from_moments(&rapidity_moments(&mode_phase(d, k)?, &window.eta, spec)?)),
        Route::Direct => {
            let (Some(lo), Some(hi)) = (window.eta.lo.finite(), window.eta.hi.finite()) else {
                return Err(Error::InvalidArgument("direct amplitude quadrature needs a finite window".into()));
            };
            let m = mode_phase(d, k)?.direct([-1.0, 0.0, 1.0], lo, hi, spec).require("direct amplitude quadrature")?;
            Ok(from_moments(&m))
        }
        Route::Reduced => {
            let (_, sv) = reduced_values(d, k, window, &MacdonaldOptions::default(), spec)?;
            let m = reduce_mode(d, k)?;
            Ok(from_special(&sv, m.nu, m.z, m.xi, k))
        }
    }
}

/// `K`, `K'`, `Kdot` and `S` of the mode over the window shifted to `u = eta - xi`.
pub fn reduced_values(
    d: &DerivedConstants,
    k: &WaveVector,
    window: &Window,
    opts: &MacdonaldOptions,
    spec: &QuadSpec,
) -> Result<(crate::kinematics::ReducedMode, SpecialValue)> {
    let m = reduce_mode(d, k)?;
    let sv = special_value(m.nu, m.z, m.cos_theta, &window.u_window(m.xi), opts, spec)?;
    Ok((m, sv))
}

/// `I1 = 2 e^{-i nu xi} e^{pi nu/2} K`,
/// `I2 = 2 e^{-i nu xi} e^{pi nu/2} (|k|/|k_perp|) [(nu/z)(k_par/|k|) K - i S]`.
pub fn from_special(sv: &SpecialValue, nu: f64, z: f64, xi: f64, k: &WaveVector) -> AmplitudeVector {
    let i = Complex64::new(0.0, 1.0);
    let pre = Complex64::from_polar(2.0 * (0.5 * std::f64::consts::PI * nu).exp(), -nu * xi);
    let cos_theta = k.kpar / k.k0();
    let nu_over_z = if nu == 0.0 { 0.0 } else { nu / z };
    let ratio = k.k0() / k.kperp();
    let i1 = pre * sv.k.value;
    let i2 = pre * ratio * (nu_over_z * cos_theta * sv.k.value - i * sv.s.value);
    let error = pre.norm() * (sv.k.error + ratio * (nu_over_z.abs() * sv.k.error + sv.s.error));
    AmplitudeVector { i1, i2, error }
}
