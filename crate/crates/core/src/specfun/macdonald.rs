//! Incomplete Macdonald functions `K_{i nu}(z; u_in, u)`, their `z` and
//! `xi` derivatives, the `S` combination, and the classical functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expphase::{ExpPhase, Method};
use crate::error::{Error, Result};
use crate::kinematics::{Endpoint, Interval};
use crate::quadrature::{integrate_to_infinity, richardson_to_zero, QuadResult, QuadSpec, QuadValue};

/// Below this `z` the power series is preferred when the window is short.
pub const Z_SWITCH: f64 = 1.0;

/// A complex value with an absolute error estimate.
pub type Estimate = QuadResult<Complex64>;

/// How an infinite window end is given a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Regularization {
    /// Abel limit taken analytically by lifting the contour.
    #[default]
    Contour,
    /// Factor `exp(-eps |u|)` with polynomial extrapolation `eps -> 0`.
    ConvergenceFactor,
    /// Real decaying integrals; full window and real `nu` only.
    Decaying,
}

impl Regularization {
    pub fn label(self) -> &'static str {
        match self {
            Regularization::Contour => "contour",
            Regularization::ConvergenceFactor => "convergence-factor",
            Regularization::Decaying => "decaying",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MacdonaldOptions {
    pub method: Method,
    pub regularization: Regularization,
}

/// `K`, `K'`, `Kdot` and `S` for one `(nu, z, window)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialValue {
    pub k: Estimate,
    pub kprime: Estimate,
    pub kdot: Estimate,
    pub s: Estimate,
}

fn prefactor(nu: f64) -> f64 {
    (-0.5 * std::f64::consts::PI * nu).exp()
}

fn check_args(nu: f64, z: f64) -> Result<()> {
    if !(z >= 0.0 && z.is_finite() && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!("need finite nu and z >= 0, got nu={nu}, z={z}")));
    }
    Ok(())
}

/// `[J_-1, J_0, J_1]` of `e^{i (z sinh u - nu u)}` over the window.
pub fn symmetric_moments(nu: f64, z: f64, window: &Interval, opts: &MacdonaldOptions, spec: &QuadSpec) -> Result<QuadResult<[Complex64; 3]>> {
    check_args(nu, z)?;
    spec.validate()?;
    let phase = ExpPhase::symmetric(z, nu)?;
    if window.is_empty() {
        return Ok(QuadResult::exact([Complex64::new(0.0, 0.0); 3]));
    }
    if window.is_finite() {
        return phase.moments([-1.0, 0.0, 1.0], window, opts.method, spec)?.require("incomplete Macdonald quadrature");
    }
    match opts.regularization {
        Regularization::Contour => phase.moments([-1.0, 0.0, 1.0], window, Method::Contour, spec)?.require("incomplete Macdonald contour"),
        Regularization::ConvergenceFactor => convergence_factor_moments(&phase, window, spec),
        Regularization::Decaying => {
            if window.lo != Endpoint::NegInfinity || window.hi != Endpoint::PosInfinity {
                return Err(Error::InvalidArgument("decaying representation needs the full window".into()));
            }
            decaying_moments(nu, z, spec)
        }
    }
}

fn prefers_series(z: f64, window: &Interval) -> bool {
    let (Some(lo), Some(hi)) = (window.lo.finite(), window.hi.finite()) else {
        return false;
    };
    z <= Z_SWITCH && 0.5 * z * (hi.exp() + (-lo).exp()) <= 4.0
}

/// Damped moments `J_{s-eps}` on `u >= 0` and `J_{s+eps}` on `u <= 0`,
/// extrapolated to `eps = 0`.
fn convergence_factor_moments(phase: &ExpPhase, window: &Interval, spec: &QuadSpec) -> Result<QuadResult<[Complex64; 3]>> {
    let upper = clip(window, Endpoint::Finite(0.0), Endpoint::PosInfinity);
    let lower = clip(window, Endpoint::NegInfinity, Endpoint::Finite(0.0));
    let inner = QuadSpec { abs_tol: spec.abs_tol * 1e-2, rel_tol: spec.rel_tol * 1e-2, ..*spec };
    let mut quad_error = 0.0f64;
    let mut evals = 0;
    let ext = richardson_to_zero(
        |eps| {
            let mut v = [Complex64::new(0.0, 0.0); 3];
            if let Some(w) = upper {
                let r = phase.moments([-1.0 - eps, -eps, 1.0 - eps], &w, Method::Contour, &inner)?.require("damped moments")?;
                quad_error = quad_error.max(r.error);
                evals += r.evals;
                v = v.add(r.value);
            }
            if let Some(w) = lower {
                let r = phase.moments([-1.0 + eps, eps, 1.0 + eps], &w, Method::Contour, &inner)?.require("damped moments")?;
                quad_error = quad_error.max(r.error);
                evals += r.evals;
                v = v.add(r.value);
            }
            Ok(v)
        },
        0.1,
        3,
        14,
        (spec.rel_tol * 10.0).max(1e-13),
    )?;
    Ok(QuadResult { value: ext.value, error: ext.error + quad_error, evals, converged: true })
}

fn clip(w: &Interval, lo: Endpoint, hi: Endpoint) -> Option<Interval> {
    let key = |e: Endpoint| match e {
        Endpoint::NegInfinity => f64::NEG_INFINITY,
        Endpoint::Finite(x) => x,
        Endpoint::PosInfinity => f64::INFINITY,
    };
    let a = if key(w.lo) > key(lo) { w.lo } else { lo };
    let b = if key(w.hi) < key(hi) { w.hi } else { hi };
    (key(a) < key(b)).then_some(Interval { lo: a, hi: b })
}

/// Full-window moments from `int_0^inf e^{-z cosh s} cos(nu s) ds` and its
/// `cosh` weighted partner.
fn decaying_moments(nu: f64, z: f64, spec: &QuadSpec) -> Result<QuadResult<[Complex64; 3]>> {
    if z <= 0.0 {
        return Err(Error::InvalidArgument("decaying representation needs z > 0".into()));
    }
    let pf = prefactor(nu);
    let k = macdonald_imag_order(nu, z, spec)?;
    let kp = macdonald_imag_order_dz(nu, z, spec)?;
    // K = pf J0 / 2, K' = i pf (J1 - J-1) / 4
    let j0 = Complex64::new(2.0 * k.value / pf, 0.0);
    let diff = Complex64::new(0.0, -4.0) * kp.value / pf;
    let sum = cosh_moment(nu, z, spec)?;
    let jm1 = 0.5 * (sum.value - diff);
    let j1 = 0.5 * (sum.value + diff);
    Ok(QuadResult {
        value: [jm1, j0, j1],
        error: (k.error + kp.error + sum.error) * 4.0 / pf,
        evals: k.evals + kp.evals + sum.evals,
        converged: true,
    })
}

/// `J_1 + J_-1 = 2 int_R cosh u e^{i(z sinh u - nu u)} du = 4 e^{pi nu/2} (nu / z) K_{i nu}(z)`.
fn cosh_moment(nu: f64, z: f64, spec: &QuadSpec) -> Result<Estimate> {
    let k = macdonald_imag_order(nu, z, spec)?;
    let f = 4.0 / prefactor(nu) * nu / z;
    Ok(QuadResult { value: Complex64::new(f * k.value, 0.0), error: f.abs() * k.error, evals: k.evals, converged: true })
}

fn decaying_integral<F: Fn(f64) -> f64>(f: F, nu: f64, spec: &QuadSpec) -> Result<QuadResult<f64>> {
    let width = 1.0 / (1.0 + nu.abs());
    integrate_to_infinity(f, 0.0, width, spec).require("decaying Macdonald integral")
}

/// Classical `K_{i nu}(z) = int_0^inf e^{-z cosh s} cos(nu s) ds`, `z > 0`.
pub fn macdonald_imag_order(nu: f64, z: f64, spec: &QuadSpec) -> Result<QuadResult<f64>> {
    if !(z > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("K_(i nu)(z) needs z > 0, got {z}")));
    }
    decaying_integral(|s| (-z * s.cosh()).exp() * (nu * s).cos(), nu, spec)
}

/// `d/dz K_{i nu}(z) = -int_0^inf cosh s e^{-z cosh s} cos(nu s) ds`.
pub fn macdonald_imag_order_dz(nu: f64, z: f64, spec: &QuadSpec) -> Result<QuadResult<f64>> {
    if !(z > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("K_(i nu)'(z) needs z > 0, got {z}")));
    }
    decaying_integral(|s| -s.cosh() * (-z * s.cosh()).exp() * (nu * s).cos(), nu, spec)
}

/// Classical `K_n(z) = int_0^inf e^{-z cosh s} cosh(n s) ds` for real order.
pub fn macdonald_real_order(order: f64, z: f64, spec: &QuadSpec) -> Result<QuadResult<f64>> {
    if !(z > 0.0) || !order.is_finite() {
        return Err(Error::InvalidArgument(format!("K_n(z) needs z > 0, got {z}")));
    }
    // integrand peaks near s = asinh(order / z)
    let peak = (order.abs() / z).asinh();
    let width = (peak / 4.0).max(0.5);
    integrate_to_infinity(|s| (-z * s.cosh() + order.abs() * s).exp() * 0.5 * (1.0 + (-2.0 * order.abs() * s).exp()), 0.0, width, spec)
        .require("real-order Macdonald integral")
}

fn from_moments(nu: f64, m: &QuadResult<[Complex64; 3]>) -> (Estimate, Estimate) {
    let pf = prefactor(nu);
    let i = Complex64::new(0.0, 1.0);
    let k = QuadResult { value: 0.5 * pf * m.value[1], error: 0.5 * pf * m.error, evals: m.evals, converged: m.converged };
    let kp = QuadResult {
        value: 0.25 * pf * i * (m.value[2] - m.value[0]),
        error: 0.5 * pf * m.error,
        evals: 0,
        converged: m.converged,
    };
    (k, kp)
}

/// `K_{i nu}(z; u_in, u) = (e^{-pi nu/2}/2) int_{u_in}^u e^{i(z sinh u' - nu u')} du'`.
pub fn incomplete_macdonald(nu: f64, z: f64, window: &Interval, opts: &MacdonaldOptions, spec: &QuadSpec) -> Result<Estimate> {
    if let (Method::Auto, Some(lo), Some(hi)) = (opts.method, window.lo.finite(), window.hi.finite()) {
        if nu == 0.0 && prefers_series(z, window) {
            return super::epsilon::k0_series(z, lo, hi);
        }
    }
    Ok(from_moments(nu, &symmetric_moments(nu, z, window, opts, spec)?).0)
}

/// `d/dz` of [`incomplete_macdonald`], differentiated under the integral.
pub fn incomplete_macdonald_dz(nu: f64, z: f64, window: &Interval, opts: &MacdonaldOptions, spec: &QuadSpec) -> Result<Estimate> {
    Ok(from_moments(nu, &symmetric_moments(nu, z, window, opts, spec)?).1)
}

/// `d/dxi` at fixed `eta`: `(e^{-pi nu/2}/2)[e^{i phi(u_in)} - e^{i phi(u)}]`;
/// an infinite end contributes nothing.
pub fn incomplete_macdonald_dxi(nu: f64, z: f64, window: &Interval) -> Result<Estimate> {
    check_args(nu, z)?;
    let phi = |u: f64| z * u.sinh() - nu * u;
    let term = |e: Endpoint| e.finite().map_or(Complex64::new(0.0, 0.0), |u| Complex64::from_polar(1.0, phi(u)));
    let v = 0.5 * prefactor(nu) * (term(window.lo) - term(window.hi));
    Ok(QuadResult { value: v, error: 4.0 * f64::EPSILON * v.norm().max(1e-300), evals: 0, converged: true })
}

/// `Kdot / z`, finite as `z -> 0` (where `nu` must vanish too).
pub fn kdot_over_z(nu: f64, z: f64, window: &Interval) -> Result<Complex64> {
    check_args(nu, z)?;
    let (a, b) = (window.lo.finite(), window.hi.finite());
    if z == 0.0 {
        if nu != 0.0 {
            return Err(Error::InvalidArgument("Kdot/z at z = 0 needs nu = 0".into()));
        }
        // limit of (e^{i z s1} - e^{i z s2}) / (2 z)
        let s1 = a.map(f64::sinh);
        let s2 = b.map(f64::sinh);
        return match (s1, s2) {
            (Some(s1), Some(s2)) => Ok(Complex64::new(0.0, 0.5 * (s1 - s2))),
            _ => Err(Error::InvalidArgument("Kdot/z at z = 0 needs a finite window".into())),
        };
    }
    Ok(incomplete_macdonald_dxi(nu, z, window)?.value / z)
}

/// `S = K' - (1/z)(k_par/|k|) Kdot`.
pub fn s_combination(nu: f64, z: f64, k_par_over_k: f64, window: &Interval, opts: &MacdonaldOptions, spec: &QuadSpec) -> Result<Estimate> {
    Ok(special_value(nu, z, k_par_over_k, window, opts, spec)?.s)
}

/// All four quantities from one set of moments.
pub fn special_value(nu: f64, z: f64, k_par_over_k: f64, window: &Interval, opts: &MacdonaldOptions, spec: &QuadSpec) -> Result<SpecialValue> {
    if !(-1.0..=1.0).contains(&k_par_over_k) {
        return Err(Error::InvalidArgument(format!("k_par/|k| must lie in [-1, 1], got {k_par_over_k}")));
    }
    let m = symmetric_moments(nu, z, window, opts, spec)?;
    let (k, kprime) = from_moments(nu, &m);
    let kdot = incomplete_macdonald_dxi(nu, z, window)?;
    let s_val = if k_par_over_k == 0.0 {
        kprime.value
    } else {
        kprime.value - k_par_over_k * kdot_over_z(nu, z, window)?
    };
    let s = QuadResult {
        value: s_val,
        error: kprime.error + if z > 0.0 { k_par_over_k.abs() * kdot.error / z } else { 0.0 },
        evals: 0,
        converged: kprime.converged,
    };
    Ok(SpecialValue { k, kprime, kdot, s })
}
