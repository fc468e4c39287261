//! Incomplete cylindrical function of Bessel form
//! `eps_nu(a, z) = (1 / (pi i)) int_0^a e^{z sinh t - nu t} dt`,
//! its power series and large-`z` expansion, and the `nu = 0` series of
//! the incomplete Macdonald function.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expphase::exp_segment;
use super::macdonald::Estimate;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_oscillatory, CompensatedSum, QuadResult, QuadSpec};

const MAX_TERMS: usize = 600;

/// `eps_nu(a, z)` with the series coefficients `R_n` when the series was used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonValue {
    pub value: Complex64,
    pub error: f64,
    pub coefficients: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EpsilonMethod {
    #[default]
    Auto,
    Series,
    Quadrature,
}

fn one_over_pi_i() -> Complex64 {
    Complex64::new(0.0, -1.0 / PI)
}

/// Binomial row `C(n, 0..=n)`.
fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = 1.0f64;
    row.push(c);
    for l in 1..=n {
        c = c * (n + 1 - l) as f64 / l as f64;
        row.push(c);
    }
    row
}

/// `eps_nu(a, z)` by direct quadrature.
pub fn epsilon_quadrature(nu: Complex64, a: f64, z: Complex64, spec: &QuadSpec) -> Result<EpsilonValue> {
    check(nu, a, z)?;
    spec.validate()?;
    let r = integrate_oscillatory(
        |t: f64| Complex64::new((z.re * t.sinh() - nu.re * t).exp(), 0.0),
        |t: f64| z.im * t.sinh() - nu.im * t,
        0.0,
        a,
        spec,
    )
    .require("incomplete cylindrical function quadrature")?;
    Ok(EpsilonValue { value: one_over_pi_i() * r.value, error: r.error / PI, coefficients: None })
}

/// Power series `sum_n R_n z^n / n!` with
/// `R_n = 2^-n/(i pi) sum_l (-1)^l C(n,l) (e^{(n-2l-nu) a} - 1)/(n-2l-nu)`.
pub fn epsilon_series(nu: Complex64, a: f64, z: Complex64, tol: f64) -> Result<EpsilonValue> {
    check(nu, a, z)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let g = z.norm() * a.cosh();
    let scale = (nu.re.abs() * a.abs()).exp() * a.abs().max(f64::MIN_POSITIVE);
    let mut coefficients = Vec::new();
    let mut sum = CompensatedSum::<Complex64>::new();
    let mut zpow = Complex64::new(1.0, 0.0);
    let mut fact = 1.0f64;
    let mut bound_n = scale;
    let mut rounding = 0.0f64;
    for n in 0..MAX_TERMS {
        if n > 0 {
            zpow *= z;
            fact *= n as f64;
            bound_n *= g / n as f64;
        }
        let row = binomial_row(n);
        let mut inner = CompensatedSum::<Complex64>::new();
        let mut inner_abs = 0.0;
        for (l, c) in row.iter().enumerate() {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let k = Complex64::new(n as f64 - 2.0 * l as f64, 0.0) - nu;
            let t = sign * c * exp_segment(k, 0.0, a);
            inner_abs += t.norm();
            inner.add(t);
        }
        let r_n = one_over_pi_i() * inner.value() * 0.5f64.powi(n as i32);
        coefficients.push(r_n);
        let term = r_n * zpow / fact;
        rounding += f64::EPSILON * inner_abs * 0.5f64.powi(n as i32) * zpow.norm() / fact / PI;
        sum.add(term);
        if n as f64 > g && bound_n < 0.1 * tol {
            let value = sum.value();
            return Ok(EpsilonValue { value, error: bound_n + 4.0 * rounding, coefficients: Some(coefficients) });
        }
    }
    Err(Error::NonConvergence { what: "incomplete cylindrical function series".into(), partial: sum.value().norm(), error: bound_n })
}

/// `eps_nu(a, z)`; `Auto` uses the series when `|z| cosh a <= 2`.
pub fn epsilon_incomplete(nu: Complex64, a: f64, z: Complex64, method: EpsilonMethod, spec: &QuadSpec) -> Result<EpsilonValue> {
    if a == 0.0 {
        return Ok(EpsilonValue { value: Complex64::new(0.0, 0.0), error: 0.0, coefficients: None });
    }
    match method {
        EpsilonMethod::Series => epsilon_series(nu, a, z, spec.abs_tol),
        EpsilonMethod::Quadrature => epsilon_quadrature(nu, a, z, spec),
        EpsilonMethod::Auto if z.norm() * a.cosh() <= 2.0 => epsilon_series(nu, a, z, spec.abs_tol),
        EpsilonMethod::Auto => epsilon_quadrature(nu, a, z, spec),
    }
}

/// Three-term large-`z` expansion of `eps_nu(a, z)`, remainder `O(z^-4)`.
pub fn epsilon_asymptotic(nu: Complex64, a: f64, z: Complex64) -> Complex64 {
    let e = (z * a.sinh() - nu * a).exp();
    let ch = a.cosh();
    let th = a.tanh();
    let one = Complex64::new(1.0, 0.0);
    let c = one_over_pi_i();
    let t1 = (e / ch - one) / z;
    let t2 = (e / (ch * ch) * (nu + th) - nu) / (z * z);
    let poly = nu * nu - one + 3.0 * nu * th + 3.0 * th * th;
    let t3 = (e / (ch * ch * ch) * poly - (nu * nu - one)) / (z * z * z);
    c * (t1 + t2 + t3)
}

fn check(nu: Complex64, a: f64, z: Complex64) -> Result<()> {
    if !(a.is_finite() && nu.re.is_finite() && nu.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument("incomplete cylindrical function needs finite arguments".into()));
    }
    Ok(())
}

/// `K_{i nu}(z; u_in, u) = (i pi / 2) e^{-pi nu/2} [eps_{i nu}(u, iz) - eps_{i nu}(u_in, iz)]`.
pub fn macdonald_via_epsilon(nu: f64, z: f64, u_in: f64, u: f64, method: EpsilonMethod, spec: &QuadSpec) -> Result<Estimate> {
    let order = Complex64::new(0.0, nu);
    let arg = Complex64::new(0.0, z);
    let hi = epsilon_incomplete(order, u, arg, method, spec)?;
    let lo = epsilon_incomplete(order, u_in, arg, method, spec)?;
    let f = Complex64::new(0.0, 0.5 * PI) * (-0.5 * PI * nu).exp();
    Ok(QuadResult { value: f * (hi.value - lo.value), error: f.norm() * (hi.error + lo.error), evals: 0, converged: true })
}

/// `nu = 0` series
/// `K_0(z; u_in, u) = (u - u_in)/2 + (1/2) sum_{n>=1} (iz/2)^n sum_{l=0}^n
/// (-1)^l / (l! (n-l)!) (e^{(n-2l) u} - e^{(n-2l) u_in}) / (n-2l)`,
/// with the `n = 2l` quotient read as `u - u_in`.
pub fn k0_series(z: f64, u_in: f64, u: f64) -> Result<Estimate> {
    if !(z >= 0.0 && z.is_finite() && u_in.is_finite() && u.is_finite()) {
        return Err(Error::InvalidArgument(format!("k0 series needs finite z >= 0 and window, got z={z}")));
    }
    let len = (u - u_in).abs();
    let g = z * u.abs().max(u_in.abs()).cosh();
    let mut sum = CompensatedSum::<Complex64>::new();
    sum.add(Complex64::new(0.5 * (u - u_in), 0.0));
    if z == 0.0 || len == 0.0 {
        return Ok(QuadResult::exact(sum.value()));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut pref = Complex64::new(0.5, 0.0);
    let mut bound = len;
    let mut rounding = 0.0f64;
    for n in 1..MAX_TERMS {
        pref *= i * (0.5 * z);
        bound *= g / n as f64;
        // C(n, l) / n! = 1 / (l! (n - l)!)
        let row = binomial_row(n);
        let mut fact_n = 1.0f64;
        for k in 1..=n {
            fact_n *= k as f64;
        }
        let mut inner = CompensatedSum::<Complex64>::new();
        let mut inner_abs = 0.0;
        for (l, c) in row.iter().enumerate() {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let m = Complex64::new(n as f64 - 2.0 * l as f64, 0.0);
            let t = sign * c / fact_n * exp_segment(m, u_in, u);
            inner_abs += t.norm();
            inner.add(t);
        }
        sum.add(pref * inner.value());
        rounding += f64::EPSILON * pref.norm() * inner_abs;
        if n as f64 > g && bound < 1e-17 * len {
            return Ok(QuadResult { value: sum.value(), error: bound + 4.0 * rounding, evals: 0, converged: true });
        }
    }
    Err(Error::NonConvergence { what: "k0 series".into(), partial: sum.value().norm(), error: bound })
}
