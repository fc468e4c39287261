//! Symmetric rate `w(T) = d/dT W(T/2, -T/2)`.
//!
//! For motion along the field the spherical cutoff `Lambda <= L` and the
//! polar angle are integrated in closed form, leaving one rapidity integral:
//!
//! `w = (q^2 eps^2 / (2 pi c)) sum_{+-} tanh(eta_+-) int sinh(eta') H_L(a_+-, b_+-) d eta'`,
//!
//! `a = sinh eta_+- - sinh eta'`, `b = cosh eta_+- - cosh eta'` and
//! `H_L(a, b) = int_{-1}^{1} (1 - x^2) Q_L(a - b x) dx`, `Q_L(r) = int_0^L Lambda^2 cos(Lambda r) d Lambda`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::amplitude::{amplitude_integrals, mode_phase, reduced_values, Route};
use super::energy::density_prefactor;
use super::rate::{rate_asymptotic, RateResult, RateVariant};
use crate::error::{Error, Result};
use crate::kinematics::{eta_rate, Endpoint, WaveVector, Window};
use crate::quadrature::{gauss_legendre, integrate_breaks, phase_breakpoints, QuadSpec};
use crate::specfun::{sine_integral, MacdonaldOptions};
use crate::units::DerivedConstants;

/// `Q_L(r) = [(L^2 r^2 - 2) sin(L r) + 2 L r cos(L r)] / r^3`.
pub fn cutoff_kernel(l: f64, r: f64) -> f64 {
    let x = l * r;
    if x.abs() < 2.0 {
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 1.0 / 3.0;
        for n in 1..30 {
            term *= -x2 / ((2 * n - 1) as f64 * (2 * n) as f64);
            let add = term / (2 * n + 3) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        l * l * l * sum
    } else {
        ((x * x - 2.0) * x.sin() + 2.0 * x * x.cos()) / (r * r * r)
    }
}

fn sin_over(l: f64, c: f64) -> f64 {
    if (l * c).abs() < 1e-8 {
        l
    } else {
        (l * c).sin() / c
    }
}

/// `H_L(a, b)`; Gauss-Legendre in `x` when `L |b| <= 4`, sine integrals otherwise.
pub fn angular_kernel(l: f64, a: f64, b: f64) -> f64 {
    if (l * b).abs() <= 4.0 {
        thread_local! {
            static GL: (Vec<f64>, Vec<f64>) = gauss_legendre(24);
        }
        return GL.with(|(x, w)| x.iter().zip(w).map(|(&x, &w)| w * (1.0 - x * x) * cutoff_kernel(l, a - b * x)).sum());
    }
    let si = 0.5 * (sine_integral(l * (a + b)) + sine_integral(l * (b - a)));
    let co = 0.5 * b * (sin_over(l, a + b) + sin_over(l, a - b));
    4.0 / (b * b * b) * (si - co)
}

/// The window `eta_-+ = eta(-+T/2)`.
pub fn symmetric_window(d: &DerivedConstants, period: f64) -> Result<Window> {
    Window::symmetric(d, Some(period))
}

/// Symmetric rate of motion along the field with spherical cutoff `k0 <= L eps / c`,
/// `L = spec.cutoff.initial_z` grown by `spec.cutoff.growth` until the relative
/// change is below `spec.cutoff.rel_change`. `period = None` is the `T -> infinity` limit.
pub fn rate_symmetric(d: &DerivedConstants, period: Option<f64>, spec: &QuadSpec) -> Result<RateResult> {
    d.require_field()?;
    if !d.is_parallel() {
        return Err(Error::InvalidArgument(
            "the closed-form symmetric rate needs u_perp = 0; use rate_symmetric_on_grid".into(),
        ));
    }
    let Some(period) = period else {
        let mut r = rate_asymptotic(d, spec)?;
        r.variant = RateVariant::Symmetric;
        r.window = Some((Endpoint::NegInfinity, Endpoint::PosInfinity));
        return Ok(r);
    };
    let window = symmetric_window(d, period)?;
    let mut result = RateResult {
        w: 0.0,
        error: 0.0,
        variant: RateVariant::Symmetric,
        window: Some((window.eta.lo, window.eta.hi)),
        converged: true,
        grid: None,
        trend: vec![],
        regularization: None,
        check: None,
        delta: None,
    };
    if window.is_empty() {
        return Ok(result);
    }
    let mut l = spec.cutoff.initial_z;
    let mut last = rate_symmetric_cutoff(d, &window, l, spec)?;
    result.trend.push((l * d.epsilon / d.c, PI, last.0));
    result.converged = spec.cutoff.max_growths == 0;
    for _ in 0..spec.cutoff.max_growths {
        l *= spec.cutoff.growth;
        let next = rate_symmetric_cutoff(d, &window, l, spec)?;
        result.trend.push((l * d.epsilon / d.c, PI, next.0));
        let change = (next.0 - last.0).abs();
        last = (next.0, next.1 + change);
        if change <= spec.cutoff.rel_change * next.0.abs() {
            result.converged = true;
            break;
        }
    }
    result.w = last.0;
    result.error = last.1;
    Ok(result)
}

/// `w(T)` at a fixed dimensionless cutoff `L = c k0_max / eps`; returns value and error.
pub fn rate_symmetric_cutoff(d: &DerivedConstants, window: &Window, l: f64, spec: &QuadSpec) -> Result<(f64, f64)> {
    let (Some(lo), Some(hi)) = (window.eta.lo.finite(), window.eta.hi.finite()) else {
        return Err(Error::InvalidArgument("finite symmetric window required".into()));
    };
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let max_panels = (spec.max_evals / 42).max(2);
    let pts = phase_breakpoints(&|x: f64| 2.0 * l * x.sinh(), lo, hi, max_panels);
    let mut total = 0.0;
    let mut error = 0.0;
    for end in [hi, lo] {
        let r = integrate_breaks(
            |x: f64| {
                let half_sum = 0.5 * (end + x);
                let half_diff = 0.5 * (end - x);
                let s = 2.0 * half_diff.sinh();
                let a = half_sum.cosh() * s;
                let b = half_sum.sinh() * s;
                x.sinh() * angular_kernel(l, a, b)
            },
            &pts,
            spec,
        )
        .require("symmetric rate rapidity integral")?;
        total += end.tanh() * r.value;
        error += end.tanh().abs() * r.error;
    }
    let pre = d.q * d.q * d.epsilon * d.epsilon / (2.0 * PI * d.c);
    Ok((pre * total, pre * error))
}

/// k-space density of the symmetric rate for motion along the field,
/// `(q^2 c^2 / (2 eps pi^2)) (|k_perp|/|k|) sum tanh(eta_+-) Im[e^{-i z sinh u_+-} S_0(z; T)]`.
pub fn rate_density_symmetric_parallel(d: &DerivedConstants, k: &WaveVector, window: &Window, spec: &QuadSpec) -> Result<f64> {
    if !d.is_parallel() {
        return Err(Error::InvalidArgument("needs u_perp = 0".into()));
    }
    let (Some(lo), Some(hi)) = (window.eta.lo.finite(), window.eta.hi.finite()) else {
        return Err(Error::InvalidArgument("finite symmetric window required".into()));
    };
    if window.is_empty() || k.kperp() == 0.0 {
        return Ok(0.0);
    }
    let (m, sv) = reduced_values(d, k, window, &MacdonaldOptions::default(), spec)?;
    let s = sv.s.value;
    let mut sum = 0.0;
    for eta in [hi, lo] {
        let phi = m.z * (eta - m.xi).sinh();
        sum += eta.tanh() * (phi.cos() * s.im - phi.sin() * s.re);
    }
    Ok((d.q * d.c).powi(2) / (2.0 * d.epsilon * PI * PI) * k.kperp() / k.k0() * sum)
}

/// k-space density of the symmetric rate for any initial velocity: the
/// derivative of `|I|^2 - |n.I|^2` through both ends of the window.
pub fn rate_density_symmetric(d: &DerivedConstants, k: &WaveVector, window: &Window, spec: &QuadSpec) -> Result<f64> {
    let (Some(lo), Some(hi)) = (window.eta.lo.finite(), window.eta.hi.finite()) else {
        return Err(Error::InvalidArgument("finite symmetric window required".into()));
    };
    if window.is_empty() {
        return Ok(0.0);
    }
    let a = amplitude_integrals(d, k, window, Route::Rapidity, spec)?;
    let phase = mode_phase(d, k)?;
    let amp = a.assembled(d);
    let n = k.unit();
    let mut total = 0.0;
    for eta in [hi, lo] {
        // each end moves at half the rate of T
        let edge = Complex64::from_polar(0.5 * eta_rate(d, eta), phase.psi(eta));
        let dot = [edge * (d.u_perp[0] / d.c), edge * (d.u_perp[1] / d.c), edge * (d.rho * eta.sinh())];
        let inner: Complex64 = (0..3).map(|j| amp[j] * dot[j].conj()).sum();
        let na: Complex64 = (0..3).map(|j| amp[j] * n[j]).sum();
        let nd: Complex64 = (0..3).map(|j| dot[j] * n[j]).sum();
        total += 2.0 * (inner - na * nd.conj()).re;
    }
    Ok(density_prefactor(d) * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, KGrid};
    use crate::radiation::energy::energy_density;
    use crate::radiation::grid::sum_on_grid;
    use crate::units::{derive_constants, SourceConfig, UnitSystem};
    use rand::{Rng, SeedableRng};

    fn source(ux: f64, upar: f64) -> DerivedConstants {
        let u = UnitSystem::default();
        derive_constants(&SourceConfig::at_rest_with_scale(1.0, 1.0, &u).with_u_perp(ux, 0.0).with_u_par(upar), &u).unwrap()
    }

    #[test]
    fn kernels_match_quadrature() {
        let spec = QuadSpec::with_tol(1e-14, 1e-13);
        for (l, r) in [(3.0, 0.01), (3.0, 0.5), (7.0, 2.0), (20.0, -0.3)] {
            let q = integrate(|x: f64| x * x * (x * r).cos(), 0.0, l, &spec).value;
            assert!((cutoff_kernel(l, r) - q).abs() < 1e-11 * q.abs().max(1.0), "{l} {r}");
        }
        for (l, a, b) in [(5.0, 0.3, 0.1), (5.0, 2.0, 1.5), (20.0, -1.0, -0.9), (20.0, 0.05, 0.04), (40.0, 3.0, 0.5)] {
            let q = integrate(|x: f64| (1.0 - x * x) * cutoff_kernel(l, a - b * x), -1.0, 1.0, &spec).value;
            let h = angular_kernel(l, a, b);
            assert!((h - q).abs() < 1e-9 * q.abs().max(l * l), "{l} {a} {b}: {h} {q}");
        }
    }

    #[test]
    fn symmetric_density_forms_agree() {
        let d = source(0.0, 0.2);
        let w = symmetric_window(&d, 1.7).unwrap();
        let spec = QuadSpec::with_tol(1e-15, 1e-12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let k = WaveVector::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let a = rate_density_symmetric(&d, &k, &w, &spec).unwrap();
            let b = rate_density_symmetric_parallel(&d, &k, &w, &spec).unwrap();
            assert!((a - b).abs() < 1e-9 * (a.abs() + 1e-6), "{a} {b}");
        }
    }

    #[test]
    fn symmetric_density_is_period_derivative() {
        let d = source(0.5, -0.3);
        let spec = QuadSpec::with_tol(1e-15, 1e-12);
        let k = WaveVector::new(0.7, -1.2, 0.4);
        let e = |p: f64| energy_density(&d, &k, &symmetric_window(&d, p).unwrap(), Route::Rapidity, &spec).unwrap().value;
        let (p, h) = (1.3, 1e-4);
        let fd = (8.0 * (e(p + h) - e(p - h)) - (e(p + 2.0 * h) - e(p - 2.0 * h))) / (12.0 * h);
        let r = rate_density_symmetric(&d, &k, &symmetric_window(&d, p).unwrap(), &spec).unwrap();
        assert!((fd - r).abs() < 1e-8 * r.abs(), "{fd} {r}");
    }

    #[test]
    fn closed_form_matches_spherical_grid() {
        let d = source(0.0, 0.0);
        let spec = QuadSpec::with_tol(1e-15, 1e-11);
        let w = symmetric_window(&d, 0.8).unwrap();
        let l = 6.0;
        let grid = KGrid::spherical(l * d.epsilon / d.c, 6, 8);
        let g = sum_on_grid(|k| rate_density_symmetric(&d, k, &w, &spec), &grid).unwrap();
        let c = rate_symmetric_cutoff(&d, &w, l, &spec).unwrap();
        assert!((g.value - c.0).abs() < 1e-7 * c.0.abs(), "{} {}", g.value, c.0);
    }

    #[test]
    fn zero_and_infinite_period() {
        let d = source(0.0, 0.0);
        let spec = QuadSpec::default();
        assert_eq!(rate_symmetric(&d, Some(0.0), &spec).unwrap().w, 0.0);
        let inf = rate_symmetric(&d, None, &spec).unwrap();
        assert_eq!(inf.w, 2.0 * d.q * d.q * d.accel * d.accel / d.c.powi(3));
        assert!(rate_symmetric(&source(0.2, 0.0), Some(1.0), &spec).is_err());
    }
}
