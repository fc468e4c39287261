//! Energy rates `w = dW/dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::{amplitude_integrals, reduced_values, Route};
use super::energy::{density_prefactor, i0_2, lambda_of, parallel_phase};
use super::grid::{default_grid, integrate_grid, node_spec, sum_on_grid, Cutoffs};
use crate::error::{Error, Result};
use crate::kinematics::{eta_of_t, eta_rate, Endpoint, Window};
use crate::quadrature::{integrate_to_infinity, GridSum, KGrid, KSpaceResult, QuadSpec};
use crate::specfun::{macdonald_real_order, MacdonaldOptions, Regularization};
use crate::units::DerivedConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateVariant {
    /// Finite window.
    Asymmetric,
    /// `t_in = -infinity`.
    HalfInfinite,
    /// Motion along the field, two-dimensional k integral.
    Parallel,
    /// `t = -t_in = T/2`.
    Symmetric,
    /// `2 q^2 a^2 / c^3`.
    AsymptoticLimit,
    /// Classical comparison rate.
    ClassicalNr,
}

impl RateVariant {
    pub fn label(self) -> &'static str {
        match self {
            Self::Asymmetric => "asymmetric",
            Self::HalfInfinite => "half-infinite",
            Self::Parallel => "parallel",
            Self::Symmetric => "symmetric",
            Self::AsymptoticLimit => "asymptotic",
            Self::ClassicalNr => "classical-nr",
        }
    }
}

/// A verification integral reported next to a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub w: f64,
    pub error: f64,
    pub variant: RateVariant,
    /// Rapidity window `(eta_in, eta)`; `None` for closed forms.
    pub window: Option<(Endpoint, Endpoint)>,
    pub converged: bool,
    pub grid: Option<KGrid>,
    pub trend: Vec<(f64, f64, f64)>,
    /// How an infinite lower end was regularized.
    pub regularization: Option<String>,
    pub check: Option<Check>,
    /// `sinh eta - sinh eta_in - (cosh eta - cosh eta_in) cos(theta)`, for the
    /// large-`Lambda` distribution.
    pub delta: Option<f64>,
}

impl RateResult {
    fn closed(w: f64, variant: RateVariant, check: Check) -> Self {
        Self {
            w,
            error: 0.0,
            variant,
            window: None,
            converged: true,
            grid: None,
            trend: vec![],
            regularization: None,
            check: Some(check),
            delta: None,
        }
    }

    fn from_grid(r: KSpaceResult, variant: RateVariant, window: &Window) -> Self {
        let regularization = (!window.eta.lo.is_finite()).then(|| Regularization::Contour.label().to_string());
        Self {
            w: r.value,
            error: r.error,
            variant,
            window: Some((window.eta.lo, window.eta.hi)),
            converged: r.converged,
            grid: Some(r.grid),
            trend: r.trend,
            regularization,
            check: None,
            delta: None,
        }
    }

    /// Fails with `NonConvergence` when the cutoff growth did not settle.
    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { what: format!("{what} under cutoff growth"), partial: self.w, error: self.error })
        }
    }
}

fn upper_eta(window: &Window) -> Result<f64> {
    window
        .eta
        .hi
        .finite()
        .ok_or_else(|| Error::InvalidArgument("a rate needs a finite upper time".into()))
}

/// `d/dt` of the energy density at the mode `k`.
///
/// `Route::Reduced` evaluates the Macdonald-function form (the `K'` form when
/// `t_in = -infinity`); the other routes differentiate `|I|^2 - |n.I|^2` through
/// the moving end of the window.
pub fn rate_density(d: &DerivedConstants, k: &crate::kinematics::WaveVector, window: &Window, route: Route, spec: &QuadSpec) -> Result<f64> {
    if window.is_empty() {
        return Ok(0.0);
    }
    let eta = upper_eta(window)?;
    if route == Route::Reduced && k.kperp() > 0.0 {
        return rate_density_reduced(d, k, window, spec);
    }
    let route = if route == Route::Reduced { Route::Rapidity } else { route };
    let a = amplitude_integrals(d, k, window, route, spec)?;
    let phase = super::amplitude::mode_phase(d, k)?;
    let edge = Complex64::from_polar(eta_rate(d, eta), phase.psi(eta));
    let amp = a.assembled(d);
    let dot = [edge * (d.u_perp[0] / d.c), edge * (d.u_perp[1] / d.c), edge * (d.rho * eta.sinh())];
    let n = k.unit();
    let inner: Complex64 = (0..3).map(|j| amp[j] * dot[j].conj()).sum();
    let na: Complex64 = (0..3).map(|j| amp[j] * n[j]).sum();
    let nd: Complex64 = (0..3).map(|j| dot[j] * n[j]).sum();
    Ok(density_prefactor(d) * 2.0 * (inner - na * nd.conj()).re)
}

fn rate_density_reduced(d: &DerivedConstants, k: &crate::kinematics::WaveVector, window: &Window, spec: &QuadSpec) -> Result<f64> {
    let eta = upper_eta(window)?;
    let (m, sv) = reduced_values(d, k, window, &MacdonaldOptions::default(), spec)?;
    let r2 = d.rho * d.rho;
    let nz = if m.nu == 0.0 { 0.0 } else { m.nu / m.z };
    let bracket = (1.0 - nz * nz) * r2 - 1.0;
    let u = eta - m.xi;
    let e = Complex64::from_polar(1.0, m.z * u.sinh() - m.nu * u);
    let geometry = k.kperp() / k.k0() * (eta.sinh() - nz * k.kpar / k.kperp());
    let pre = (d.q * d.c / PI).powi(2) * (0.5 * PI * m.nu).exp() / eta.cosh();
    if window.eta.lo.is_finite() {
        let first = bracket * (e * sv.k.value.conj()).re;
        let second = geometry * r2 * (Complex64::new(0.0, 1.0) * e * sv.s.value.conj()).re;
        Ok(pre / (d.epsilon * d.rho) * (first + second))
    } else {
        let first = bracket / r2 * (e * sv.k.value.conj()).re;
        let second = geometry * (e.conj() * sv.kprime.value).im;
        Ok(pre * d.rho / d.epsilon * (first + second))
    }
}

/// Rate density of motion along the field in the form
/// `(qc/pi)^2 (tanh eta / eps) (|k_perp|/|k|) Im[e^{-i phi(u)} S_0]`, with `S_0 = K_0'`
/// when `t_in = -infinity`.
pub fn rate_density_parallel(d: &DerivedConstants, k: &crate::kinematics::WaveVector, window: &Window, spec: &QuadSpec) -> Result<f64> {
    if !d.is_parallel() {
        return Err(Error::InvalidArgument("the parallel-motion rate needs u_perp = 0".into()));
    }
    if window.is_empty() || k.kperp() == 0.0 {
        return Ok(0.0);
    }
    let eta = upper_eta(window)?;
    let (m, sv) = reduced_values(d, k, window, &MacdonaldOptions::default(), spec)?;
    let u = eta - m.xi;
    let phi = m.z * u.sinh();
    let s = if window.eta.lo.is_finite() { sv.s.value } else { sv.kprime.value };
    let im = phi.cos() * s.im - phi.sin() * s.re;
    Ok((d.q * d.c / PI).powi(2) * eta.tanh() / d.epsilon * k.kperp() / k.k0() * im)
}

/// Rate on a fixed grid.
pub fn rate_on_grid(d: &DerivedConstants, window: &Window, grid: &KGrid, route: Route, spec: &QuadSpec) -> Result<GridSum<f64>> {
    upper_eta(window)?;
    let ns = node_spec(spec);
    sum_on_grid(|k| rate_density(d, k, window, route, &ns), grid)
}

fn rate_with(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs, grid: Option<&KGrid>, variant: RateVariant) -> Result<RateResult> {
    d.require_field()?;
    upper_eta(window)?;
    let g = grid.copied().unwrap_or_else(|| default_grid(d, window, spec, cutoffs));
    if window.is_empty() {
        let r = KSpaceResult { value: 0.0, error: 0.0, grid: g, converged: true, trend: vec![] };
        return Ok(RateResult::from_grid(r, variant, window));
    }
    let ns = node_spec(spec);
    let fixed = cutoffs.is_fixed() || grid.is_some();
    let r = match variant {
        RateVariant::Parallel => integrate_grid(|k| rate_density_parallel(d, k, window, &ns), &g, spec, fixed)?,
        _ => integrate_grid(|k| rate_density(d, k, window, Route::Rapidity, &ns), &g, spec, fixed)?,
    };
    Ok(RateResult::from_grid(r, variant, window))
}

/// `w(t, t_in)` over the window; a given `grid` is used without growth.
pub fn rate_general(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs, grid: Option<&KGrid>) -> Result<RateResult> {
    let variant = if window.eta.lo.is_finite() { RateVariant::Asymmetric } else { RateVariant::HalfInfinite };
    rate_with(d, window, spec, cutoffs, grid, variant)
}

/// `w(t)` with `t_in = -infinity`, regularized on the lifted contour.
pub fn rate_halfinfinite(d: &DerivedConstants, t: f64, spec: &QuadSpec, cutoffs: &Cutoffs, grid: Option<&KGrid>) -> Result<RateResult> {
    d.require_field()?;
    let window = Window::half_infinite(eta_of_t(d, t));
    rate_with(d, &window, spec, cutoffs, grid, RateVariant::HalfInfinite)
}

/// Motion along the field through the two-dimensional `(k_perp, k_par)` form.
pub fn rate_parallel(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs, grid: Option<&KGrid>) -> Result<RateResult> {
    rate_with(d, window, spec, cutoffs, grid, RateVariant::Parallel)
}

fn k1_z2(spec: &QuadSpec, square: bool) -> Result<(f64, f64)> {
    let inner = QuadSpec { abs_tol: 1e-300, rel_tol: 1e-15, ..*spec };
    let mut fail = None;
    let r = integrate_to_infinity(
        |z: f64| {
            if z == 0.0 {
                return 0.0;
            }
            match macdonald_real_order(1.0, z, &inner) {
                Ok(k) => {
                    if square {
                        (k.value * z).powi(2)
                    } else {
                        k.value * z * z
                    }
                }
                Err(e) => {
                    fail.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        1.0,
        &QuadSpec { abs_tol: 1e-300, rel_tol: 1e-14, ..*spec },
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let r = r.require("Macdonald moment integral")?;
    Ok((r.value, r.error))
}

/// `w = 2 q^2 a^2 / c^3`, with `int_0^inf K_1(z) z^2 dz = 2` checked by quadrature.
pub fn rate_asymptotic(d: &DerivedConstants, spec: &QuadSpec) -> Result<RateResult> {
    let (value, error) = k1_z2(spec, false)?;
    let w = 2.0 * d.q * d.q * d.accel * d.accel / d.c.powi(3);
    Ok(RateResult::closed(w, RateVariant::AsymptoticLimit, Check { name: "int K1(z) z^2 dz".into(), value, expected: 2.0, error }))
}

/// `w_cl = (2 pi / c)(q eps / pi)^2 int_0^inf K_1(z)^2 z^2 dz`, motion along the field.
pub fn rate_classical_nr(d: &DerivedConstants, spec: &QuadSpec) -> Result<RateResult> {
    if !d.is_parallel() {
        return Err(Error::InvalidArgument("the classical total rate is defined for u_perp = 0".into()));
    }
    let (value, error) = k1_z2(spec, true)?;
    let w = 2.0 * PI / d.c * (d.q * d.epsilon / PI).powi(2) * value;
    let mut r = RateResult::closed(w, RateVariant::ClassicalNr, Check { name: "int K1(z)^2 z^2 dz".into(), value, expected: 3.0 * PI * PI / 32.0, error });
    r.error = 2.0 * PI / d.c * (d.q * d.epsilon / PI).powi(2) * error;
    Ok(r)
}

/// Differential classical rate per `dz dvartheta`,
/// `(q eps/(pi rho^2))^2 (e^{pi nu}/c) {[(1 - nu^2/z^2) rho^2 - 1] K^2 + rho^2 K'^2} z^2`
/// with `nu = z |u_perp| cos(vartheta) / (c rho)`.
pub fn dw_cl(d: &DerivedConstants, z: f64, vartheta: f64, spec: &QuadSpec) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::InvalidArgument(format!("z must be > 0, got {z}")));
    }
    let up = d.u_perp[0].hypot(d.u_perp[1]);
    let nu = z * up * vartheta.cos() / (d.c * d.rho);
    let k = crate::specfun::macdonald_imag_order(nu, z, spec)?.value;
    let kp = crate::specfun::macdonald_imag_order_dz(nu, z, spec)?.value;
    let r2 = d.rho * d.rho;
    let bracket = (1.0 - (nu / z).powi(2)) * r2 - 1.0;
    Ok((d.q * d.epsilon / (PI * r2)).powi(2) * (PI * nu).exp() / d.c * (bracket * k * k + r2 * kp * kp) * z * z)
}

/// `d^3w / (k0^2 dk0 dOmega) = (1/(2 eps))(qc/pi)^2 sin^2(theta) tanh(eta) Re[I_0^(2) e^{-i Lambda (sinh eta - cos(theta) cosh eta)}]`.
/// May be negative.
pub fn rate_spectral_angular(d: &DerivedConstants, k0: f64, theta: f64, window: &Window, spec: &QuadSpec) -> Result<f64> {
    parallel_only(d)?;
    let eta = upper_eta(window)?;
    let st = theta.sin();
    if window.is_empty() || st == 0.0 {
        return Ok(0.0);
    }
    let lambda = lambda_of(d, k0);
    let i = i0_2(lambda, theta, &window.eta, spec)?.value;
    let psi = parallel_phase(lambda, theta)?.psi(eta);
    let pre = (d.q * d.c / PI).powi(2) / (2.0 * d.epsilon);
    Ok(pre * st * st * eta.tanh() * (i * Complex64::from_polar(1.0, -psi)).re)
}

/// Large-`Lambda` form
/// `(q^2 c / (2 pi^2 k0)) sin^2(theta) tanh(eta) tanh(eta_in) / (1 - tanh(eta_in) cos(theta)) sin(Lambda delta)`;
/// returns the value and `delta`.
pub fn rate_spectral_angular_asymptotic(d: &DerivedConstants, k0: f64, theta: f64, eta_in: f64, eta: f64) -> Result<(f64, f64)> {
    parallel_only(d)?;
    let ct = theta.cos();
    let delta = eta.sinh() - eta_in.sinh() - (eta.cosh() - eta_in.cosh()) * ct;
    let g = eta_in.tanh() / (1.0 - eta_in.tanh() * ct);
    let v = d.q * d.q * d.c / (2.0 * PI * PI * k0) * theta.sin().powi(2) * eta.tanh() * g * (lambda_of(d, k0) * delta).sin();
    Ok((v, delta))
}

fn parallel_only(d: &DerivedConstants) -> Result<()> {
    d.require_field()?;
    if d.is_parallel() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("this form holds only for motion along the field (u_perp = 0)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::WaveVector;
    use crate::radiation::energy::{energy_density, eta_window};
    use crate::units::{derive_constants, SourceConfig, UnitSystem};
    use rand::{Rng, SeedableRng};

    fn source(ux: f64, uy: f64, upar: f64) -> DerivedConstants {
        let u = UnitSystem::default();
        derive_constants(&SourceConfig::at_rest_with_scale(0.9, 0.6, &u).with_u_perp(ux, uy).with_u_par(upar), &u).unwrap()
    }

    fn spec() -> QuadSpec {
        QuadSpec::with_tol(1e-15, 1e-12)
    }

    #[test]
    fn reduced_rate_density_matches_endpoint_derivative() {
        let d = source(0.7, -0.4, 0.2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for i in 0..60 {
            let k = WaveVector::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-5.0..5.0));
            let hi = rng.gen_range(-1.0..1.5);
            let w = if i % 3 == 0 { Window::half_infinite(hi) } else { eta_window(hi - rng.gen_range(0.1..2.0), hi).unwrap() };
            let a = rate_density(&d, &k, &w, Route::Rapidity, &spec()).unwrap();
            let b = rate_density(&d, &k, &w, Route::Reduced, &spec()).unwrap();
            assert!((a - b).abs() < 1e-8 * (a.abs() + 1e-4), "{k:?} {w:?}: {a} {b}");
        }
    }

    #[test]
    fn rate_density_is_time_derivative_of_energy_density() {
        let d = source(0.3, 0.5, -0.1);
        let k = WaveVector::new(1.1, -0.6, 0.8);
        let (lo, hi) = (-0.4, 0.9);
        let h = 1e-4;
        let e = |x: f64| energy_density(&d, &k, &eta_window(lo, x).unwrap(), Route::Rapidity, &spec()).unwrap().value;
        let fd = (8.0 * (e(hi + h) - e(hi - h)) - (e(hi + 2.0 * h) - e(hi - 2.0 * h))) / (12.0 * h);
        let r = rate_density(&d, &k, &eta_window(lo, hi).unwrap(), Route::Rapidity, &spec()).unwrap();
        assert!((fd * eta_rate(&d, hi) - r).abs() < 1e-8 * r.abs(), "{fd} {r}");
    }

    #[test]
    fn parallel_form_matches_general_form() {
        let d = source(0.0, 0.0, 0.3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for i in 0..40 {
            let k = WaveVector::cylindrical(rng.gen_range(0.01..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.0..6.0));
            let w = if i % 2 == 0 { Window::half_infinite(0.7) } else { eta_window(-0.5, 1.2).unwrap() };
            let a = rate_density(&d, &k, &w, Route::Rapidity, &spec()).unwrap();
            let b = rate_density_parallel(&d, &k, &w, &spec()).unwrap();
            assert!((a - b).abs() < 1e-9 * (a.abs() + 1e-6), "{a} {b}");
        }
        let grid = KGrid::cylindrical(6.0, 6.0, 4, 8);
        let w = eta_window(0.0, 1.0).unwrap();
        let g = rate_general(&d, &w, &spec(), &Cutoffs::default(), Some(&grid)).unwrap();
        let p = rate_parallel(&d, &w, &spec(), &Cutoffs::default(), Some(&grid)).unwrap();
        assert!((g.w - p.w).abs() < 1e-8 * g.w.abs(), "{} {}", g.w, p.w);
        assert_eq!(g.variant, RateVariant::Asymmetric);
    }

    #[test]
    fn empty_window_rate_is_zero() {
        let d = source(0.2, 0.0, 0.0);
        let w = eta_window(0.4, 0.4).unwrap();
        let r = rate_general(&d, &w, &spec(), &Cutoffs::default(), None).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(rate_density(&d, &WaveVector::new(1.0, 0.0, 0.0), &w, Route::Reduced, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn larmor_like_limit() {
        let d = source(0.0, 0.0, 0.0);
        let r = rate_asymptotic(&d, &QuadSpec::default()).unwrap();
        let c = r.check.unwrap();
        assert!((c.value - 2.0).abs() < 1e-8, "{}", c.value);
        assert_eq!(r.w, 2.0 * d.q * d.q * d.epsilon * d.epsilon / d.c);
        let larmor = 2.0 / 3.0 * d.q * d.q * d.accel * d.accel / d.c.powi(3);
        assert!((r.w / larmor - 3.0).abs() < 1e-14);
    }

    #[test]
    fn classical_rate_ratio() {
        let d = source(0.0, 0.0, 0.0);
        let cl = rate_classical_nr(&d, &QuadSpec::default()).unwrap();
        let c = cl.check.unwrap();
        assert!((c.value - 3.0 * PI * PI / 32.0).abs() < 1e-8);
        let w = rate_asymptotic(&d, &QuadSpec::default()).unwrap().w;
        assert!((cl.w / w - 3.0 * PI / 32.0).abs() < 1e-10);
        assert!(rate_classical_nr(&source(0.1, 0.0, 0.0), &QuadSpec::default()).is_err());
    }

    #[test]
    fn differential_classical_rate_integrates_to_total() {
        let d = source(0.0, 0.0, 0.0);
        let s = QuadSpec::with_tol(1e-15, 1e-12);
        let per_z = crate::quadrature::integrate_to_infinity(|z: f64| if z == 0.0 { 0.0 } else { dw_cl(&d, z, 0.3, &s).unwrap() }, 0.0, 1.0, &s);
        let total = rate_classical_nr(&d, &s).unwrap().w;
        assert!((2.0 * PI * per_z.value - total).abs() < 1e-9 * total);
        // transverse motion: the differential form stays finite and depends on vartheta
        let t = source(0.8, 0.0, 0.0);
        let a = dw_cl(&t, 1.0, 0.0, &s).unwrap();
        let b = dw_cl(&t, 1.0, PI, &s).unwrap();
        assert!(a.is_finite() && b.is_finite() && (a - b).abs() > 1e-6 * a.abs());
    }

    #[test]
    fn spectral_angular_rate_matches_density() {
        let d = source(0.0, 0.0, 0.0);
        let w = eta_window(0.2, 1.4).unwrap();
        for (k0, th) in [(0.7, 0.4), (3.0, 1.9)] {
            let a = rate_spectral_angular(&d, k0, th, &w, &spec()).unwrap();
            let b = rate_density(&d, &WaveVector::spherical(k0, th, 0.5), &w, Route::Rapidity, &spec()).unwrap();
            assert!((a - b).abs() < 1e-10 * b.abs(), "{a} {b}");
        }
        assert_eq!(rate_spectral_angular(&d, 1.0, 0.0, &w, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn large_lambda_rate_form_converges() {
        let d = source(0.0, 0.0, 0.0);
        let (eta_in, eta, th) = (0.5, 2.0, PI / 4.0);
        let w = eta_window(eta_in, eta).unwrap();
        let mut errs = vec![];
        for lambda in [10.0, 20.0, 40.0, 80.0] {
            let k0 = lambda * d.epsilon / d.c;
            let exact = rate_spectral_angular(&d, k0, th, &w, &spec()).unwrap();
            let (asym, delta) = rate_spectral_angular_asymptotic(&d, k0, th, eta_in, eta).unwrap();
            assert!((delta - (eta.sinh() - eta_in.sinh() - (eta.cosh() - eta_in.cosh()) * th.cos())).abs() < 1e-15);
            errs.push(((exact - asym) * k0).abs());
        }
        // k0 times the difference falls off like 1/Lambda
        assert!(errs[3] < errs[0] / 4.0, "{errs:?}");
    }
}
