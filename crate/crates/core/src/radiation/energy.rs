//! Radiated energy: k-space densities, totals and the spectral-angular form
//! for motion along the field.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitude::{amplitude_integrals, reduced_values, Route};
use super::grid::{default_grid, integrate_grid, node_spec, sum_on_grid, Cutoffs};
use crate::error::{Error, Result};
use crate::kinematics::{Endpoint, Interval, WaveVector, Window};
use crate::quadrature::{GridSum, KGrid, KSpaceResult, QuadResult, QuadSpec};
use crate::specfun::{ExpPhase, MacdonaldOptions};
use crate::units::DerivedConstants;

/// A nonnegative energy density in k-space with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionValue {
    pub value: f64,
    pub error: f64,
}

/// `(q c / (2 pi eps))^2`.
pub fn density_prefactor(d: &DerivedConstants) -> f64 {
    (d.q * d.c / (2.0 * PI * d.epsilon)).powi(2)
}

/// `d^3W / dk^3` for the mode `k`.
///
/// `Route::Reduced` evaluates `(qc/(eps pi))^2 e^{pi nu} {[(1 - nu^2/z^2) rho^2 - 1]|K|^2 + rho^2 |S|^2}`;
/// on the field axis, where that form is singular, it falls back to the
/// rapidity moments. The other routes sum `|I|^2 - |n.I|^2`.
pub fn energy_density(d: &DerivedConstants, k: &WaveVector, window: &Window, route: Route, spec: &QuadSpec) -> Result<DistributionValue> {
    if window.is_empty() {
        return Ok(DistributionValue { value: 0.0, error: 0.0 });
    }
    if !window.eta.is_finite() {
        return Err(Error::ClassicalDivergence(
            "the energy of an infinite emission window is divergent; use a finite window or a rate".into(),
        ));
    }
    if route == Route::Reduced && k.kperp() > 0.0 {
        let (m, sv) = reduced_values(d, k, window, &MacdonaldOptions::default(), spec)?;
        let r2 = d.rho * d.rho;
        let nz = if m.nu == 0.0 { 0.0 } else { m.nu / m.z };
        let bracket = (1.0 - nz * nz) * r2 - 1.0;
        let pre = (d.q * d.c / (d.epsilon * PI)).powi(2) * (PI * m.nu).exp();
        let value = pre * (bracket * sv.k.value.norm_sqr() + r2 * sv.s.value.norm_sqr());
        let error = pre * 2.0 * (bracket.abs() * sv.k.value.norm() * sv.k.error + r2 * sv.s.value.norm() * sv.s.error);
        return Ok(DistributionValue { value, error });
    }
    let route = if route == Route::Reduced { Route::Rapidity } else { route };
    let a = amplitude_integrals(d, k, window, route, spec)?;
    let pre = density_prefactor(d);
    let v = a.assembled(d);
    let mag: f64 = v.iter().map(|c| c.norm()).sum();
    Ok(DistributionValue { value: pre * a.polarization_sum(d, k), error: pre * 4.0 * mag * a.error * (d.rho + 1.0) })
}

/// Total radiated energy `W(t, t_in)` with the default grid and cutoff growth.
pub fn total_energy(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs) -> Result<KSpaceResult> {
    check_window(window)?;
    let grid = default_grid(d, window, spec, cutoffs);
    total_energy_with(d, window, &grid, spec, cutoffs.is_fixed())
}

/// Total energy on a given grid; `fixed` disables cutoff growth.
pub fn total_energy_with(d: &DerivedConstants, window: &Window, grid: &KGrid, spec: &QuadSpec, fixed: bool) -> Result<KSpaceResult> {
    check_window(window)?;
    d.require_field()?;
    if window.is_empty() {
        return Ok(KSpaceResult { value: 0.0, error: 0.0, grid: *grid, converged: true, trend: vec![] });
    }
    let ns = node_spec(spec);
    integrate_grid(|k| Ok(energy_density(d, k, window, Route::Rapidity, &ns)?.value), grid, spec, fixed)
}

/// Total energy as a single fixed-grid sum.
pub fn total_energy_on_grid(d: &DerivedConstants, window: &Window, grid: &KGrid, route: Route, spec: &QuadSpec) -> Result<GridSum<f64>> {
    check_window(window)?;
    let ns = node_spec(spec);
    sum_on_grid(|k| Ok(energy_density(d, k, window, route, &ns)?.value), grid)
}

fn check_window(window: &Window) -> Result<()> {
    if window.eta.is_finite() || window.is_empty() {
        Ok(())
    } else {
        Err(Error::ClassicalDivergence(
            "the classical energy over an infinite window diverges; give finite eta_in and eta".into(),
        ))
    }
}

/// Rapidity phase `Lambda (sinh eta - cos(theta) cosh eta)` of motion along the field.
pub fn parallel_phase(lambda: f64, theta: f64) -> Result<ExpPhase> {
    let s = (0.5 * theta).sin();
    let c = (0.5 * theta).cos();
    ExpPhase::new(lambda * s * s, lambda * c * c, 0.0)
}

/// `I_0^(2)(theta) = int sinh(eta') e^{i Lambda (sinh eta' - cos(theta) cosh eta')} d eta'`.
pub fn i0_2(lambda: f64, theta: f64, window: &Interval, spec: &QuadSpec) -> Result<QuadResult<Complex64>> {
    let phase = parallel_phase(lambda, theta)?;
    let m = super::amplitude::rapidity_moments(&phase, window, spec)?;
    Ok(m.map(|[jm, _, jp]| 0.5 * (jp - jm)))
}

/// `Lambda = c k0 / eps` (equal to `c^2 k0 / a`).
pub fn lambda_of(d: &DerivedConstants, k0: f64) -> f64 {
    d.c * k0 / d.epsilon
}

fn require_parallel(d: &DerivedConstants) -> Result<()> {
    d.require_field()?;
    if d.is_parallel() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("this form holds only for motion along the field (u_perp = 0)".into()))
    }
}

/// `d^2W / (k0^2 dk0 dOmega) = (qc/(2 pi eps))^2 sin^2(theta) |I_0^(2)(theta)|^2`.
pub fn spectral_angular_energy(d: &DerivedConstants, k0: f64, theta: f64, window: &Window, spec: &QuadSpec) -> Result<DistributionValue> {
    require_parallel(d)?;
    check_window(window)?;
    if window.is_empty() {
        return Ok(DistributionValue { value: 0.0, error: 0.0 });
    }
    let st = theta.sin();
    if st == 0.0 || k0 == 0.0 && window.is_empty() {
        return Ok(DistributionValue { value: 0.0, error: 0.0 });
    }
    let i = i0_2(lambda_of(d, k0), theta, &window.eta, spec)?;
    let pre = density_prefactor(d) * st * st;
    Ok(DistributionValue { value: pre * i.value.norm_sqr(), error: pre * 2.0 * i.value.norm() * i.error })
}

/// Window with `eta_in` and `eta` given directly.
pub fn eta_window(eta_in: f64, eta: f64) -> Result<Window> {
    Ok(Window { eta: Interval::new(Endpoint::Finite(eta_in), Endpoint::Finite(eta))? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{derive_constants, SourceConfig, UnitSystem};
    use rand::{Rng, SeedableRng};

    fn source(ux: f64, uy: f64, upar: f64) -> DerivedConstants {
        let u = UnitSystem::default();
        derive_constants(&SourceConfig::at_rest_with_scale(1.3, 0.5, &u).with_u_perp(ux, uy).with_u_par(upar), &u).unwrap()
    }

    fn spec() -> QuadSpec {
        QuadSpec::with_tol(1e-15, 1e-11)
    }

    #[test]
    fn empty_window_and_infinite_window() {
        let d = source(0.2, 0.0, 0.0);
        let k = WaveVector::new(0.4, 0.1, 0.3);
        let w = eta_window(0.7, 0.7).unwrap();
        assert_eq!(energy_density(&d, &k, &w, Route::Rapidity, &spec()).unwrap().value, 0.0);
        let inf = Window::half_infinite(0.4);
        assert!(matches!(energy_density(&d, &k, &inf, Route::Rapidity, &spec()), Err(Error::ClassicalDivergence(_))));
        assert!(matches!(total_energy(&d, &inf, &spec(), &Cutoffs::default()), Err(Error::ClassicalDivergence(_))));
    }

    #[test]
    fn reduced_and_polarization_forms_agree() {
        let d = source(0.5, 0.8, -0.2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let k = WaveVector::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
            let lo = rng.gen_range(-2.0..1.5);
            let w = eta_window(lo, lo + rng.gen_range(0.05..1.5)).unwrap();
            let a = energy_density(&d, &k, &w, Route::Rapidity, &spec()).unwrap();
            let b = energy_density(&d, &k, &w, Route::Reduced, &spec()).unwrap();
            assert!(a.value >= 0.0);
            assert!((a.value - b.value).abs() < 1e-8 * a.value.max(1e-6), "{k:?} {a:?} {b:?}");
        }
    }

    #[test]
    fn parallel_density_matches_spectral_angular_form() {
        let d = source(0.0, 0.0, 0.4);
        let w = eta_window(-0.3, 1.7).unwrap();
        for (k0, th) in [(0.5, 0.3), (2.0, 1.2), (7.0, 2.6)] {
            let sa = spectral_angular_energy(&d, k0, th, &w, &spec()).unwrap();
            for phi in [0.0, PI / 3.0, PI] {
                let k = WaveVector::spherical(k0, th, phi);
                let e = energy_density(&d, &k, &w, Route::Rapidity, &spec()).unwrap();
                assert!((e.value - sa.value).abs() < 1e-10 * sa.value);
                let again = spectral_angular_energy(&d, k0, th, &w, &spec()).unwrap();
                assert!((again.value - sa.value).abs() <= 1e-12 * sa.value);
            }
        }
        assert_eq!(spectral_angular_energy(&d, 1.0, 0.0, &w, &spec()).unwrap().value, 0.0);
        assert!(spectral_angular_energy(&d, 1.0, PI, &w, &spec()).unwrap().value < 1e-28);
    }

    #[test]
    fn on_axis_density_is_continuous() {
        let d = source(0.0, 0.0, 0.0);
        let w = eta_window(0.0, 2.5).unwrap();
        for kpar in [-4.0, -0.5, 0.5, 4.0] {
            let axis = energy_density(&d, &WaveVector::new(0.0, 0.0, kpar), &w, Route::Reduced, &spec()).unwrap();
            assert_eq!(axis.value, 0.0);
            let near = energy_density(&d, &WaveVector::new(1e-6, 0.0, kpar), &w, Route::Reduced, &spec()).unwrap();
            assert!(near.value < 1e-9);
        }
        let d = source(0.7, 0.0, 0.0);
        let axis = energy_density(&d, &WaveVector::new(0.0, 0.0, 1.0), &w, Route::Reduced, &spec()).unwrap();
        let near = energy_density(&d, &WaveVector::new(1e-7, 0.0, 1.0), &w, Route::Rapidity, &spec()).unwrap();
        assert!(axis.value > 0.0 && axis.value.is_finite());
        assert!((axis.value - near.value).abs() < 1e-5 * axis.value);
    }

    #[test]
    fn total_energy_routes_agree_and_are_nonnegative() {
        let d = source(0.0, 0.0, 0.0);
        let w = eta_window(0.0, 0.8).unwrap();
        let grid = KGrid::cylindrical(8.0, 8.0, 6, 12);
        let a = total_energy_on_grid(&d, &w, &grid, Route::Rapidity, &spec()).unwrap();
        let b = total_energy_on_grid(&d, &w, &grid, Route::Reduced, &spec()).unwrap();
        assert!(a.value > 0.0);
        assert!((a.value - b.value).abs() < 1e-8 * a.value, "{} {}", a.value, b.value);
        let empty = total_energy_with(&d, &eta_window(0.3, 0.3).unwrap(), &grid, &spec(), true).unwrap();
        assert_eq!(empty.value, 0.0);
    }
}
