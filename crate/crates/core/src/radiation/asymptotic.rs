//! Large-`Lambda` forms of the spectral-angular distribution for motion along the field.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::energy::{density_prefactor, lambda_of};
use crate::error::{Error, Result};
use crate::units::DerivedConstants;

fn psi(theta: f64, eta: f64) -> f64 {
    eta.sinh() - theta.cos() * eta.cosh()
}

/// `sinh eta / (cosh eta - cos(theta) sinh eta)`; the denominator is `>= e^{-|eta|} > 0`.
fn edge_amplitude(theta: f64, eta: f64) -> f64 {
    let den = eta.cosh() - theta.cos() * eta.sinh();
    assert!(den > 0.0, "nonpositive stationary-phase denominator at theta={theta}, eta={eta}");
    eta.sinh() / den
}

/// Boundary-term approximation
/// `I_as = (1/(i Lambda)) [sinh eta'/(cosh eta' - cos(theta) sinh eta') e^{i Lambda (sinh eta' - cos(theta) cosh eta')}]`
/// between `eta_in` and `eta`; the remainder is `O(Lambda^-2)`.
pub fn stationary_phase_i2(theta: f64, eta_in: f64, eta: f64, lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("Lambda must be > 0, got {lambda}")));
    }
    let term = |x: f64| edge_amplitude(theta, x) * Complex64::from_polar(1.0, lambda * psi(theta, x));
    Ok((term(eta) - term(eta_in)) / Complex64::new(0.0, lambda))
}

/// `(q sin(theta) sinh(eta) / (2 pi k0 (cosh eta - cos(theta) sinh eta)))^2`, window `[0, eta]`.
pub fn asymptotic_distribution(d: &DerivedConstants, k0: f64, theta: f64, eta: f64) -> Result<f64> {
    if !(k0 > 0.0) {
        return Err(Error::InvalidArgument(format!("k0 must be > 0, got {k0}")));
    }
    Ok((d.q * theta.sin() * edge_amplitude(theta, eta) / (2.0 * PI * k0)).powi(2))
}

/// `(qc/(2 pi eps))^2 sin^2(theta) |I_as|^2` for a general window.
pub fn asymptotic_distribution_window(d: &DerivedConstants, k0: f64, theta: f64, eta_in: f64, eta: f64) -> Result<f64> {
    let i = stationary_phase_i2(theta, eta_in, eta, lambda_of(d, k0))?;
    Ok(density_prefactor(d) * theta.sin().powi(2) * i.norm_sqr())
}

/// Angle of maximal large-`Lambda` emission, `arccos(tanh eta)`.
pub fn theta_max(eta: f64) -> f64 {
    eta.tanh().acos()
}

/// Maximizes `f` on `[a, b]` by golden-section search; `f` must be unimodal.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadSpec;
    use crate::radiation::energy::{eta_window, i0_2, spectral_angular_energy};
    use crate::units::{derive_constants, SourceConfig, UnitSystem};

    fn source() -> DerivedConstants {
        let u = UnitSystem::default();
        derive_constants(&SourceConfig::at_rest_with_scale(2.0, 0.1, &u), &u).unwrap()
    }

    #[test]
    fn boundary_term_error_falls_like_inverse_square() {
        let spec = QuadSpec::with_tol(1e-16, 1e-13);
        let w = eta_window(0.0, 2.0).unwrap();
        let th = PI / 2.0;
        let errs: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&l| (i0_2(l, th, &w.eta, &spec).unwrap().value - stationary_phase_i2(th, 0.0, 2.0, l).unwrap()).norm())
            .collect();
        for p in errs.windows(2) {
            let slope = (p[1] / p[0]).log2();
            assert!((slope + 2.0).abs() < 0.5, "{errs:?}");
        }
    }

    #[test]
    fn asymptotic_forms_agree_for_zero_start() {
        let d = source();
        for (k0, th, eta) in [(50.0, 0.7, 2.0), (120.0, 2.0, 3.0)] {
            let a = asymptotic_distribution(&d, k0, th, eta).unwrap();
            let b = asymptotic_distribution_window(&d, k0, th, 0.0, eta).unwrap();
            assert!((a - b).abs() < 1e-13 * a);
        }
        assert!(asymptotic_distribution(&d, 10.0, 1.0, 1e-9).unwrap() < 1e-18);
    }

    #[test]
    fn exact_distribution_approaches_asymptotic() {
        let d = source();
        let w = eta_window(0.0, 1.5).unwrap();
        let spec = QuadSpec::with_tol(1e-16, 1e-12);
        let k0 = 400.0 * d.epsilon / d.c;
        let e = spectral_angular_energy(&d, k0, 1.0, &w, &spec).unwrap().value;
        let a = asymptotic_distribution(&d, k0, 1.0, 1.5).unwrap();
        assert!((e - a).abs() < 2e-2 * a, "{e} {a}");
    }

    #[test]
    fn maximum_angle() {
        let d = source();
        for eta in [1.0, 2.0, 3.0, 4.0] {
            let th = golden_max(|t| asymptotic_distribution(&d, 1.0, t, eta).unwrap(), 1e-9, PI - 1e-9, 1e-11);
            assert!((th - theta_max(eta)).abs() < 1e-6, "{eta}: {th} {}", theta_max(eta));
        }
    }
}
